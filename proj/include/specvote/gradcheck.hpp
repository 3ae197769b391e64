#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "specvote/array_io.hpp"
#include "specvote/losses.hpp"
#include "specvote/rng.hpp"

namespace specvote {

/// Tally of central-difference comparisons for one loss. checks counts
/// individual coordinates, failures counts coordinates whose scaled
/// error exceeded the tolerance.
struct GradStats {
  long checks = 0;
  long failures = 0;
  double max_error = 0.0;
  bool passed() const { return checks > 0 && failures == 0; }
};

struct GradCheckReport {
  GradStats dice;
  GradStats ranking;
  GradStats total;
  bool passed() const {
    return dice.passed() && ranking.passed() && total.passed();
  }
};

namespace detail {

inline double scaled_error(double analytic, double numeric) {
  const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

template <typename Eval>
inline double central_difference(std::vector<double>& values, std::size_t i,
                                 double step, Eval&& eval) {
  const double saved = values[i];
  values[i] = saved + step;
  const double up = eval();
  values[i] = saved - step;
  const double down = eval();
  values[i] = saved;
  return (up - down) / (2.0 * step);
}

inline void record(GradStats& stats, double analytic, double numeric,
                   double tol) {
  const double err = scaled_error(analytic, numeric);
  ++stats.checks;
  if (!(err <= tol)) ++stats.failures;
  if (err > stats.max_error) stats.max_error = err;
}

}  // namespace detail

/// Verify the analytic loss gradients against central finite differences
/// on randomized instances. inject_bias shifts every analytic gradient
/// before comparison; a nonzero bias must make the report fail, which is
/// how the checker itself is tested for blindness.
inline GradCheckReport run_gradient_checks(std::uint64_t seed, int trials = 20,
                                           double step = 1e-5,
                                           double tol = 1e-6,
                                           double inject_bias = 0.0) {
  if (trials < 1) throw parameter_error("gradient check needs trials >= 1");
  GradCheckReport report;

  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, "gradcheck", static_cast<std::uint64_t>(t)));
    const int h = 2 + static_cast<int>(uniform_index(rng, 5));
    const int w = 2 + static_cast<int>(uniform_index(rng, 5));

    BinaryMask gt = BinaryMask::filled(h, w, false);
    for (auto& bit : gt.bits) bit = uniform_real01(rng) < 0.5;

    // Interior prediction values keep +-step perturbations meaningful.
    auto random_soft = [&] {
      SoftMask pred;
      pred.height = h;
      pred.width = w;
      pred.values.resize(static_cast<std::size_t>(h) * w);
      for (double& v : pred.values) v = 0.05 + 0.9 * uniform_real01(rng);
      return pred;
    };

    SoftMask pred = random_soft();
    DiceGrad dice = dice_loss_grad(pred, gt);
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
      const double numeric = detail::central_difference(
          pred.values, i, step, [&] { return dice_loss(pred, gt); });
      detail::record(report.dice, dice.grad[i] + inject_bias, numeric, tol);
    }

    // Ranking: resample until every score pair clears the hinge kink by
    // a wide margin, so the finite difference never straddles it.
    const std::size_t n_q = 2 + uniform_index(rng, 4);
    std::vector<double> objectness(n_q);
    for (int attempt = 0;; ++attempt) {
      for (double& o : objectness) o = 0.05 + 0.9 * uniform_real01(rng);
      double min_gap = 1.0;
      for (std::size_t a = 0; a < n_q; ++a)
        for (std::size_t b = a + 1; b < n_q; ++b)
          min_gap = std::min(min_gap, std::abs(objectness[a] - objectness[b]));
      if (min_gap > 100.0 * step || attempt > 200) break;
    }
    std::vector<double> fake_losses(n_q);
    for (double& v : fake_losses) v = uniform_real01(rng);
    const std::vector<std::size_t> order = rank_predictions(fake_losses);

    RankingGrad rank = ranking_loss_grad(objectness, order);
    for (std::size_t i = 0; i < n_q; ++i) {
      const double numeric = detail::central_difference(
          objectness, i, step, [&] { return ranking_loss(objectness, order); });
      detail::record(report.ranking, rank.grad[i] + inject_bias, numeric, tol);
    }

    // Combined objective. Dice losses of distinct random predictions are
    // generically separated far beyond anything a +-step nudge can move,
    // so the ranking stays constant under the perturbation and the
    // subgradient semantics match the finite difference.
    PredictionBatch batch;
    for (std::size_t q = 0; q < n_q; ++q)
      batch.predictions.push_back(random_soft());
    batch.objectness = objectness;

    TotalLoss total = total_loss(batch, gt);
    bool separated = true;
    for (std::size_t a = 0; a < n_q && separated; ++a)
      for (std::size_t b = a + 1; b < n_q; ++b)
        if (std::abs(total.dice[a] - total.dice[b]) < 1000.0 * step) {
          separated = false;
          break;
        }
    if (separated) {
      for (std::size_t q = 0; q < n_q; ++q)
        for (std::size_t i = 0; i < batch.predictions[q].values.size(); ++i) {
          const double numeric = detail::central_difference(
              batch.predictions[q].values, i, step,
              [&] { return total_loss(batch, gt).total; });
          detail::record(report.total,
                         total.prediction_grads[q][i] + inject_bias, numeric,
                         tol);
        }
      for (std::size_t i = 0; i < n_q; ++i) {
        const double numeric = detail::central_difference(
            batch.objectness, i, step,
            [&] { return total_loss(batch, gt).total; });
        detail::record(report.total, total.objectness_grad[i] + inject_bias,
                       numeric, tol);
      }
    }
  }
  return report;
}

}  // namespace specvote
