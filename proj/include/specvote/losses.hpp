#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "specvote/array_io.hpp"
#include "specvote/errors.hpp"
#include "specvote/metrics.hpp"

namespace specvote {

/// Candidate soft predictions for one image together with the predicted
/// objectness score of each candidate.
struct PredictionBatch {
  std::vector<SoftMask> predictions;
  std::vector<double> objectness;

  std::size_t size() const { return predictions.size(); }
};

namespace detail {

inline void check_prediction(const SoftMask& pred, const BinaryMask& gt) {
  require_same_shape(pred.height, pred.width, gt.height, gt.width, "dice");
  for (double v : pred.values)
    if (!std::isfinite(v)) throw data_error("non-finite prediction value");
}

}  // namespace detail

/// Soft Dice loss, 1 - (2 sum(p g) + eps) / (sum(p) + sum(g) + eps).
/// The eps term keeps the empty-against-empty case at loss 0.
inline double dice_loss(const SoftMask& pred, const BinaryMask& gt,
                        double eps = 1.0) {
  detail::check_prediction(pred, gt);
  double inter = 0.0, psum = 0.0;
  std::int64_t gsum = 0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    psum += pred.values[i];
    if (gt.bits[i] != 0) {
      inter += pred.values[i];
      ++gsum;
    }
  }
  const double num = 2.0 * inter + eps;
  const double den = psum + static_cast<double>(gsum) + eps;
  return 1.0 - num / den;
}

struct DiceGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Dice loss with its exact gradient in the prediction values. With
/// N = 2 sum(p g) + eps and D = sum(p) + sum(g) + eps the derivative at
/// pixel i is -(2 g_i D - N) / D^2.
inline DiceGrad dice_loss_grad(const SoftMask& pred, const BinaryMask& gt,
                               double eps = 1.0) {
  detail::check_prediction(pred, gt);
  double inter = 0.0, psum = 0.0;
  std::int64_t gsum = 0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    psum += pred.values[i];
    if (gt.bits[i] != 0) {
      inter += pred.values[i];
      ++gsum;
    }
  }
  const double num = 2.0 * inter + eps;
  const double den = psum + static_cast<double>(gsum) + eps;

  DiceGrad out;
  out.loss = 1.0 - num / den;
  out.grad.resize(pred.values.size());
  const double den2 = den * den;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double g = gt.bits[i] != 0 ? 1.0 : 0.0;
    out.grad[i] = -(2.0 * g * den - num) / den2;
  }
  return out;
}

/// Dice loss of every candidate in the batch against one ground truth.
inline std::vector<double> batch_dice_losses(const PredictionBatch& batch,
                                             const BinaryMask& gt,
                                             double eps = 1.0) {
  std::vector<double> losses;
  losses.reserve(batch.size());
  for (const SoftMask& pred : batch.predictions)
    losses.push_back(dice_loss(pred, gt, eps));
  return losses;
}

/// Candidate indices ordered by loss ascending, best first. The sort is
/// stable, so equal losses keep their original relative order.
inline std::vector<std::size_t> rank_predictions(
    const std::vector<double>& losses) {
  std::vector<std::size_t> order(losses.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return losses[a] < losses[b];
                   });
  return order;
}

inline std::vector<std::size_t> rank_predictions(const PredictionBatch& batch,
                                                 const BinaryMask& pseudo,
                                                 double eps = 1.0) {
  return rank_predictions(batch_dice_losses(batch, pseudo, eps));
}

struct RankingGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Hinge ranking loss over all ordered pairs of the ranking: for every
/// pair where a better-ranked candidate is scored below a worse-ranked
/// one, the gap is paid. order[0] is the best candidate; grad lives in
/// original index space. Exactly tied scores sit on the hinge kink and
/// contribute zero loss and zero subgradient.
inline RankingGrad ranking_loss_grad(const std::vector<double>& objectness,
                                     const std::vector<std::size_t>& order) {
  if (order.size() != objectness.size())
    throw shape_error("ranking order and objectness lengths differ");
  RankingGrad out;
  out.grad.assign(objectness.size(), 0.0);
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const double diff = objectness[order[j]] - objectness[order[i]];
      if (diff > 0.0) {
        out.loss += diff;
        out.grad[order[j]] += 1.0;
        out.grad[order[i]] -= 1.0;
      }
    }
  return out;
}

inline double ranking_loss(const std::vector<double>& objectness,
                           const std::vector<std::size_t>& order) {
  return ranking_loss_grad(objectness, order).loss;
}

/// The full training objective for one image: mean dice loss over the
/// candidates plus lambda times the ranking loss, with gradients for
/// every prediction pixel and every objectness score.
struct TotalLoss {
  double total = 0.0;
  double mask_term = 0.0;
  double rank_term = 0.0;
  std::vector<double> dice;
  std::vector<std::size_t> order;
  std::vector<std::vector<double>> prediction_grads;
  std::vector<double> objectness_grad;
};

inline TotalLoss total_loss(const PredictionBatch& batch, const BinaryMask& gt,
                            double lambda = 1.0, double eps = 1.0) {
  if (batch.predictions.empty())
    throw parameter_error("loss needs at least one prediction");
  if (batch.objectness.size() != batch.predictions.size())
    throw shape_error("objectness count does not match prediction count");

  TotalLoss out;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const SoftMask& pred : batch.predictions) {
    DiceGrad d = dice_loss_grad(pred, gt, eps);
    out.dice.push_back(d.loss);
    out.mask_term += d.loss * inv_n;
    for (double& g : d.grad) g *= inv_n;
    out.prediction_grads.push_back(std::move(d.grad));
  }
  out.order = rank_predictions(out.dice);

  RankingGrad rank = ranking_loss_grad(batch.objectness, out.order);
  out.rank_term = rank.loss;
  out.total = out.mask_term + lambda * rank.loss;
  out.objectness_grad = std::move(rank.grad);
  for (double& g : out.objectness_grad) g *= lambda;
  return out;
}

/// At inference one candidate survives: the one with the highest
/// objectness (first on ties), binarized strictly above 0.5.
inline BinaryMask select_inference_mask(const PredictionBatch& batch) {
  if (batch.predictions.empty())
    throw parameter_error("inference needs at least one prediction");
  if (batch.objectness.size() != batch.predictions.size())
    throw shape_error("objectness count does not match prediction count");
  std::size_t best = 0;
  for (std::size_t i = 1; i < batch.size(); ++i)
    if (batch.objectness[i] > batch.objectness[best]) best = i;

  const SoftMask& pred = batch.predictions[best];
  BinaryMask mask = BinaryMask::filled(pred.height, pred.width, false);
  for (std::size_t i = 0; i < pred.values.size(); ++i)
    mask.bits[i] = pred.values[i] > 0.5;
  return mask;
}

}  // namespace specvote
