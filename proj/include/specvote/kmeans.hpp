#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "specvote/errors.hpp"
#include "specvote/rng.hpp"

namespace specvote {

/// Result of Lloyd's algorithm: labels in [0, k) with no empty cluster,
/// the k centers, and the total within-cluster squared distance.
struct Clustering {
  int k = 0;
  std::vector<int> assignments;
  Eigen::MatrixXd centers;
  double inertia = 0.0;
};

namespace detail {

inline double squared_distance(const Eigen::MatrixXd& points, int i,
                               const Eigen::MatrixXd& centers, int c) {
  return (points.row(i) - centers.row(c)).squaredNorm();
}

/// k-means++ seeding. Stream semantics, in engine-draw order: one
/// uniform_index draw for the first center, then one draw per remaining
/// center for the inverse-CDF pick over squared distances to the nearest
/// chosen center (pick_weighted falls back to a uniform_index draw when
/// every distance is zero).
inline Eigen::MatrixXd kmeans_pp_init(const Eigen::MatrixXd& points, int k,
                                      Rng& rng) {
  const int n = static_cast<int>(points.rows());
  Eigen::MatrixXd centers(k, points.cols());
  std::vector<double> dist_sq(n, std::numeric_limits<double>::infinity());

  const int first = static_cast<int>(uniform_index(rng, n));
  centers.row(0) = points.row(first);
  for (int c = 1; c < k; ++c) {
    for (int i = 0; i < n; ++i) {
      const double d = squared_distance(points, i, centers, c - 1);
      if (d < dist_sq[i]) dist_sq[i] = d;
    }
    centers.row(c) = points.row(static_cast<int>(pick_weighted(rng, dist_sq)));
  }
  return centers;
}

}  // namespace detail

/// Seeded k-means over the rows of `points` (n x dim). k-means++
/// initialisation, then Lloyd iterations until the assignments reach a
/// fixpoint or 100 iterations. Nearest-center ties go to the lowest center
/// index. A cluster left empty after an assignment pass is repaired by
/// stealing the point farthest from its assigned center, taken from
/// clusters holding at least two points (ties to the lowest point index).
/// Identical input and seed give bit-identical assignments. One restart
/// per call; callers wanting restarts vary the seed.
///
/// `inertia_trace`, when given, records the inertia after the initial
/// assignment and after each Lloyd iteration; the sequence is
/// non-increasing.
inline Clustering kmeans(const Eigen::MatrixXd& points, int k,
                         std::uint64_t seed,
                         std::vector<double>* inertia_trace = nullptr) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k > n)
    throw parameter_error("cluster count k=" + std::to_string(k) +
                          " out of range [1, " + std::to_string(n) + "]");
  if (!points.allFinite())
    throw data_error("kmeans input contains non-finite values");

  Rng rng(seed);
  Eigen::MatrixXd centers = detail::kmeans_pp_init(points, k, rng);

  std::vector<int> counts(k, 0);
  std::vector<double> point_dist(n, 0.0);

  // Nearest-center assignment; returns the resulting inertia.
  auto assign = [&](std::vector<int>& labels) {
    double total = 0.0;
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = detail::squared_distance(points, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = detail::squared_distance(points, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      labels[i] = best;
      point_dist[i] = best_d;
      ++counts[best];
      total += best_d;
    }
    return total;
  };

  // Give each empty cluster the globally farthest point as a singleton;
  // the donor cluster must keep at least one member. Feasible while
  // n >= k. Returns the inertia reduction.
  auto repair_empties = [&](std::vector<int>& labels) {
    double reclaimed = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      int victim = -1;
      double worst = -1.0;
      for (int i = 0; i < n; ++i) {
        if (counts[labels[i]] < 2) continue;
        if (point_dist[i] > worst) {
          worst = point_dist[i];
          victim = i;
        }
      }
      if (victim < 0)
        throw data_error("empty-cluster repair found no donor cluster");
      --counts[labels[victim]];
      labels[victim] = c;
      ++counts[c];
      reclaimed += point_dist[victim];
      point_dist[victim] = 0.0;
      centers.row(c) = points.row(victim);
    }
    return reclaimed;
  };

  std::vector<int> labels(n, -1);
  double inertia = assign(labels);
  inertia -= repair_empties(labels);
  if (inertia_trace) inertia_trace->push_back(inertia);

  const int max_iterations = 100;
  std::vector<int> next(n, -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    // Update step: centers move to member means.
    centers.setZero();
    for (int i = 0; i < n; ++i) centers.row(labels[i]) += points.row(i);
    for (int c = 0; c < k; ++c) centers.row(c) /= static_cast<double>(counts[c]);

    inertia = assign(next);
    inertia -= repair_empties(next);
    if (inertia_trace) inertia_trace->push_back(inertia);
    if (next == labels) break;
    labels.swap(next);
  }

  Clustering result;
  result.k = k;
  result.assignments = labels;
  result.centers = std::move(centers);
  result.inertia = 0.0;
  for (int i = 0; i < n; ++i)
    result.inertia +=
        (points.row(i) - result.centers.row(labels[i])).squaredNorm();
  return result;
}

}  // namespace specvote
