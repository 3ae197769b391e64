#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "specvote/array_io.hpp"
#include "specvote/errors.hpp"

namespace specvote {

/// Similarity graph over the h*w feature-grid cells: symmetric weight
/// matrix W with entries in [0, 1], degree vector d_i = sum_j w_ij, and
/// un-normalised Laplacian L = diag(d) - W.
struct AffinityGraph {
  Eigen::MatrixXd weights;
  Eigen::VectorXd degrees;
  Eigen::MatrixXd laplacian;

  Eigen::Index size() const { return weights.rows(); }

  /// Build degrees and Laplacian from an explicit weight matrix. W must
  /// be square; symmetry and non-negativity are the caller's contract.
  static AffinityGraph from_weights(Eigen::MatrixXd w) {
    if (w.rows() != w.cols())
      throw shape_error("weight matrix must be square");
    AffinityGraph g;
    g.degrees = w.rowwise().sum();
    g.laplacian = Eigen::MatrixXd(-w);
    g.laplacian.diagonal() += g.degrees;
    g.weights = std::move(w);
    return g;
  }
};

/// Edge weights are clamped cosine similarities between cell feature
/// vectors: w_ij = max(0, cos(f_i, f_j)). Negative cosines are clamped to
/// zero so all weights are valid graph edges; self-loops are kept
/// (w_ii = 1), which keeps every degree positive even for a cell whose
/// off-diagonal similarities all clamp to zero.
inline AffinityGraph build_graph(const FeatureMap& features) {
  const int n = features.cells();
  const int d = features.channels;
  if (n <= 0 || d <= 0) throw shape_error("empty feature map");

  // Normalise rows once; a zero-norm cell has no direction to compare.
  Eigen::MatrixXd unit(n, d);
  for (int i = 0; i < n; ++i) {
    const double* f = features.cell(i);
    double norm_sq = 0.0;
    for (int c = 0; c < d; ++c) norm_sq += f[c] * f[c];
    const double norm = std::sqrt(norm_sq);
    if (!(norm > 0.0))
      throw degenerate_feature_error(
          static_cast<std::size_t>(i),
          "zero-norm feature vector at cell " + std::to_string(i));
    for (int c = 0; c < d; ++c) unit(i, c) = f[c] / norm;
  }

  Eigen::MatrixXd w(n, n);
  for (int i = 0; i < n; ++i) {
    w(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double cos_ij = unit.row(i).dot(unit.row(j));
      const double clamped = cos_ij > 0.0 ? std::min(cos_ij, 1.0) : 0.0;
      w(i, j) = clamped;
      w(j, i) = clamped;
    }
  }
  return AffinityGraph::from_weights(std::move(w));
}

/// x^T L x. Equals 1/2 * sum_ij w_ij (x_i - x_j)^2, so it is non-negative
/// up to rounding.
inline double laplacian_quadratic(const AffinityGraph& graph,
                                  const Eigen::VectorXd& x) {
  if (x.size() != graph.size())
    throw shape_error("vector length " + std::to_string(x.size()) +
                      " does not match graph size " +
                      std::to_string(graph.size()));
  return x.dot(graph.laplacian * x);
}

}  // namespace specvote
