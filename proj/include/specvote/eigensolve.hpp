#pragma once

#include <Eigen/Dense>
#include <string>

#include "specvote/errors.hpp"
#include "specvote/graph.hpp"

namespace specvote {

/// The k lowest generalized eigenpairs of L u = lambda D u. Eigenvalues
/// ascending; column j of `vectors` is the eigenvector for eigenvalue j,
/// with columns D-orthonormal (u_i^T D u_j = delta_ij).
struct EigenBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;

  int count() const { return static_cast<int>(eigenvalues.size()); }
};

/// Solve L u = lambda D u for the k smallest eigenpairs by the symmetric
/// reduction S = D^{-1/2} L D^{-1/2}, S v = lambda v, u = D^{-1/2} v.
/// The reduction keeps the problem self-adjoint, so a dense symmetric
/// solver (tridiagonalisation + implicit QL) applies. Requires every
/// degree positive, which clamped-cosine graphs guarantee via self-loops.
/// In a degenerate eigenvalue cluster any orthonormal basis of the
/// eigenspace may be returned.
inline EigenBasis smallest_generalized_eigenpairs(const AffinityGraph& graph,
                                                  int k) {
  const Eigen::Index n = graph.size();
  if (k < 1 || k > n)
    throw parameter_error("eigenpair count k=" + std::to_string(k) +
                          " out of range [1, " + std::to_string(n) + "]");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(graph.degrees[i] > 0.0))
      throw parameter_error("vertex " + std::to_string(i) +
                            " has non-positive degree; generalized problem "
                            "is singular");
  }

  const Eigen::VectorXd inv_sqrt_d = graph.degrees.array().rsqrt();
  Eigen::MatrixXd reduced = inv_sqrt_d.asDiagonal() * graph.laplacian *
                            inv_sqrt_d.asDiagonal();
  // Scrub rounding asymmetry before handing to the self-adjoint solver.
  reduced = 0.5 * (reduced + reduced.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reduced);
  if (solver.info() != Eigen::Success)
    throw data_error("symmetric eigensolver failed to converge");

  EigenBasis basis;
  basis.eigenvalues = solver.eigenvalues().head(k);
  basis.vectors = inv_sqrt_d.asDiagonal() * solver.eigenvectors().leftCols(k);
  return basis;
}

}  // namespace specvote
