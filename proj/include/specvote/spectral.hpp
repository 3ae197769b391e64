#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "specvote/array_io.hpp"
#include "specvote/eigensolve.hpp"
#include "specvote/errors.hpp"
#include "specvote/graph.hpp"
#include "specvote/kmeans.hpp"
#include "specvote/rng.hpp"

namespace specvote {

/// One mask per cluster at feature resolution. Masks are pairwise
/// disjoint, non-empty, and cover the whole grid.
struct MaskSet {
  std::vector<BinaryMask> masks;
  std::string source;
  int k = 0;
  std::uint64_t seed = 0;
};

/// Where a candidate mask came from: which feature source, which cluster
/// count, which cluster index within that run.
struct MaskProvenance {
  std::string source;
  int k = 0;
  int cluster = 0;
  friend bool operator==(const MaskProvenance&, const MaskProvenance&) = default;
};

/// Masks collected across feature sources and k values, all on one shared
/// feature grid, each tagged with its provenance.
struct CandidatePool {
  std::vector<BinaryMask> masks;
  std::vector<MaskProvenance> provenance;
  int grid_h = 0;
  int grid_w = 0;

  std::size_t size() const { return masks.size(); }
};

/// A feature map labelled with its source name.
struct NamedFeatureMap {
  std::string name;
  FeatureMap features;
};

/// Normalised spectral clustering of a feature map: clamped-cosine
/// similarity graph, k lowest generalized eigenvectors of
/// L u = lambda D u, then seeded k-means on the rows of the n x k
/// eigenvector matrix. Cluster index order carries no meaning; comparisons
/// are up to label permutation.
inline MaskSet spectral_cluster(const FeatureMap& features, int k,
                                std::uint64_t seed,
                                const std::string& source = std::string()) {
  if (k < 1) throw parameter_error("cluster count must be >= 1");
  const AffinityGraph graph = build_graph(features);
  const EigenBasis basis = smallest_generalized_eigenpairs(graph, k);
  const Clustering clustering = kmeans(basis.vectors, k, seed);

  MaskSet set;
  set.source = source;
  set.k = k;
  set.seed = seed;
  set.masks.assign(k, BinaryMask::filled(features.h, features.w, false));
  for (int i = 0; i < features.cells(); ++i)
    set.masks[clustering.assignments[i]].bits[i] = 1;
  return set;
}

/// Run spectral clustering for every (source, k) combination and collect
/// the resulting masks into one pool of sum_k(k) * #sources candidates, in
/// (source order, ks order, cluster index) order. Per-run seeds come from
/// derive_seed(root, source, k), so adding a source or a k value leaves
/// the other runs' randomness untouched.
inline CandidatePool generate_candidates(
    const std::vector<NamedFeatureMap>& feature_sets,
    const std::vector<int>& ks, std::uint64_t seed) {
  if (feature_sets.empty())
    throw parameter_error("candidate generation needs at least one feature source");
  if (ks.empty())
    throw parameter_error("candidate generation needs at least one k value");
  const int h = feature_sets.front().features.h;
  const int w = feature_sets.front().features.w;
  for (const auto& [name, features] : feature_sets) {
    if (features.h != h || features.w != w)
      throw shape_error("feature source '" + name +
                        "' is on a different grid; resample to a common grid "
                        "before clustering");
  }

  CandidatePool pool;
  pool.grid_h = h;
  pool.grid_w = w;
  for (const auto& [name, features] : feature_sets) {
    for (int k : ks) {
      const std::uint64_t run_seed =
          derive_seed(seed, name, static_cast<std::uint64_t>(k));
      MaskSet set = spectral_cluster(features, k, run_seed, name);
      for (int c = 0; c < k; ++c) {
        pool.masks.push_back(std::move(set.masks[c]));
        pool.provenance.push_back(MaskProvenance{name, k, c});
      }
    }
  }
  return pool;
}

}  // namespace specvote
