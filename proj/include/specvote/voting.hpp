#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specvote/array_io.hpp"
#include "specvote/errors.hpp"
#include "specvote/metrics.hpp"
#include "specvote/rng.hpp"
#include "specvote/spectral.hpp"

namespace specvote {

/// Outcome of the vote. Indices refer to the candidate list as given,
/// not to the post-filter survivor list. scores[s] belongs to kept[s].
struct VoteResult {
  std::size_t winner = 0;
  std::vector<std::size_t> kept;
  std::vector<double> scores;
  bool tie = false;
};

/// A mask is frame-like when its foreground bounding box spans the full
/// image width or the full image height. A mask with no foreground has
/// no object at all and counts as frame-like too.
inline bool spans_frame(const BinaryMask& mask) {
  if (mask.empty_foreground()) return true;
  const BBox box = bounding_box(mask);
  return box.width() == mask.width || box.height() == mask.height;
}

/// Framing prior: drop frame-like candidates. If that would drop every
/// candidate, keep them all instead. Returns surviving indices in
/// ascending order.
inline std::vector<std::size_t> framing_filter(
    const std::vector<BinaryMask>& masks) {
  if (masks.empty())
    throw parameter_error("framing filter needs at least one mask");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < masks.size(); ++i)
    if (!spans_frame(masks[i])) kept.push_back(i);
  if (kept.empty()) {
    kept.resize(masks.size());
    for (std::size_t i = 0; i < masks.size(); ++i) kept[i] = i;
  }
  return kept;
}

/// Distinctiveness prior over the survivors: each mask scores the mean
/// IoU against every other survivor, and the highest score wins. A lone
/// survivor scores 0. Exact score ties are broken uniformly at random
/// from a stream derived from the seed, so reruns with one seed agree.
inline VoteResult winner_takes_all(const std::vector<BinaryMask>& masks,
                                   std::uint64_t seed) {
  VoteResult result;
  result.kept = framing_filter(masks);
  const std::size_t m = result.kept.size();
  result.scores.assign(m, 0.0);
  if (m > 1) {
    std::vector<double> overlap(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        const double score = iou(masks[result.kept[a]], masks[result.kept[b]]);
        overlap[a * m + b] = score;
        overlap[b * m + a] = score;
      }
    for (std::size_t a = 0; a < m; ++a) {
      double sum = 0.0;
      for (std::size_t b = 0; b < m; ++b)
        if (b != a) sum += overlap[a * m + b];
      result.scores[a] = sum / static_cast<double>(m - 1);
    }
  }

  double best = result.scores[0];
  for (double s : result.scores)
    if (s > best) best = s;
  std::vector<std::size_t> leaders;
  for (std::size_t a = 0; a < m; ++a)
    if (result.scores[a] == best) leaders.push_back(a);

  std::size_t pick = leaders[0];
  if (leaders.size() > 1) {
    result.tie = true;
    Rng rng(derive_seed(seed, "tie-break"));
    pick = leaders[uniform_index(rng, leaders.size())];
  }
  result.winner = result.kept[pick];
  return result;
}

/// Pool-level view of the framing prior: the surviving candidates with
/// their provenance. Idempotent by construction.
inline CandidatePool filter_pool(const CandidatePool& pool) {
  CandidatePool out;
  out.grid_h = pool.grid_h;
  out.grid_w = pool.grid_w;
  for (std::size_t i : framing_filter(pool.masks)) {
    out.masks.push_back(pool.masks[i]);
    out.provenance.push_back(pool.provenance[i]);
  }
  return out;
}

/// Vote over a candidate pool and hand back the winning mask. The full
/// vote detail, with pool indices, lands in *detail when asked for.
inline const BinaryMask& select_pseudo_mask(const CandidatePool& pool,
                                            std::uint64_t seed,
                                            VoteResult* detail = nullptr) {
  if (pool.masks.empty())
    throw parameter_error("pseudo mask selection needs a non-empty pool");
  VoteResult result = winner_takes_all(pool.masks, seed);
  const std::size_t winner = result.winner;
  if (detail) *detail = std::move(result);
  return pool.masks[winner];
}

/// Full proposal pipeline for one image: cluster every (source, k)
/// combination, pool the masks, filter, vote.
inline BinaryMask select_pseudo_mask(
    const std::vector<NamedFeatureMap>& feature_sets,
    const std::vector<int>& ks, std::uint64_t seed,
    VoteResult* detail = nullptr) {
  const CandidatePool pool = generate_candidates(feature_sets, ks, seed);
  return select_pseudo_mask(pool, seed, detail);
}

}  // namespace specvote
