#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "helpers/fixtures.hpp"
#include "specvote/metrics.hpp"
#include "specvote/spectral.hpp"

using namespace specvote;

namespace {

void check_partition(const MaskSet& set, int h, int w) {
  REQUIRE(static_cast<int>(set.masks.size()) == set.k);
  std::vector<int> cover(static_cast<std::size_t>(h) * w, 0);
  for (const BinaryMask& mask : set.masks) {
    REQUIRE(mask.height == h);
    REQUIRE(mask.width == w);
    CHECK_FALSE(mask.empty_foreground());
    for (std::size_t i = 0; i < mask.bits.size(); ++i)
      cover[i] += mask.bits[i] != 0;
  }
  for (int c : cover) CHECK(c == 1);  // disjoint and covering
}

}  // namespace

TEST_CASE("k=1 yields a single full mask", "[spectral]") {
  Rng rng(10);
  const FeatureMap map = fixtures::random_feature_map(rng, 3, 4, 5);
  const MaskSet set = spectral_cluster(map, 1, 0);
  REQUIRE(set.masks.size() == 1);
  CHECK(set.masks[0] == BinaryMask::filled(3, 4, true));
}

TEST_CASE("two orthogonal blocks are recovered exactly", "[spectral]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(77, "two-block", seed));
    const fixtures::TwoBlock fix = fixtures::two_block_map(rng);
    const MaskSet set = spectral_cluster(fix.features, 2, seed);
    check_partition(set, 8, 8);
    CHECK(fixtures::matches_partition(set.masks[0], fix.left, fix.right));
    CHECK(fixtures::matches_partition(set.masks[1], fix.left, fix.right));
    CHECK(iou(set.masks[0], set.masks[1]) == 0.0);
  }
}

TEST_CASE("constant features complete with a valid 2-partition",
          "[spectral]") {
  FeatureMap map;
  map.h = 4;
  map.w = 4;
  map.channels = 3;
  map.data.assign(4 * 4 * 3, 0.5);
  const MaskSet set = spectral_cluster(map, 2, 123);
  check_partition(set, 4, 4);
}

TEST_CASE("random features produce a partition for any k", "[spectral]") {
  Rng rng(20);
  const FeatureMap map = fixtures::random_feature_map(rng, 4, 5, 6);
  for (int k : {2, 3, 4}) {
    const MaskSet set = spectral_cluster(map, k, 55);
    check_partition(set, 4, 5);
  }
}

TEST_CASE("identical seed reproduces the mask set exactly", "[spectral]") {
  Rng rng(30);
  const FeatureMap map = fixtures::random_feature_map(rng, 3, 5, 4);
  const MaskSet a = spectral_cluster(map, 3, 42);
  const MaskSet b = spectral_cluster(map, 3, 42);
  REQUIRE(a.masks.size() == b.masks.size());
  for (std::size_t i = 0; i < a.masks.size(); ++i)
    CHECK(a.masks[i] == b.masks[i]);
}

TEST_CASE("candidate pools have the documented sizes", "[spectral]") {
  Rng rng(40);
  std::vector<NamedFeatureMap> sources;
  for (int s = 0; s < 3; ++s)
    sources.push_back(NamedFeatureMap{
        "s" + std::to_string(s), fixtures::random_feature_map(rng, 3, 3, 4)});

  CHECK(generate_candidates({sources[0]}, {2}, 0).size() == 2);
  CHECK(generate_candidates({sources[0], sources[1]}, {2, 3}, 0).size() == 10);
  CHECK(generate_candidates(sources, {2, 3, 4}, 0).size() == 27);
}

TEST_CASE("pool provenance follows (source, k, cluster) order", "[spectral]") {
  Rng rng(50);
  std::vector<NamedFeatureMap> sources{
      {"alpha", fixtures::random_feature_map(rng, 2, 3, 4)},
      {"beta", fixtures::random_feature_map(rng, 2, 3, 4)}};
  const CandidatePool pool = generate_candidates(sources, {2, 3}, 9);
  REQUIRE(pool.size() == 10);

  std::vector<MaskProvenance> expected;
  for (const char* name : {"alpha", "beta"})
    for (int k : {2, 3})
      for (int c = 0; c < k; ++c)
        expected.push_back(MaskProvenance{name, k, c});
  for (std::size_t i = 0; i < pool.size(); ++i)
    CHECK(pool.provenance[i] == expected[i]);
  CHECK(pool.grid_h == 2);
  CHECK(pool.grid_w == 3);
}

TEST_CASE("mismatched grids are rejected", "[spectral]") {
  Rng rng(60);
  std::vector<NamedFeatureMap> sources{
      {"a", fixtures::random_feature_map(rng, 2, 3, 4)},
      {"b", fixtures::random_feature_map(rng, 3, 3, 4)}};
  CHECK_THROWS_AS(generate_candidates(sources, {2}, 0), shape_error);
}

TEST_CASE("pool generation is deterministic in the root seed", "[spectral]") {
  Rng rng(70);
  std::vector<NamedFeatureMap> sources{
      {"a", fixtures::random_feature_map(rng, 3, 4, 5)},
      {"b", fixtures::random_feature_map(rng, 3, 4, 5)}};
  const CandidatePool p1 = generate_candidates(sources, {2, 3}, 31337);
  const CandidatePool p2 = generate_candidates(sources, {2, 3}, 31337);
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1.masks[i] == p2.masks[i]);
    CHECK(p1.provenance[i] == p2.provenance[i]);
  }
}
