#pragma once

// Seeded synthetic inputs shared by the unit tests and the acceptance
// suite.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "specvote/array_io.hpp"
#include "specvote/rng.hpp"
#include "specvote/spectral.hpp"

namespace fixtures {

// Dense random features, every cell guaranteed a nonzero norm.
inline specvote::FeatureMap random_feature_map(specvote::Rng& rng, int h,
                                               int w, int channels) {
  specvote::FeatureMap map;
  map.h = h;
  map.w = w;
  map.channels = channels;
  map.data.resize(static_cast<std::size_t>(h) * w * channels);
  for (int i = 0; i < map.cells(); ++i) {
    for (;;) {
      double norm2 = 0.0;
      for (int c = 0; c < channels; ++c) {
        const double v = 2.0 * specvote::uniform_real01(rng) - 1.0;
        map.cell(i)[c] = v;
        norm2 += v * v;
      }
      if (norm2 > 1e-6) break;
    }
  }
  return map;
}

struct TwoBlock {
  specvote::FeatureMap features;
  specvote::BinaryMask left;   // planted partition, left 8x4 half
  specvote::BinaryMask right;
};

// 8x8 map whose left half holds one constant vector and right half
// another, supported on disjoint channels so their cosine is exactly 0.
inline TwoBlock two_block_map(specvote::Rng& rng) {
  const int h = 8, w = 8, d = 8;
  double a[4], b[4];
  for (double& v : a) v = 0.2 + 0.8 * specvote::uniform_real01(rng);
  for (double& v : b) v = 0.2 + 0.8 * specvote::uniform_real01(rng);

  TwoBlock fix;
  fix.features.h = h;
  fix.features.w = w;
  fix.features.channels = d;
  fix.features.data.assign(static_cast<std::size_t>(h) * w * d, 0.0);
  fix.left = specvote::BinaryMask::filled(h, w, false);
  fix.right = specvote::BinaryMask::filled(h, w, false);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double* cell = fix.features.cell(r * w + c);
      if (c < w / 2) {
        for (int i = 0; i < 4; ++i) cell[i] = a[i];
        fix.left.set(r, c, true);
      } else {
        for (int i = 0; i < 4; ++i) cell[4 + i] = b[i];
        fix.right.set(r, c, true);
      }
    }
  }
  return fix;
}

struct PlantedBlob {
  std::vector<specvote::NamedFeatureMap> sources;
  specvote::BinaryMask blob;  // 6x6 foreground on the 12x12 grid
};

// 12x12 grid with a 6x6 blob at rows/cols 3..8. Per source the blob
// holds a one-hot channel vector and the background sweeps a planar
// angle smoothly along the raster order, so blob/background similarity
// is exactly 0 while the background stays one well-connected component.
// With ks {2,3,4} every background cluster is a horizontal band that
// spans the full grid width, which the framing prior removes, while the
// blob never touches the border.
inline PlantedBlob planted_blob(specvote::Rng& rng) {
  const int h = 12, w = 12;
  PlantedBlob fix;
  fix.blob = specvote::BinaryMask::filled(h, w, false);
  for (int r = 3; r <= 8; ++r)
    for (int c = 3; c <= 8; ++c) fix.blob.set(r, c, true);

  const double theta_lo[3] = {0.0, 0.3, 0.1};
  const double theta_hi[3] = {1.2, 1.4, 1.3};
  for (int s = 0; s < 3; ++s) {
    specvote::FeatureMap map;
    map.h = h;
    map.w = w;
    map.channels = 3;
    map.data.assign(static_cast<std::size_t>(h) * w * 3, 0.0);
    const int cells = h * w;
    for (int i = 0; i < cells; ++i) {
      double* cell = map.cell(i);
      if (fix.blob.bits[i]) {
        cell[2] = 1.0;
      } else {
        const double frac = static_cast<double>(i) / (cells - 1);
        const double jitter =
            0.01 * (2.0 * specvote::uniform_real01(rng) - 1.0);
        const double theta =
            theta_lo[s] + frac * (theta_hi[s] - theta_lo[s]) + jitter;
        cell[0] = std::cos(theta);
        cell[1] = std::sin(theta);
      }
    }
    fix.sources.push_back(
        specvote::NamedFeatureMap{"src" + std::to_string(s), map});
  }
  return fix;
}

// True if the mask equals the reference or its complement equals it,
// which is mask comparison up to a 2-way label permutation.
inline bool matches_partition(const specvote::BinaryMask& mask,
                              const specvote::BinaryMask& part_a,
                              const specvote::BinaryMask& part_b) {
  return mask == part_a || mask == part_b;
}

}  // namespace fixtures
