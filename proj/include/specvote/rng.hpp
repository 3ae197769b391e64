#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "specvote/errors.hpp"

namespace specvote {

/// Random engine used throughout the library. std::mt19937_64 has a
/// standard-mandated output sequence, so a seed names the same stream on
/// every platform and compiler.
using Rng = std::mt19937_64;

/// splitmix64 finalizer. Bijective on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over the bytes of a label.
constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Child seed for a named sub-task:
///   derive_seed(parent, label)    = mix64(parent ^ FNV1a(label))
///   derive_seed(parent, label, k) = mix64(mix64(parent ^ FNV1a(label)) ^ k)
/// Streams for distinct labels are independent, so adding a feature source
/// or a k value never perturbs the randomness of existing runs.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::string_view label) noexcept {
  return mix64(parent ^ hash_label(label));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::string_view label,
                                    std::uint64_t k) noexcept {
  return mix64(derive_seed(parent, label) ^ k);
}

/// Unbiased integer in [0, n) by rejection. std::uniform_int_distribution
/// is implementation-defined and would break the cross-platform
/// determinism contract, so it is never used.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw parameter_error("uniform_index: n must be positive");
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform_real01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Index i with probability weights[i] / sum(weights), by inverse-CDF scan
/// over one uniform draw. All-zero weights fall back to a uniform pick.
/// Weights must be non-negative and finite.
inline std::size_t pick_weighted(Rng& rng, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) return static_cast<std::size_t>(uniform_index(rng, weights.size()));
  const double u = uniform_real01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  // Rounding pushed u past the accumulated total; settle on the last
  // index that carried any mass.
  return last_positive;
}

}  // namespace specvote
