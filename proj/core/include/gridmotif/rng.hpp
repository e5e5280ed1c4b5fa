#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace gridmotif {

using Rng = std::mt19937_64;

/// Independent generator for a (seed, index...) tuple. Work items that may be
/// scheduled on any thread draw from their own stream so results depend only
/// on the item index.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Draws an index with probability proportional to weights.
std::size_t weighted_index(Rng& rng, const std::vector<double>& weights);

}  // namespace gridmotif
