#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace xmcaug::rng {

// All sampling in the pipeline goes through these helpers instead of
// std::*_distribution, whose output is implementation-defined. The engine is
// mt19937_64 (the algorithm name recorded in output manifests), so results
// are identical across platforms and standard libraries.
using Engine = std::mt19937_64;

inline constexpr const char* kAlgorithmName = "mt19937_64";

// Unbiased integer in [0, bound) via 128-bit multiply rejection.
inline std::uint64_t next_below(Engine& eng, std::uint64_t bound) {
  using u128 = unsigned __int128;
  std::uint64_t x = eng();
  u128 m = static_cast<u128>(x) * bound;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    while (lo < threshold) {
      x = eng();
      m = static_cast<u128>(x) * bound;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

// Uniform double in [0, 1) with 53 random bits.
inline double next_unit(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(next_below(eng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// k distinct indices from [0, n), returned in ascending order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                               Engine& eng) {
  std::vector<std::size_t> picked;
  picked.reserve(k);
  // Floyd's algorithm; no allocation proportional to n.
  for (std::size_t j = n - k; j < n; ++j) {
    std::size_t t = static_cast<std::size_t>(next_below(eng, j + 1));
    if (std::find(picked.begin(), picked.end(), t) != picked.end()) {
      picked.push_back(j);
    } else {
      picked.push_back(t);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace xmcaug::rng
