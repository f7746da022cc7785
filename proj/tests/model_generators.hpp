#pragma once

// Random valid QuantizedModels and integer streams for property tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "secg/codec.hpp"

namespace secg::testing {

/// Magnitudes are mostly small with occasional wide values, as in real
/// models where the constant atom dominates.
inline std::uint64_t random_magnitude(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0: return 1;
    case 1: return 1 + rng() % 8;
    case 2: return 1 + rng() % 1000;
    default: return 1 + (rng() >> (64 - 1 - rng() % 52));
  }
}

inline QuantizedModel random_model(std::mt19937_64& rng) {
  QuantizedModel m;
  const auto family = static_cast<WaveletFamily>(rng() % 8);
  const std::size_t n_b = 2 + rng() % 600;
  m.dictionary = DictionaryConfig::dictionary(family, n_b);
  m.dictionary.m_dct = std::min<std::size_t>(m.dictionary.m_dct, n_b);
  m.delta = std::ldexp(1.0 + static_cast<double>(rng() % 1000) / 100.0, static_cast<int>(rng() % 20) - 10);
  const std::size_t q = rng() % 9;
  const std::size_t universe = 3 * n_b;
  for (std::size_t i = 0; i < q; ++i) {
    QuantizedSegment s;
    const std::size_t k = (rng() % 5 == 0) ? 0 : 1 + rng() % std::min<std::size_t>(n_b, 30);
    std::set<std::uint32_t> idx;
    while (idx.size() < k) idx.insert(static_cast<std::uint32_t>(rng() % universe));
    s.indices.assign(idx.begin(), idx.end());
    for (std::size_t t = 0; t < k; ++t) {
      s.magnitudes.push_back(random_magnitude(rng));
      s.signs.push_back(static_cast<std::uint8_t>(rng() & 1));
    }
    m.segments.push_back(std::move(s));
  }
  m.sample_count = q == 0 ? 0 : (q - 1) * n_b + 1 + rng() % n_b;
  return m;
}

inline std::vector<std::uint64_t> random_stream(std::mt19937_64& rng) {
  const std::size_t n = 1 + rng() % 400;
  std::vector<std::uint64_t> v(n);
  const int mode = static_cast<int>(rng() % 4);
  std::geometric_distribution<std::uint64_t> geo(0.3);
  for (auto& x : v) {
    switch (mode) {
      case 0: x = rng() % 3; break;
      case 1: x = geo(rng); break;
      case 2: x = rng() % 100000; break;
      default: x = rng() >> (rng() % 64); break;
    }
  }
  return v;
}

}  // namespace secg::testing
