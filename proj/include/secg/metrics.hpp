#pragma once

// Distortion, sparsity and compression figures, plus the local sparsity profile.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "secg/codec.hpp"
#include "secg/error.hpp"

namespace secg {

namespace detail {
inline void require_same_length(std::span<const double> f, std::span<const double> fr) {
  if (f.size() != fr.size())
    throw DimensionError("signal lengths differ: " + std::to_string(f.size()) + " vs " + std::to_string(fr.size()));
}
inline double diff_norm(std::span<const double> f, std::span<const double> fr) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += (f[i] - fr[i]) * (f[i] - fr[i]);
  return std::sqrt(s);
}
}  // namespace detail

/// 100 ||f - fr|| / ||f||
inline double prd(std::span<const double> f, std::span<const double> fr) {
  detail::require_same_length(f, fr);
  double e = 0.0;
  for (double v : f) e += v * v;
  if (e == 0.0) throw UndefinedMetricError("PRD undefined for a zero-energy signal");
  return 100.0 * detail::diff_norm(f, fr) / std::sqrt(e);
}

/// 100 ||f - fr|| / ||f - mean(f)||
inline double prdn(std::span<const double> f, std::span<const double> fr) {
  detail::require_same_length(f, fr);
  if (f.empty()) throw UndefinedMetricError("PRDN undefined for an empty signal");
  const double mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
  double e = 0.0;
  for (double v : f) e += (v - mean) * (v - mean);
  if (e == 0.0) throw UndefinedMetricError("PRDN undefined for a constant signal");
  return 100.0 * detail::diff_norm(f, fr) / std::sqrt(e);
}

/// prd of each n_b-sample segment (the last one cropped to f's length).
/// Zero-energy segments get NaN.
inline std::vector<double> local_prd(std::span<const double> f, std::span<const double> fr, std::size_t n_b) {
  detail::require_same_length(f, fr);
  if (n_b == 0) throw ConfigError("n_b must be > 0");
  std::vector<double> out;
  for (std::size_t b = 0; b < f.size(); b += n_b) {
    const std::size_t len = std::min(n_b, f.size() - b);
    const auto fs = f.subspan(b, len);
    const auto rs = fr.subspan(b, len);
    double e = 0.0;
    for (double v : fs) e += v * v;
    out.push_back(e == 0.0 ? std::numeric_limits<double>::quiet_NaN() : 100.0 * detail::diff_norm(fs, rs) / std::sqrt(e));
  }
  return out;
}

struct SparsityMetrics {
  double sr = 0.0;
  std::size_t total_terms = 0;
  std::vector<double> sr_q;  // +inf for empty segments
  std::vector<std::size_t> k_q;
};

/// SR = N / K over the stored (post-quantization) terms; sr_q = n_b / k_q.
inline SparsityMetrics sparsity_metrics(const QuantizedModel& model) {
  SparsityMetrics m;
  for (const auto& s : model.segments) {
    m.k_q.push_back(s.size());
    m.total_terms += s.size();
    m.sr_q.push_back(s.size() ? static_cast<double>(model.n_b()) / static_cast<double>(s.size())
                              : std::numeric_limits<double>::infinity());
  }
  if (m.total_terms == 0) throw UndefinedMetricError("SR undefined: the model stores no terms");
  m.sr = static_cast<double>(model.sample_count) / static_cast<double>(m.total_terms);
  return m;
}

/// Same figures from pre-quantization approximations of `sample_count` samples.
inline SparsityMetrics sparsity_metrics(std::span<const SegmentApproximation> approxs, std::size_t n_b,
                                        std::uint64_t sample_count) {
  SparsityMetrics m;
  for (const auto& a : approxs) {
    m.k_q.push_back(a.size());
    m.total_terms += a.size();
    m.sr_q.push_back(a.size() ? static_cast<double>(n_b) / static_cast<double>(a.size())
                              : std::numeric_limits<double>::infinity());
  }
  if (m.total_terms == 0) throw UndefinedMetricError("SR undefined: no terms");
  m.sr = static_cast<double>(sample_count) / static_cast<double>(m.total_terms);
  return m;
}

inline double compression_ratio(std::uint64_t original_bytes, std::uint64_t compressed_bytes) {
  if (original_bytes == 0 || compressed_bytes == 0) throw ConfigError("sizes for CR must be > 0");
  return static_cast<double>(original_bytes) / static_cast<double>(compressed_bytes);
}

/// ceil(bits_per_sample * N / 8); MIT-BIH records are stored at 11 bits.
inline std::uint64_t original_size_bytes(std::uint64_t sample_count, unsigned bits_per_sample = 11) {
  return (sample_count * bits_per_sample + 7) / 8;
}

struct SparsityProfile {
  std::vector<double> inverse_sr;  // k_q / n_b
  std::size_t argmax = 0;          // first maximum
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double threshold = 0.0;
  std::vector<std::size_t> flagged;  // segments with inverse_sr > mean + sigmas * stddev
  /// Maximal runs of consecutive flagged segments, as [first, last].
  std::vector<std::pair<std::size_t, std::size_t>> regions;
};

inline SparsityProfile sparsity_profile(std::span<const std::size_t> k_q, std::size_t n_b, double sigmas = 4.0) {
  if (n_b == 0) throw ConfigError("n_b must be > 0");
  SparsityProfile p;
  if (k_q.empty()) return p;
  for (auto k : k_q) p.inverse_sr.push_back(static_cast<double>(k) / static_cast<double>(n_b));
  const auto& v = p.inverse_sr;
  p.argmax = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  p.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - p.mean) * (x - p.mean);
  p.stddev = std::sqrt(ss / static_cast<double>(v.size()));
  p.threshold = p.mean + sigmas * p.stddev;
  // Relative guard: a spread at round-off level counts as constant.
  if (p.stddev <= 1e-12 * std::max(1.0, std::abs(p.mean))) return p;
  for (std::size_t q = 0; q < v.size(); ++q) {
    if (!(v[q] > p.threshold)) continue;
    p.flagged.push_back(q);
    if (!p.regions.empty() && p.regions.back().second + 1 == q)
      p.regions.back().second = q;
    else
      p.regions.emplace_back(q, q);
  }
  return p;
}

inline SparsityProfile sparsity_profile(const QuantizedModel& model, double sigmas = 4.0) {
  std::vector<std::size_t> k;
  for (const auto& s : model.segments) k.push_back(s.size());
  return sparsity_profile(k, model.n_b(), sigmas);
}

struct MetricsReport {
  double prd = 0.0;
  double prdn = 0.0;
  double sr = 0.0;
  double cr = 0.0;     // fixed-bit-depth streams
  double cr_hf = 0.0;  // Huffman-coded streams
  double qs = 0.0;     // cr_hf / prd
  std::size_t total_terms = 0;
  std::size_t bytes = 0;
  std::size_t bytes_hf = 0;
  std::vector<double> prd_q;
  std::vector<double> sr_q;
};

/// Full report for `model` against the original samples `f` (length N).
/// `reconstruction` must already be cropped to N.
inline MetricsReport evaluate(std::span<const double> f, std::span<const double> reconstruction,
                              const QuantizedModel& model, unsigned bits_per_sample = 11) {
  MetricsReport r;
  r.prd = prd(f, reconstruction);
  r.prdn = prdn(f, reconstruction);
  const auto sm = sparsity_metrics(model);
  r.sr = sm.sr;
  r.sr_q = sm.sr_q;
  r.total_terms = sm.total_terms;
  r.bytes = encode(model, false).byte_size();
  r.bytes_hf = encode(model, true).byte_size();
  const auto orig = original_size_bytes(f.size(), bits_per_sample);
  r.cr = compression_ratio(orig, r.bytes);
  r.cr_hf = compression_ratio(orig, r.bytes_hf);
  r.qs = r.prd > 0.0 ? r.cr_hf / r.prd : std::numeric_limits<double>::infinity();
  r.prd_q = local_prd(f, reconstruction, model.n_b());
  return r;
}

}  // namespace secg
