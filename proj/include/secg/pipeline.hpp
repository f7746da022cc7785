#pragma once

// End-to-end compression of one record and the prd0 tuner.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "secg/codec.hpp"
#include "secg/dictionary.hpp"
#include "secg/error.hpp"
#include "secg/ingest.hpp"
#include "secg/metrics.hpp"
#include "secg/pursuit.hpp"

namespace secg {

struct RunConfig {
  DictionaryConfig dictionary = DictionaryConfig::dictionary(WaveletFamily::CDF97);
  double prd0 = 0.5;
  double delta = 35.0;
  bool huffman = true;
  std::size_t k_max = 0;  // 0: n_b / 2
  unsigned jobs = 1;
  unsigned bits_per_sample = 11;  // for the uncompressed size in CR

  void validate() const {
    dictionary.validate();
    if (!(prd0 >= 0.0) || !std::isfinite(prd0)) throw ConfigError("prd0 must be >= 0");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be > 0");
    if (k_max > dictionary.n_b) throw ConfigError("k_max must be <= n_b");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (bits_per_sample < 1 || bits_per_sample > 32) throw ConfigError("bits_per_sample must be in [1, 32]");
  }
};

struct CompressionResult {
  std::vector<SegmentApproximation> approximations;
  QuantizedModel model;
  EncodedContainer container;  // with the configured Huffman flag
  std::vector<double> reconstruction;  // dequantized, cropped to N
  MetricsReport report;
  double pre_quantization_prd = 0.0;
  double seconds = 0.0;
};

/// Pursuit for every segment of `samples` (zero-padded tail).
inline std::vector<SegmentApproximation> approximate_samples(std::span<const double> samples, const Dictionary& dict,
                                                             const RunConfig& cfg) {
  const auto segs = segment(samples, dict.n_b());
  return approximate_record(segs, dict, cfg.prd0, {cfg.k_max, cfg.jobs, {}});
}

/// Quantizes, encodes and evaluates existing approximations at `delta`.
inline CompressionResult finish_compression(std::span<const double> samples, const Dictionary& dict,
                                            std::vector<SegmentApproximation> approxs, double delta,
                                            const RunConfig& cfg) {
  CompressionResult r;
  r.model = quantize(approxs, delta, dict.config(), samples.size());
  r.container = encode(r.model, cfg.huffman);
  r.reconstruction = dequantize_reconstruct(r.model, dict);
  r.reconstruction.resize(samples.size());
  r.report = evaluate(samples, r.reconstruction, r.model, cfg.bits_per_sample);

  std::vector<double> pre(approxs.size() * dict.n_b());
  for (std::size_t q = 0; q < approxs.size(); ++q) {
    const Segment s = reconstruct(approxs[q], dict);
    std::copy(s.data(), s.data() + s.size(), pre.begin() + static_cast<std::ptrdiff_t>(q * dict.n_b()));
  }
  pre.resize(samples.size());
  r.pre_quantization_prd = prd(samples, pre);
  r.approximations = std::move(approxs);
  return r;
}

inline CompressionResult compress_samples(std::span<const double> samples, const Dictionary& dict,
                                          const RunConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw ConfigError("record is empty");
  if (dict.config() != cfg.dictionary) throw ConfigError("dictionary does not match the run configuration");
  const auto t0 = std::chrono::steady_clock::now();
  auto approxs = approximate_samples(samples, dict, cfg);
  CompressionResult r = finish_compression(samples, dict, std::move(approxs), cfg.delta, cfg);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

struct TunedCompression {
  double prd0 = 0.0;
  CompressionResult result;
  int evaluations = 0;
};

/// Bisection on prd0 in [lo, hi] so that the post-quantization PRD approaches
/// `target_prd` (PRD grows with prd0 up to quantization noise). Stops when the
/// PRD is within `tolerance` or after `max_evaluations` compressions and returns
/// the evaluated point closest to the target.
inline TunedCompression tune_prd0(std::span<const double> samples, const Dictionary& dict, RunConfig cfg,
                                  double target_prd, double lo = 0.05, double hi = 2.0, double tolerance = 0.005,
                                  int max_evaluations = 12) {
  if (!(target_prd > 0.0)) throw ConfigError("target PRD must be > 0");
  if (!(lo > 0.0 && lo < hi)) throw ConfigError("tuning interval must satisfy 0 < lo < hi");
  TunedCompression best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_evaluations; ++it) {
    cfg.prd0 = 0.5 * (lo + hi);
    auto r = compress_samples(samples, dict, cfg);
    const double gap = r.report.prd - target_prd;
    if (std::abs(gap) < best_gap) {
      best_gap = std::abs(gap);
      best.prd0 = cfg.prd0;
      best.result = std::move(r);
    }
    best.evaluations = it + 1;
    if (std::abs(gap) <= tolerance) break;
    (gap > 0 ? hi : lo) = cfg.prd0;
  }
  return best;
}

}  // namespace secg
