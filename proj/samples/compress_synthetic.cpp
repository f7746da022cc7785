// Compresses a synthetic ECG-like record with the default CDF97 dictionary,
// round-trips the container through bytes and prints the metrics.
//
//   compress_synthetic [seconds] [prd0] [delta]

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <random>
#include <vector>

#include "secg/secg.hpp"

namespace {

// Gaussian bumps for P, QRS and T on a slow baseline, in 11-bit ADC units.
std::vector<double> synthetic_ecg(double seconds, double fs, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, 2.0);
  const auto n = static_cast<std::size_t>(seconds * fs);
  std::vector<double> x(n);
  const double rr = 0.8;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double ph = std::fmod(t, rr);
    auto bump = [&](double a, double mu, double sd) { return a * std::exp(-0.5 * (ph - mu) * (ph - mu) / (sd * sd)); };
    x[i] = 1024.0 + 30.0 * std::sin(2 * std::numbers::pi * 0.3 * t) + bump(25, 0.16, 0.025) - bump(30, 0.27, 0.008) +
           bump(220, 0.3, 0.01) - bump(45, 0.33, 0.01) + bump(60, 0.55, 0.04) + noise(rng);
  }
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  const double seconds = argc > 1 ? std::atof(argv[1]) : 60.0;
  secg::RunConfig cfg;
  cfg.prd0 = argc > 2 ? std::atof(argv[2]) : 0.5;
  cfg.delta = argc > 3 ? std::atof(argv[3]) : 35.0;
  try {
    const auto x = synthetic_ecg(seconds, 360.0, 1);
    const auto dict = secg::build_dictionary(cfg.dictionary);
    std::printf("dictionary: %zu atoms, redundancy %.3f\n", dict.size(), dict.redundancy());

    const auto r = secg::compress_samples(x, dict, cfg);
    const auto bytes = r.container.to_bytes();
    const auto model = secg::decode(secg::EncodedContainer::from_bytes(bytes));
    auto y = secg::dequantize_reconstruct(model, dict);
    y.resize(x.size());

    const auto& m = r.report;
    std::printf("samples=%zu segments=%zu terms=%zu container=%zu bytes\n", x.size(), model.segment_count(),
                m.total_terms, bytes.size());
    std::printf("PRD=%.3f PRDN=%.3f SR=%.2f CR=%.2f CR^Hf=%.2f QS=%.2f (%.2f s)\n", m.prd, m.prdn, m.sr, m.cr, m.cr_hf,
                m.qs, r.seconds);
    std::printf("decoded PRD=%.3f\n", secg::prd(x, y));
  } catch (const secg::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
