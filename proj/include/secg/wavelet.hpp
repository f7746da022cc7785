#pragma once

// Scaling functions and mother wavelets of the supported families, as
// continuous prototypes that can be evaluated, integrated and sampled.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "secg/error.hpp"

namespace secg {

// ----------------------------------------------------------------------
// Cardinal B-splines
// ----------------------------------------------------------------------

/// Cardinal B-spline N_m of order m (degree m-1) on the knots 0, 1, ..., m.
/// N_1 is the indicator of [0, 1). Evaluated with the Cox-de Boor recursion.
inline double bspline_eval(int m, double x) {
  if (m < 1) throw ConfigError("B-spline order must be >= 1");
  if (!(x >= 0.0) || x >= static_cast<double>(m)) return 0.0;
  // values[i] holds N_order(x - i) for the current order.
  std::array<double, 32> values{};
  if (m > static_cast<int>(values.size())) throw ConfigError("B-spline order too large");
  const int cell = static_cast<int>(std::floor(x));
  values[cell] = 1.0;
  for (int order = 2; order <= m; ++order) {
    const int lo = std::max(0, cell - order + 1);
    for (int i = lo; i <= cell; ++i) {
      const double y = x - i;
      const double left = values[i];
      const double right = (i + 1 <= cell) ? values[i + 1] : 0.0;
      // N_order(y) = (y N_{order-1}(y) + (order - y) N_{order-1}(y - 1)) / (order - 1)
      values[i] = (y * left + (order - y) * right) / (order - 1);
    }
  }
  return values[0];
}

/// Antiderivative of N_m vanishing at -infinity: sum_{i>=0} N_{m+1}(x - i).
inline double bspline_integral(int m, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= static_cast<double>(m)) return 1.0;
  double sum = 0.0;
  for (int i = 0; i <= static_cast<int>(std::floor(x)); ++i) sum += bspline_eval(m + 1, x - i);
  return sum;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// ----------------------------------------------------------------------
// Families
// ----------------------------------------------------------------------

enum class WaveletFamily : std::uint8_t { CW4 = 0, CW2, CDF97, CDF53, Db4, Coif, Sym, Short3 };

struct FamilyInfo {
  WaveletFamily id;
  std::string_view name;
  std::optional<int> spline_order;  // B-spline order of the scaling function, if spline
  int vanishing_moments;
  bool closed_form;  // closed-form spline prototype vs. cascade iteration
};

inline constexpr std::array<FamilyInfo, 8> kFamilies{{
    {WaveletFamily::CW4, "CW4", 4, 4, true},
    {WaveletFamily::CW2, "CW2", 2, 2, true},
    {WaveletFamily::CDF97, "CDF97", std::nullopt, 4, false},
    {WaveletFamily::CDF53, "CDF53", 2, 2, true},
    {WaveletFamily::Db4, "Db4", std::nullopt, 4, false},
    {WaveletFamily::Coif, "Coif", std::nullopt, 2, false},
    {WaveletFamily::Sym, "Sym", std::nullopt, 4, false},
    {WaveletFamily::Short3, "Short3", 3, 3, true},
}};

inline const FamilyInfo& family_info(WaveletFamily f) {
  const auto idx = static_cast<std::size_t>(f);
  if (idx >= kFamilies.size()) throw ConfigError("unknown wavelet family id " + std::to_string(idx));
  return kFamilies[idx];
}

inline std::string_view family_name(WaveletFamily f) { return family_info(f).name; }

/// Case-insensitive lookup by name ("cdf97", "Db4", ...).
inline WaveletFamily parse_family(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  const std::string key = lower(name);
  for (const auto& info : kFamilies)
    if (lower(info.name) == key) return info.id;
  throw ConfigError("unknown wavelet family '" + std::string(name) + "'");
}

enum class PrototypeKind : std::uint8_t { scaling, wavelet };

// ----------------------------------------------------------------------
// Refinement filters (normalized so that the lowpass sums to 2)
// ----------------------------------------------------------------------

struct FilterPair {
  std::vector<double> lowpass;       // synthesis lowpass h
  int lowpass_start = 0;             // index of lowpass[0]
  std::vector<double> dual_lowpass;  // analysis lowpass used for the wavelet filter
  int dual_start = 0;
};

namespace detail {

inline std::vector<double> scaled_to_sum_two(std::vector<double> h) {
  const double s = std::accumulate(h.begin(), h.end(), 0.0);
  for (auto& v : h) v *= 2.0 / s;
  return h;
}

inline FilterPair orthogonal_pair(std::vector<double> h) {
  h = scaled_to_sum_two(std::move(h));
  return {h, 0, h, 0};
}

}  // namespace detail

inline FilterPair refinement_filters(WaveletFamily family) {
  switch (family) {
    case WaveletFamily::Db4:
      return detail::orthogonal_pair({0.2303778133088965, 0.7148465705529157, 0.6308807679298589,
                                      -0.027983769416859854, -0.18703481171909309,
                                      0.030841381835560764, 0.0328830116668852,
                                      -0.010597401785069032});
    case WaveletFamily::Sym:
      return detail::orthogonal_pair({0.0322231006040427, -0.012603967262037833,
                                      -0.09921954357684722, 0.29785779560527736,
                                      0.8037387518059161, 0.49761866763201545,
                                      -0.02963552764599851, -0.07576571478927333});
    case WaveletFamily::Coif: {
      const double s7 = std::sqrt(7.0);
      return detail::orthogonal_pair(
          {1.0 - s7, 5.0 + s7, 14.0 + 2.0 * s7, 14.0 - 2.0 * s7, 1.0 - s7, -3.0 + s7});
    }
    case WaveletFamily::CDF97: {
      FilterPair p;
      p.lowpass = detail::scaled_to_sum_two({-0.06453888262869706, -0.04068941760916406,
                                             0.41809227322161724, 0.7884856164055829,
                                             0.41809227322161724, -0.04068941760916406,
                                             -0.06453888262869706});
      p.lowpass_start = -3;
      p.dual_lowpass = detail::scaled_to_sum_two(
          {0.03782845550726404, -0.023849465019556843, -0.11062440441843718,
           0.37740285561283066, 0.8526986790088938, 0.37740285561283066,
           -0.11062440441843718, -0.023849465019556843, 0.03782845550726404});
      p.dual_start = -4;
      return p;
    }
    case WaveletFamily::CDF53:
      return {{0.5, 1.0, 0.5}, -1, {-0.25, 0.5, 1.5, 0.5, -0.25}, -2};
    default:
      throw ConfigError("family " + std::string(family_name(family)) + " has no filter bank");
  }
}

/// Wavelet filter g_k = (-1)^k hd_{1-k}; returns the taps and the index of the first one.
inline std::pair<std::vector<double>, int> wavelet_filter(const FilterPair& p) {
  const int dual_end = p.dual_start + static_cast<int>(p.dual_lowpass.size()) - 1;
  const int start = 1 - dual_end;
  std::vector<double> g(p.dual_lowpass.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int k = start + static_cast<int>(i);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    g[i] = sign * p.dual_lowpass[static_cast<std::size_t>(1 - k - p.dual_start)];
  }
  return {g, start};
}

/// Values phi(n / 2^levels), n = 0.., of the scaling function of the lowpass
/// filter (support [lowpass_start, lowpass_start + L - 1]). Integer values come
/// from the eigenvector of the refinement matrix; each cascade iteration then
/// fills in the next dyadic level exactly.
inline std::vector<double> cascade_scaling(const std::vector<double>& h, int levels) {
  const int len = static_cast<int>(h.size());
  const int n = len;  // integer nodes 0..L-1
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const int k = 2 * r - c;
      if (k >= 0 && k < len) a(r, c) = h[static_cast<std::size_t>(k)];
    }
  // (A - I) v = 0 with sum(v) = 1: replace the last equation by the normalization.
  Eigen::MatrixXd sys = a - Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  sys.row(n - 1).setOnes();
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd ints = sys.fullPivLu().solve(rhs);

  std::vector<double> table(ints.data(), ints.data() + n);
  for (int level = 0; level < levels; ++level) {
    const int stride = 1 << level;  // level-i index of one integer step
    const std::size_t size = static_cast<std::size_t>((len - 1) * (stride * 2) + 1);
    std::vector<double> next(size, 0.0);
    for (std::size_t m = 0; m < size; ++m) {
      double v = 0.0;
      for (int k = 0; k < len; ++k) {
        const long idx = static_cast<long>(m) - static_cast<long>(k) * stride;
        if (idx >= 0 && idx < static_cast<long>(table.size()))
          v += h[static_cast<std::size_t>(k)] * table[static_cast<std::size_t>(idx)];
      }
      next[m] = v;
    }
    table = std::move(next);
  }
  return table;
}

// ----------------------------------------------------------------------
// Prototypes
// ----------------------------------------------------------------------

/// f(x) = sum_n coeffs[n] N_order(dilation * x - (first_shift + n)).
struct SplineCombination {
  int order = 1;
  int dilation = 1;
  int first_shift = 0;
  std::vector<double> coeffs;
};

/// Piecewise-linear interpolant of values at origin + n * 2^-levels.
struct DyadicTable {
  int levels = 0;
  double origin = 0.0;
  std::vector<double> values;
  std::vector<double> cumulative;  // trapezoid integral up to each node
};

/// A scaling function or mother wavelet, defined on [support_begin, support_end].
class Prototype {
 public:
  explicit Prototype(SplineCombination s) : rep_(std::move(s)) {
    const auto& c = std::get<SplineCombination>(rep_);
    begin_ = static_cast<double>(c.first_shift) / c.dilation;
    end_ = static_cast<double>(c.first_shift + static_cast<int>(c.coeffs.size()) - 1 + c.order) /
           c.dilation;
  }

  explicit Prototype(DyadicTable t) : rep_(std::move(t)) {
    auto& tab = std::get<DyadicTable>(rep_);
    const double h = std::ldexp(1.0, -tab.levels);
    tab.cumulative.assign(tab.values.size(), 0.0);
    for (std::size_t n = 1; n < tab.values.size(); ++n)
      tab.cumulative[n] = tab.cumulative[n - 1] + 0.5 * h * (tab.values[n - 1] + tab.values[n]);
    begin_ = tab.origin;
    end_ = tab.origin + h * static_cast<double>(tab.values.size() - 1);
  }

  double support_begin() const noexcept { return begin_; }
  double support_end() const noexcept { return end_; }
  bool closed_form() const noexcept { return std::holds_alternative<SplineCombination>(rep_); }

  double value(double x) const {
    if (const auto* s = std::get_if<SplineCombination>(&rep_)) {
      double v = 0.0;
      const double y = s->dilation * x - s->first_shift;
      for (std::size_t n = 0; n < s->coeffs.size(); ++n)
        v += s->coeffs[n] * bspline_eval(s->order, y - static_cast<double>(n));
      return v;
    }
    const auto& t = std::get<DyadicTable>(rep_);
    if (x <= begin_ || x >= end_) return 0.0;
    const double pos = std::ldexp(x - t.origin, t.levels);
    const auto n = std::min(static_cast<std::size_t>(pos), t.values.size() - 2);
    const double tau = pos - static_cast<double>(n);
    return (1.0 - tau) * t.values[n] + tau * t.values[n + 1];
  }

  /// Antiderivative, zero left of the support.
  double integral(double x) const {
    if (const auto* s = std::get_if<SplineCombination>(&rep_)) {
      double v = 0.0;
      const double y = s->dilation * x - s->first_shift;
      for (std::size_t n = 0; n < s->coeffs.size(); ++n)
        v += s->coeffs[n] * bspline_integral(s->order, y - static_cast<double>(n));
      return v / s->dilation;
    }
    const auto& t = std::get<DyadicTable>(rep_);
    if (x <= begin_) return 0.0;
    if (x >= end_) return t.cumulative.back();
    const double h = std::ldexp(1.0, -t.levels);
    const double pos = std::ldexp(x - t.origin, t.levels);
    const auto n = std::min(static_cast<std::size_t>(pos), t.values.size() - 2);
    const double tau = pos - static_cast<double>(n);
    return t.cumulative[n] +
           h * (tau * t.values[n] + 0.5 * tau * tau * (t.values[n + 1] - t.values[n]));
  }

  /// Mean value over [a, b], a < b.
  double cell_average(double a, double b) const { return (integral(b) - integral(a)) / (b - a); }

 private:
  std::variant<SplineCombination, DyadicTable> rep_;
  double begin_ = 0.0;
  double end_ = 0.0;
};

namespace detail {

// Chui-Wang semi-orthogonal wavelet of order m:
// q_n = (-1)^n / 2^{m-1} sum_l C(m,l) N_{2m}(n - l + 1), n = 0..3m-2.
inline SplineCombination chui_wang_wavelet(int m) {
  SplineCombination s{m, 2, 0, {}};
  for (int n = 0; n <= 3 * m - 2; ++n) {
    double q = 0.0;
    for (int l = 0; l <= m; ++l) q += binomial(m, l) * bspline_eval(2 * m, n - l + 1);
    s.coeffs.push_back(((n % 2 == 0) ? 1.0 : -1.0) * q / std::ldexp(1.0, m - 1));
  }
  return s;
}

inline DyadicTable wavelet_table(const FilterPair& p, int levels) {
  const auto phi = cascade_scaling(p.lowpass, levels);
  const auto [g, g_start] = wavelet_filter(p);
  const int len = static_cast<int>(p.lowpass.size());
  const int g_len = static_cast<int>(g.size());
  const int scale = 1 << levels;
  // psi(x) = sum_k g_k phi(2x - k); phi's table starts at lowpass_start.
  // Support of psi: [(g_start + lowpass_start) / 2, (g_start + g_len - 1 + lowpass_start + len - 1) / 2].
  const int lo2 = g_start + p.lowpass_start;                       // 2 * support_begin
  const int hi2 = g_start + g_len - 1 + p.lowpass_start + len - 1;  // 2 * support_end
  const std::size_t size = static_cast<std::size_t>((hi2 - lo2) * scale / 2 + 1);
  DyadicTable t{levels, lo2 / 2.0, std::vector<double>(size, 0.0), {}};
  for (std::size_t n = 0; n < size; ++n) {
    // 2x - k - lowpass_start in level units, with x = lo2/2 + n / scale.
    double v = 0.0;
    for (int i = 0; i < g_len; ++i) {
      const int k = g_start + i;
      const long idx = static_cast<long>(lo2 - k - p.lowpass_start) * scale + 2 * static_cast<long>(n);
      if (idx >= 0 && idx < static_cast<long>(phi.size()))
        v += g[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(idx)];
    }
    t.values[n] = v;
  }
  return t;
}

}  // namespace detail

/// Builds the continuous prototype. Filter-defined families use `cascade_levels`
/// dyadic refinements.
inline Prototype make_prototype(WaveletFamily family, PrototypeKind kind, int cascade_levels = 8) {
  const bool scaling = kind == PrototypeKind::scaling;
  switch (family) {
    case WaveletFamily::CW4:
    case WaveletFamily::CW2: {
      const int m = family == WaveletFamily::CW4 ? 4 : 2;
      if (scaling) return Prototype(SplineCombination{m, 1, 0, {1.0}});
      return Prototype(detail::chui_wang_wavelet(m));
    }
    case WaveletFamily::Short3:
      if (scaling) return Prototype(SplineCombination{3, 1, 0, {1.0}});
      return Prototype(SplineCombination{3, 2, 0, {1.0, -3.0, 3.0, -1.0}});
    case WaveletFamily::CDF53: {
      // Hat function centred at 0 and psi = sum_k g_k phi(2x - k) written on N_2(2x - n).
      if (scaling) return Prototype(SplineCombination{2, 1, -1, {1.0}});
      const auto [g, g_start] = wavelet_filter(refinement_filters(family));
      return Prototype(SplineCombination{2, 2, g_start - 1, g});
    }
    case WaveletFamily::CDF97:
    case WaveletFamily::Db4:
    case WaveletFamily::Coif:
    case WaveletFamily::Sym: {
      if (cascade_levels < 1) throw ConfigError("cascade levels must be >= 1");
      const FilterPair p = refinement_filters(family);
      if (scaling) {
        return Prototype(DyadicTable{cascade_levels, static_cast<double>(p.lowpass_start),
                                     cascade_scaling(p.lowpass, cascade_levels), {}});
      }
      return Prototype(detail::wavelet_table(p, cascade_levels));
    }
  }
  throw ConfigError("unknown wavelet family");
}

/// Samples of phi or psi on the grid support_begin + n 2^-r covering the support.
/// Spline families are evaluated in closed form, filter families by r cascade iterations.
inline std::vector<double> prototype_samples(WaveletFamily family, PrototypeKind kind, int r) {
  if (r < 4) throw ConfigError("prototype resolution must be >= 4 dyadic levels");
  const auto idx = static_cast<std::size_t>(family);
  if (idx >= kFamilies.size()) throw ConfigError("unknown wavelet family");
  const Prototype p = make_prototype(family, kind, r);
  const double h = std::ldexp(1.0, -r);
  const auto count =
      static_cast<std::size_t>(std::llround((p.support_end() - p.support_begin()) / h)) + 1;
  std::vector<double> out(count);
  for (std::size_t n = 0; n < count; ++n) out[n] = p.value(p.support_begin() + h * static_cast<double>(n));
  return out;
}

}  // namespace secg
