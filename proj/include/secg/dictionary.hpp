#pragma once

// Redundant dictionaries D = D^C u D^W of unit-norm atoms in R^{n_b}: a few
// low-frequency DCT-II atoms followed by scaling functions at the coarsest
// scale and wavelets at every scale, translated by steps of 2^-l.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "secg/bitstream.hpp"
#include "secg/error.hpp"
#include "secg/wavelet.hpp"

namespace secg {

struct DictionaryConfig {
  WaveletFamily family = WaveletFamily::CDF97;
  std::size_t n_b = 500;
  int translation_exponent = 2;  // l: translation step 2^-l, a basis for l = 0
  int j_min = 3;
  int j_max = 7;
  std::size_t m_dct = 10;
  double border_norm_floor = 0.1;
  double dedup_tol = 1.0 - 1e-6;
  int cascade_levels = 8;

  /// Redundant dictionary: l = 2, scales 3..7.
  static DictionaryConfig dictionary(WaveletFamily f, std::size_t n_b = 500) {
    DictionaryConfig c;
    c.family = f;
    c.n_b = n_b;
    return c;
  }
  /// Basis counterpart: l = 0, one more (finer) scale.
  static DictionaryConfig basis(WaveletFamily f, std::size_t n_b = 500) {
    DictionaryConfig c = dictionary(f, n_b);
    c.translation_exponent = 0;
    c.j_max = 8;
    return c;
  }

  void validate() const {
    family_info(family);
    if (n_b < 2 || n_b > 65536) throw ConfigError("n_b must be in [2, 65536]");
    if (translation_exponent < 0 || translation_exponent > 8)
      throw ConfigError("translation exponent l must be in [0, 8]");
    if (j_min < 0 || j_min > j_max || j_max > 20) throw ConfigError("scale range must satisfy 0 <= j_min <= j_max <= 20");
    if (m_dct < 1 || m_dct > n_b) throw ConfigError("m_dct must be in [1, n_b]");
    if (!(border_norm_floor >= 0.0 && border_norm_floor < 1.0))
      throw ConfigError("border_norm_floor must be in [0, 1)");
    if (!(dedup_tol > 0.0 && dedup_tol <= 1.0)) throw ConfigError("dedup_tol must be in (0, 1]");
    if (cascade_levels < 4 || cascade_levels > 16) throw ConfigError("cascade_levels must be in [4, 16]");
  }

  friend bool operator==(const DictionaryConfig&, const DictionaryConfig&) = default;
};

/// Canonical little-endian encoding of a config (28 bytes), shared by the
/// dictionary dump and the .secg header.
inline void write_config(ByteWriter& w, const DictionaryConfig& c) {
  w.u8(static_cast<std::uint8_t>(c.family));
  w.u8(static_cast<std::uint8_t>(c.translation_exponent));
  w.i8(static_cast<std::int8_t>(c.j_min));
  w.i8(static_cast<std::int8_t>(c.j_max));
  w.u32(static_cast<std::uint32_t>(c.n_b));
  w.u16(static_cast<std::uint16_t>(c.m_dct));
  w.u16(static_cast<std::uint16_t>(c.cascade_levels));
  w.f64(c.border_norm_floor);
  w.f64(c.dedup_tol);
}

inline DictionaryConfig read_config(ByteReader& r) {
  DictionaryConfig c;
  const auto fam = r.u8();
  if (fam >= kFamilies.size()) throw CorruptError("unknown wavelet family id", r.position() - 1);
  c.family = static_cast<WaveletFamily>(fam);
  c.translation_exponent = r.u8();
  c.j_min = r.i8();
  c.j_max = r.i8();
  c.n_b = r.u32();
  c.m_dct = r.u16();
  c.cascade_levels = r.u16();
  c.border_norm_floor = r.f64();
  c.dedup_tol = r.f64();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw CorruptError(std::string("invalid dictionary config: ") + e.what(), r.position());
  }
  return c;
}

/// FNV-1a over the canonical config bytes.
inline std::uint64_t dictionary_id(const DictionaryConfig& c) {
  ByteWriter w;
  write_config(w, c);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : w.data()) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

enum class AtomKind : std::uint8_t { dct = 0, scaling = 1, wavelet = 2 };

/// Where an atom came from. For DCT atoms `index` is the frequency n (1-based,
/// n = 1 is the constant atom); otherwise the translation is index / 2^l.
struct AtomProvenance {
  AtomKind kind = AtomKind::dct;
  int scale = 0;
  int index = 0;
  friend bool operator==(const AtomProvenance&, const AtomProvenance&) = default;
};

class Dictionary {
 public:
  Dictionary(DictionaryConfig config, Eigen::MatrixXd atoms, std::vector<AtomProvenance> provenance)
      : config_(config), atoms_(std::move(atoms)), provenance_(std::move(provenance)) {
    if (static_cast<std::size_t>(atoms_.rows()) != config_.n_b)
      throw DimensionError("atom length does not match n_b");
    if (static_cast<std::size_t>(atoms_.cols()) != provenance_.size())
      throw DimensionError("provenance count does not match atom count");
  }

  /// n_b x M matrix, one atom per column.
  const Eigen::MatrixXd& atoms() const noexcept { return atoms_; }
  auto atom(std::size_t i) const { return atoms_.col(static_cast<Eigen::Index>(i)); }
  const AtomProvenance& provenance(std::size_t i) const { return provenance_.at(i); }
  std::span<const AtomProvenance> provenance() const noexcept { return provenance_; }

  std::size_t size() const noexcept { return static_cast<std::size_t>(atoms_.cols()); }
  std::size_t n_b() const noexcept { return config_.n_b; }
  double redundancy() const noexcept { return static_cast<double>(size()) / static_cast<double>(n_b()); }
  const DictionaryConfig& config() const noexcept { return config_; }
  std::uint64_t id() const { return dictionary_id(config_); }

 private:
  DictionaryConfig config_;
  Eigen::MatrixXd atoms_;
  std::vector<AtomProvenance> provenance_;
};

/// Numerical rank from a column-pivoted QR: pivots above rel_tol * |R_00|.
inline std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-12) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(rel_tol);
  return static_cast<std::size_t>(qr.rank());
}

namespace detail {

struct CandidateAtom {
  std::vector<double> values;
  AtomProvenance provenance;
};

// Cell-average discretization of x -> proto(2^j x - t) on [0, 1] split into n_b
// cells. Returns false if the in-segment part keeps less than `floor` of the
// norm the atom has over its whole support.
inline bool discretize(const Prototype& proto, int j, double t, std::size_t n_b, double floor,
                       std::vector<double>& out) {
  const double dil = std::ldexp(1.0, j);
  const double width = dil / static_cast<double>(n_b);  // cell width in prototype units
  // Cells i with u-range [i*width - t, (i+1)*width - t] meeting the support.
  const long first = static_cast<long>(std::floor((proto.support_begin() + t) / width));
  const long last = static_cast<long>(std::ceil((proto.support_end() + t) / width));
  double full = 0.0;
  double inside = 0.0;
  out.assign(n_b, 0.0);
  for (long i = first; i <= last; ++i) {
    const double a = static_cast<double>(i) * width - t;
    const double v = proto.cell_average(a, a + width);
    full += v * v;
    if (i >= 0 && i < static_cast<long>(n_b)) {
      out[static_cast<std::size_t>(i)] = v;
      inside += v * v;
    }
  }
  if (!(inside > 0.0) || std::sqrt(inside / full) < floor) return false;
  const double norm = std::sqrt(inside);
  for (auto& v : out) v /= norm;
  return true;
}

inline void emit_translates(const Prototype& proto, AtomKind kind, int j, const DictionaryConfig& c,
                            std::vector<CandidateAtom>& sink) {
  const double dil = std::ldexp(1.0, j);
  const double step_inv = std::ldexp(1.0, c.translation_exponent);
  // Translations t = k 2^-l with (support + t) meeting (0, 2^j).
  const long k_lo = static_cast<long>(std::floor(-proto.support_end() * step_inv)) + 1;
  const long k_hi = static_cast<long>(std::ceil((dil - proto.support_begin()) * step_inv)) - 1;
  std::vector<double> values;
  for (long k = k_lo; k <= k_hi; ++k) {
    const double t = static_cast<double>(k) / step_inv;
    if (discretize(proto, j, t, c.n_b, c.border_norm_floor, values))
      sink.push_back({values, {kind, j, static_cast<int>(k)}});
  }
}

}  // namespace detail

/// Normalized DCT-II atom of frequency n (1-based): w_c(n) cos(pi (2i-1)(n-1) / (2 n_b)).
inline std::vector<double> dct_atom(std::size_t n, std::size_t n_b) {
  std::vector<double> v(n_b);
  double ss = 0.0;
  for (std::size_t i = 1; i <= n_b; ++i) {
    v[i - 1] = std::cos(std::numbers::pi * static_cast<double>(2 * i - 1) * static_cast<double>(n - 1) /
                        (2.0 * static_cast<double>(n_b)));
    ss += v[i - 1] * v[i - 1];
  }
  const double norm = std::sqrt(ss);
  for (auto& x : v) x /= norm;
  return v;
}

/// Builds the dictionary. Order: DCT atoms (frequency ascending), scaling atoms
/// at j_min, then wavelets coarse to fine, translations ascending. Near
/// duplicates (|cos| > dedup_tol) are dropped, keeping the earlier atom. For
/// n_b <= 512 the atom matrix must have full row rank.
inline Dictionary build_dictionary(const DictionaryConfig& config) {
  config.validate();
  std::vector<detail::CandidateAtom> cand;
  for (std::size_t n = 1; n <= config.m_dct; ++n)
    cand.push_back({dct_atom(n, config.n_b), {AtomKind::dct, 0, static_cast<int>(n)}});

  const Prototype phi = make_prototype(config.family, PrototypeKind::scaling, config.cascade_levels);
  const Prototype psi = make_prototype(config.family, PrototypeKind::wavelet, config.cascade_levels);
  detail::emit_translates(phi, AtomKind::scaling, config.j_min, config, cand);
  for (int j = config.j_min; j <= config.j_max; ++j)
    detail::emit_translates(psi, AtomKind::wavelet, j, config, cand);

  const auto n_b = static_cast<Eigen::Index>(config.n_b);
  Eigen::MatrixXd all(n_b, static_cast<Eigen::Index>(cand.size()));
  for (std::size_t c = 0; c < cand.size(); ++c)
    all.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(cand[c].values.data(), n_b);

  const Eigen::MatrixXd gram = all.transpose() * all;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < all.cols(); ++c) {
    bool dup = false;
    for (auto k : keep)
      if (std::abs(gram(c, k)) > config.dedup_tol) {
        dup = true;
        break;
      }
    if (!dup) keep.push_back(c);
  }

  Eigen::MatrixXd atoms(n_b, static_cast<Eigen::Index>(keep.size()));
  std::vector<AtomProvenance> prov;
  prov.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    atoms.col(static_cast<Eigen::Index>(i)) = all.col(keep[i]);
    prov.push_back(cand[static_cast<std::size_t>(keep[i])].provenance);
  }

  if (config.n_b <= 512) {
    const auto rank = numerical_rank(atoms);
    if (rank < config.n_b)
      throw ConstructionError("dictionary does not span R^" + std::to_string(config.n_b) + " (rank " +
                              std::to_string(rank) + ")");
  }
  return Dictionary(config, std::move(atoms), std::move(prov));
}

// ----------------------------------------------------------------------
// Binary dump: "SDIC", u16 version, config (28 bytes), u32 n_b, u32 M,
// M x n_b float64 row-major (one atom per row), then per atom
// {u8 kind, i8 scale, i32 index}. All little-endian.
// ----------------------------------------------------------------------

inline constexpr std::uint16_t kDictionaryDumpVersion = 1;

inline std::vector<std::uint8_t> dictionary_dump(const Dictionary& d) {
  ByteWriter w;
  w.raw("SDIC", 4);
  w.u16(kDictionaryDumpVersion);
  write_config(w, d.config());
  w.u32(static_cast<std::uint32_t>(d.n_b()));
  w.u32(static_cast<std::uint32_t>(d.size()));
  for (std::size_t a = 0; a < d.size(); ++a)
    for (std::size_t i = 0; i < d.n_b(); ++i) w.f64(d.atoms()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)));
  for (const auto& p : d.provenance()) {
    w.u8(static_cast<std::uint8_t>(p.kind));
    w.i8(static_cast<std::int8_t>(p.scale));
    w.i32(p.index);
  }
  return std::move(w).take();
}

inline Dictionary load_dictionary_dump(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.bytes(4);
  if (std::string(magic.begin(), magic.end()) != "SDIC") throw CorruptError("bad dictionary magic", 0);
  if (r.u16() != kDictionaryDumpVersion) throw CorruptError("unsupported dictionary dump version", 4);
  const DictionaryConfig config = read_config(r);
  const std::size_t n_b = r.u32();
  const std::size_t m = r.u32();
  if (n_b != config.n_b) throw CorruptError("n_b disagrees with config", r.position());
  if (m > (r.remaining() / 8) / std::max<std::size_t>(n_b, 1)) throw CorruptError("truncated atom table", r.position());
  Eigen::MatrixXd atoms(static_cast<Eigen::Index>(n_b), static_cast<Eigen::Index>(m));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t i = 0; i < n_b; ++i) atoms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = r.f64();
  std::vector<AtomProvenance> prov(m);
  for (auto& p : prov) {
    const auto kind = r.u8();
    if (kind > 2) throw CorruptError("bad atom kind", r.position() - 1);
    p.kind = static_cast<AtomKind>(kind);
    p.scale = r.i8();
    p.index = r.i32();
  }
  if (!r.done()) throw CorruptError("trailing bytes after dictionary dump", r.position());
  return Dictionary(config, std::move(atoms), std::move(prov));
}

}  // namespace secg
