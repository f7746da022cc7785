#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "secg/dictionary.hpp"

using namespace secg;

namespace {

const Dictionary& cdf97_dictionary() {
  static const Dictionary d = build_dictionary(DictionaryConfig::dictionary(WaveletFamily::CDF97));
  return d;
}

// Segment [0, 1] position of an atom's continuous support.
std::pair<double, double> unit_support(const Dictionary& d, std::size_t i) {
  const auto& p = d.provenance(i);
  const auto proto = make_prototype(d.config().family,
                                    p.kind == AtomKind::scaling ? PrototypeKind::scaling : PrototypeKind::wavelet);
  const double t = std::ldexp(static_cast<double>(p.index), -d.config().translation_exponent);
  const double s = std::ldexp(1.0, -p.scale);
  return {(proto.support_begin() + t) * s, (proto.support_end() + t) * s};
}

}  // namespace

TEST(Dictionary, FirstAtomIsConstant) {
  const auto& d = cdf97_dictionary();
  const double c = 1.0 / std::sqrt(500.0);
  for (Eigen::Index i = 0; i < 500; ++i) EXPECT_NEAR(d.atom(0)(i), c, 1e-15);
  EXPECT_EQ(d.provenance(0).kind, AtomKind::dct);
  EXPECT_EQ(d.provenance(0).index, 1);
}

TEST(Dictionary, AtomsHaveUnitNorm) {
  const auto& d = cdf97_dictionary();
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(d.atom(i).norm(), 1.0, 1e-12) << i;
}

TEST(Dictionary, DctBlockIsOrthonormalAndFirst) {
  const auto& d = cdf97_dictionary();
  const auto m = static_cast<Eigen::Index>(d.config().m_dct);
  const Eigen::MatrixXd g = d.atoms().leftCols(m).transpose() * d.atoms().leftCols(m);
  EXPECT_LE((g - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index n = 0; n < m; ++n) EXPECT_EQ(d.provenance(static_cast<std::size_t>(n)).index, n + 1);
}

TEST(Dictionary, OrderingIsDctScalingThenWaveletsCoarseToFine) {
  const auto& d = cdf97_dictionary();
  const auto& c = d.config();
  AtomProvenance prev = d.provenance(0);
  for (std::size_t i = 1; i < d.size(); ++i) {
    const auto& p = d.provenance(i);
    ASSERT_GE(static_cast<int>(p.kind), static_cast<int>(prev.kind)) << i;
    if (p.kind == AtomKind::scaling) { EXPECT_EQ(p.scale, c.j_min); }
    if (p.kind == prev.kind && p.kind != AtomKind::dct) {
      ASSERT_GE(p.scale, prev.scale) << i;
      if (p.scale == prev.scale) { ASSERT_GT(p.index, prev.index) << i; }
    }
    if (p.kind == AtomKind::wavelet) { EXPECT_TRUE(p.scale >= c.j_min && p.scale <= c.j_max); }
    prev = p;
  }
  EXPECT_EQ(d.provenance(d.size() - 1).scale, c.j_max);
}

TEST(Dictionary, NoNearDuplicates) {
  const auto& d = cdf97_dictionary();
  Eigen::MatrixXd g = d.atoms().transpose() * d.atoms();
  g.diagonal().setZero();
  EXPECT_LE(g.cwiseAbs().maxCoeff(), d.config().dedup_tol);
}

// Zeroth moment survives discretization for atoms away from the borders.
TEST(Dictionary, InteriorWaveletAtomsHaveZeroSum) {
  const auto& d = cdf97_dictionary();
  std::size_t checked = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.provenance(i).kind != AtomKind::wavelet) continue;
    const auto [a, b] = unit_support(d, i);
    if (a < 0.0 || b > 1.0) continue;
    ++checked;
    EXPECT_LE(std::abs(d.atom(i).sum()), 1e-6 * std::sqrt(500.0)) << i;
  }
  EXPECT_GT(checked, 500U);
}

TEST(Dictionary, RedundantConfigSpansAndIsNearTwo) {
  const auto& d = cdf97_dictionary();
  EXPECT_GE(d.redundancy(), 1.5);
  EXPECT_LE(d.redundancy(), 2.5);
  EXPECT_EQ(numerical_rank(d.atoms()), 500U);
}

TEST(Dictionary, BasisConfigIsNearSquare) {
  const auto d = build_dictionary(DictionaryConfig::basis(WaveletFamily::CDF97));
  EXPECT_GE(d.redundancy(), 1.0);
  EXPECT_LE(d.redundancy(), 1.3);
}

// Independent count of the l = 0 candidates: one translate per integer shift
// whose support meets the segment with at least 10% of its norm inside.
TEST(Dictionary, BasisAtomCountMatchesCandidateCount) {
  const auto cfg = DictionaryConfig::basis(WaveletFamily::CDF97);
  const auto d = build_dictionary(cfg);
  const int r = 12;
  auto count = [&](PrototypeKind kind, int j) {
    const auto proto = make_prototype(cfg.family, kind);
    const auto v = prototype_samples(cfg.family, kind, r);
    const double h = std::ldexp(1.0, -r);
    std::size_t n = 0;
    for (int k = -64; k < (1 << j) + 64; ++k) {
      double in = 0.0, all = 0.0;
      for (std::size_t s = 0; s < v.size(); ++s) {
        const double x = (proto.support_begin() + h * static_cast<double>(s) + k) / std::ldexp(1.0, j);
        all += v[s] * v[s];
        if (x >= 0.0 && x <= 1.0) in += v[s] * v[s];
      }
      if (in > 0.0 && std::sqrt(in / all) >= cfg.border_norm_floor) ++n;
    }
    return n;
  };
  std::size_t expected = cfg.m_dct + count(PrototypeKind::scaling, cfg.j_min);
  for (int j = cfg.j_min; j <= cfg.j_max; ++j) expected += count(PrototypeKind::wavelet, j);
  // Candidates right at the 10% floor may fall either way under a different
  // quadrature; deduplication only removes atoms.
  EXPECT_LE(d.size(), expected + 4);
  EXPECT_GE(d.size() + 8, expected);
}

TEST(Dictionary, RebuildIsBitIdentical) {
  const auto cfg = DictionaryConfig::dictionary(WaveletFamily::Db4, 128);
  const auto a = build_dictionary(cfg);
  const auto b = build_dictionary(cfg);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(std::memcmp(a.atoms().data(), b.atoms().data(), sizeof(double) * a.atoms().size()), 0);
  EXPECT_EQ(a.id(), b.id());
}

TEST(Dictionary, DumpRoundTrip) {
  const auto d = build_dictionary(DictionaryConfig::dictionary(WaveletFamily::CW2, 64));
  const auto bytes = dictionary_dump(d);
  EXPECT_EQ(bytes.size(), 4 + 2 + 28 + 8 + d.size() * (64 * 8 + 6));
  const auto e = load_dictionary_dump(bytes);
  EXPECT_EQ(e.config(), d.config());
  EXPECT_TRUE(e.atoms() == d.atoms());
  ASSERT_EQ(e.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(e.provenance(i), d.provenance(i));
}

TEST(Dictionary, DumpRejectsCorruption) {
  const auto d = build_dictionary(DictionaryConfig::dictionary(WaveletFamily::CW2, 32));
  auto bytes = dictionary_dump(d);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(load_dictionary_dump(bad), CorruptError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(load_dictionary_dump(bad), CorruptError);
  bad = bytes;
  bad.push_back(0);
  EXPECT_THROW(load_dictionary_dump(bad), CorruptError);
}

TEST(Dictionary, IdDependsOnEveryField) {
  const auto base = DictionaryConfig::dictionary(WaveletFamily::CDF97);
  auto c = base;
  c.family = WaveletFamily::CDF53;
  EXPECT_NE(dictionary_id(c), dictionary_id(base));
  c = base;
  c.translation_exponent = 1;
  EXPECT_NE(dictionary_id(c), dictionary_id(base));
  c = base;
  c.border_norm_floor = 0.2;
  EXPECT_NE(dictionary_id(c), dictionary_id(base));
}

TEST(Dictionary, InvalidConfigsAreRejected) {
  auto c = DictionaryConfig::dictionary(WaveletFamily::CDF97);
  c.n_b = 1;
  EXPECT_THROW(build_dictionary(c), ConfigError);
  c = DictionaryConfig::dictionary(WaveletFamily::CDF97);
  c.j_min = 5;
  c.j_max = 4;
  EXPECT_THROW(build_dictionary(c), ConfigError);
  c = DictionaryConfig::dictionary(WaveletFamily::CDF97);
  c.m_dct = 0;
  EXPECT_THROW(build_dictionary(c), ConfigError);
  c = DictionaryConfig::dictionary(WaveletFamily::CDF97);
  c.family = static_cast<WaveletFamily>(42);
  EXPECT_THROW(build_dictionary(c), ConfigError);
}

TEST(Dictionary, NonSpanningConfigIsAConstructionError) {
  DictionaryConfig c = DictionaryConfig::basis(WaveletFamily::Db4, 256);
  c.j_min = c.j_max = 3;
  c.m_dct = 1;
  EXPECT_THROW(build_dictionary(c), ConstructionError);
}
