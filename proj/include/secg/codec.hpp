#pragma once

// Quantized sparse models and the .secg container. See docs/formats.md for
// the byte layout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "secg/bitstream.hpp"
#include "secg/dictionary.hpp"
#include "secg/entropy.hpp"
#include "secg/error.hpp"
#include "secg/pursuit.hpp"

namespace secg {

struct QuantizedSegment {
  std::vector<std::uint32_t> indices;     // dictionary positions, strictly increasing
  std::vector<std::uint64_t> magnitudes;  // floor(|c| / delta + 1/2), never 0
  std::vector<std::uint8_t> signs;        // 0 positive, 1 negative

  std::size_t size() const noexcept { return indices.size(); }
  friend bool operator==(const QuantizedSegment&, const QuantizedSegment&) = default;
};

struct QuantizedModel {
  double delta = 1.0;
  std::uint64_t sample_count = 0;  // original record length N (<= Q n_b)
  DictionaryConfig dictionary;
  std::vector<QuantizedSegment> segments;

  std::size_t n_b() const noexcept { return dictionary.n_b; }
  std::size_t segment_count() const noexcept { return segments.size(); }
  std::uint64_t dictionary_id() const { return secg::dictionary_id(dictionary); }
  std::size_t term_count() const {
    return std::accumulate(segments.begin(), segments.end(), std::size_t{0},
                           [](std::size_t a, const QuantizedSegment& s) { return a + s.size(); });
  }

  /// Structural invariants; throws CorruptError at the offending segment.
  void validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw CorruptError("delta must be positive and finite", 0);
    const std::uint64_t capacity = static_cast<std::uint64_t>(segments.size()) * n_b();
    if (sample_count > capacity || (!segments.empty() && sample_count <= capacity - n_b()))
      throw CorruptError("sample count inconsistent with segment count", 0);
    for (std::size_t q = 0; q < segments.size(); ++q) {
      const auto& s = segments[q];
      if (s.size() > n_b()) throw CorruptError("segment holds more than n_b terms", q);
      if (s.magnitudes.size() != s.size() || s.signs.size() != s.size())
        throw CorruptError("stream lengths differ within segment", q);
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i && s.indices[i] <= s.indices[i - 1]) throw CorruptError("indices not strictly increasing", q);
        if (s.magnitudes[i] == 0) throw CorruptError("zero magnitude stored", q);
        if (s.signs[i] > 1) throw CorruptError("sign is not a bit", q);
      }
    }
  }

  friend bool operator==(const QuantizedModel&, const QuantizedModel&) = default;
};

/// |c| -> floor(|c| / delta + 1/2), evaluated exactly: the result q satisfies
/// (q - 1/2) delta <= |c| < (q + 1/2) delta. Plain floating point rounds
/// |c| just below delta/2 up to 1.
inline std::uint64_t quantize_magnitude(double c, double delta) {
  const double a = std::abs(c);
  double q = std::floor(a / delta + 0.5);
  if (!(q < 9007199254740992.0)) throw ConfigError("quantized magnitude overflows (delta too small)");
  // fma gives the sign of a - (q -/+ 1/2) delta without intermediate rounding.
  while (q > 0.0 && std::fma(-(q - 0.5), delta, a) < 0.0) q -= 1.0;
  while (std::fma(-(q + 0.5), delta, a) >= 0.0) q += 1.0;
  return static_cast<std::uint64_t>(q);
}

/// Quantizes every segment, drops terms that quantize to 0 and sorts the
/// survivors by atom position (magnitudes and signs follow the same order).
inline QuantizedModel quantize(std::span<const SegmentApproximation> approxs, double delta,
                               const DictionaryConfig& dictionary, std::uint64_t sample_count = 0) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be > 0");
  QuantizedModel m;
  m.delta = delta;
  m.dictionary = dictionary;
  m.sample_count = sample_count ? sample_count : static_cast<std::uint64_t>(approxs.size()) * dictionary.n_b;
  m.segments.reserve(approxs.size());
  std::vector<std::size_t> order;
  for (const auto& a : approxs) {
    if (a.coefficients.size() != a.indices.size()) throw DimensionError("coefficient/index count mismatch");
    order.resize(a.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a.indices[x] < a.indices[y]; });
    QuantizedSegment s;
    for (auto i : order) {
      const auto mag = quantize_magnitude(a.coefficients[i], delta);
      if (mag == 0) continue;
      s.indices.push_back(static_cast<std::uint32_t>(a.indices[i]));
      s.magnitudes.push_back(mag);
      s.signs.push_back(a.coefficients[i] < 0.0 ? 1 : 0);
    }
    m.segments.push_back(std::move(s));
  }
  return m;
}

/// f_q^r = sum_i (-1)^{s_i} m_i delta d_{l_i}, segments concatenated (length Q n_b, uncropped).
inline std::vector<double> dequantize_reconstruct(const QuantizedModel& model, const Dictionary& dict) {
  if (model.dictionary_id() != dict.id() || model.n_b() != dict.n_b())
    throw ConfigError("model was encoded with a different dictionary");
  const std::size_t n_b = dict.n_b();
  std::vector<double> out(model.segment_count() * n_b, 0.0);
  for (std::size_t q = 0; q < model.segment_count(); ++q) {
    const auto& s = model.segments[q];
    Eigen::Map<Eigen::VectorXd> seg(out.data() + q * n_b, static_cast<Eigen::Index>(n_b));
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.indices[i] >= dict.size())
        throw CorruptError("atom index " + std::to_string(s.indices[i]) + " out of dictionary range", q);
      const double c = static_cast<double>(s.magnitudes[i]) * model.delta * (s.signs[i] ? -1.0 : 1.0);
      seg += c * dict.atom(s.indices[i]);
    }
  }
  return out;
}

// ----------------------------------------------------------------------
// Streams
// ----------------------------------------------------------------------

struct ModelStreams {
  std::vector<std::uint64_t> indices;     // st_ind
  std::vector<std::uint64_t> magnitudes;  // st_cf
  std::vector<std::uint8_t> signs;        // st_sg
};

/// st_ind holds per segment (position+1) of the first atom, then the successive
/// differences, then a 0 separator; an empty segment is a lone 0.
inline ModelStreams model_streams(const QuantizedModel& m) {
  ModelStreams s;
  for (const auto& seg : m.segments) {
    for (std::size_t i = 0; i < seg.size(); ++i)
      s.indices.push_back(i == 0 ? std::uint64_t{seg.indices[0]} + 1 : seg.indices[i] - seg.indices[i - 1]);
    s.indices.push_back(0);
    s.magnitudes.insert(s.magnitudes.end(), seg.magnitudes.begin(), seg.magnitudes.end());
    s.signs.insert(s.signs.end(), seg.signs.begin(), seg.signs.end());
  }
  return s;
}

/// Inverse of model_streams for `segment_count` segments.
inline std::vector<QuantizedSegment> segments_from_streams(const ModelStreams& s, std::size_t segment_count) {
  std::vector<QuantizedSegment> segs(segment_count);
  std::size_t pos = 0;
  std::size_t term = 0;
  for (std::size_t q = 0; q < segment_count; ++q) {
    auto& seg = segs[q];
    std::uint64_t index = 0;
    for (;;) {
      if (pos >= s.indices.size())
        throw CorruptError("index stream ends inside segment " + std::to_string(q), pos);
      const std::uint64_t v = s.indices[pos++];
      if (v == 0) break;
      index = seg.indices.empty() ? v - 1 : index + v;
      if (index > 0xFFFFFFFFULL) throw CorruptError("atom index overflow", pos - 1);
      seg.indices.push_back(static_cast<std::uint32_t>(index));
    }
    if (term + seg.size() > s.magnitudes.size() || term + seg.size() > s.signs.size())
      throw CorruptError("magnitude/sign streams shorter than the index stream", term);
    seg.magnitudes.assign(s.magnitudes.begin() + static_cast<std::ptrdiff_t>(term),
                          s.magnitudes.begin() + static_cast<std::ptrdiff_t>(term + seg.size()));
    seg.signs.assign(s.signs.begin() + static_cast<std::ptrdiff_t>(term),
                     s.signs.begin() + static_cast<std::ptrdiff_t>(term + seg.size()));
    term += seg.size();
  }
  if (pos != s.indices.size()) throw CorruptError("extra symbols after the last segment separator", pos);
  if (term != s.magnitudes.size() || term != s.signs.size())
    throw CorruptError("magnitude/sign streams longer than the index stream", term);
  for (std::size_t q = 0; q < segs.size(); ++q)
    for (auto m : segs[q].magnitudes)
      if (m == 0) throw CorruptError("zero magnitude in segment " + std::to_string(q), q);
  return segs;
}

// ----------------------------------------------------------------------
// Container
// ----------------------------------------------------------------------

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::uint16_t kFlagHuffman = 1;

struct ContainerHeader {
  std::uint16_t version = kContainerVersion;
  std::uint16_t flags = 0;
  double delta = 1.0;
  std::uint32_t n_b = 0;
  std::uint32_t segment_count = 0;
  std::uint64_t sample_count = 0;
  std::uint64_t dictionary_id = 0;
  DictionaryConfig dictionary;

  bool huffman() const noexcept { return flags & kFlagHuffman; }
  friend bool operator==(const ContainerHeader&, const ContainerHeader&) = default;
};

/// Header plus the three serialized stream sections (each without its u32 length prefix).
struct EncodedContainer {
  ContainerHeader header;
  std::vector<std::uint8_t> st_ind;
  std::vector<std::uint8_t> st_cf;
  std::vector<std::uint8_t> st_sg;

  std::vector<std::uint8_t> to_bytes() const;
  static EncodedContainer from_bytes(std::span<const std::uint8_t> bytes);
  std::size_t byte_size() const { return kHeaderBytes + 12 + st_ind.size() + st_cf.size() + st_sg.size(); }

  static constexpr std::size_t kHeaderBytes = 68;
  friend bool operator==(const EncodedContainer&, const EncodedContainer&) = default;
};

namespace detail {

// Fixed bit depth: u32 count, u8 width, count * width bits.
inline std::vector<std::uint8_t> pack_fixed(std::span<const std::uint64_t> v) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(v.size()));
  std::uint64_t mx = 0;
  for (auto x : v) mx = std::max(mx, x);
  const int width = bit_width_of(mx);
  w.u8(static_cast<std::uint8_t>(width));
  BitWriter bits;
  for (auto x : v) bits.put(x, width);
  w.bytes(std::move(bits).take());
  return std::move(w).take();
}

inline std::vector<std::uint64_t> unpack_fixed(std::span<const std::uint8_t> bytes, std::size_t base,
                                               std::size_t max_count) {
  ByteReader r(bytes, base);
  const std::size_t count = r.u32();
  if (count > max_count) throw CorruptError("stream symbol count exceeds its bound", base);
  const int width = r.u8();
  if (width > 64) throw CorruptError("bit width > 64", r.position() - 1);
  const std::size_t nbytes = (count * static_cast<std::size_t>(width) + 7) / 8;
  if (r.remaining() != nbytes) throw CorruptError("fixed-width stream has wrong length", r.position());
  const auto payload = r.bytes(nbytes);
  BitReader bits(payload);
  std::vector<std::uint64_t> out(count);
  for (auto& x : out) x = bits.get(width);
  bits.expect_padding();
  return out;
}

// Huffman: u32 count, table, bits.
inline std::vector<std::uint8_t> pack_huffman(std::span<const std::uint64_t> v) {
  const auto enc = huffman_encode(v);
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(v.size()));
  enc.table.serialize(w);
  w.bytes(enc.bits);
  return std::move(w).take();
}

inline std::vector<std::uint64_t> unpack_huffman(std::span<const std::uint8_t> bytes, std::size_t base,
                                                 std::size_t max_count) {
  ByteReader r(bytes, base);
  const std::size_t count = r.u32();
  if (count > max_count) throw CorruptError("stream symbol count exceeds its bound", base);
  const HuffmanTable table = HuffmanTable::deserialize(r, std::max<std::size_t>(count, 1));
  try {
    return huffman_decode(r.bytes(r.remaining()), count, table);
  } catch (const CorruptError& e) {
    throw CorruptError(std::string("Huffman stream: ") + e.what(), r.position());
  }
}

// Signs: u32 count, one bit each.
inline std::vector<std::uint8_t> pack_signs(std::span<const std::uint8_t> v) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(v.size()));
  BitWriter bits;
  for (auto s : v) bits.put_bit(s != 0);
  w.bytes(std::move(bits).take());
  return std::move(w).take();
}

inline std::vector<std::uint8_t> unpack_signs(std::span<const std::uint8_t> bytes, std::size_t base,
                                              std::size_t max_count) {
  ByteReader r(bytes, base);
  const std::size_t count = r.u32();
  if (count > max_count) throw CorruptError("stream symbol count exceeds its bound", base);
  if (r.remaining() != (count + 7) / 8) throw CorruptError("sign stream has wrong length", r.position());
  BitReader bits(r.bytes(r.remaining()));
  std::vector<std::uint8_t> out(count);
  for (auto& s : out) s = bits.get_bit() ? 1 : 0;
  bits.expect_padding();
  return out;
}

}  // namespace detail

inline EncodedContainer encode(const QuantizedModel& model, bool use_huffman) {
  model.validate();
  if (model.term_count() >= 0xFFFFFFFFULL || model.segment_count() >= 0xFFFFFFFFULL)
    throw ConfigError("model too large for the container");
  EncodedContainer c;
  c.header.flags = use_huffman ? kFlagHuffman : 0;
  c.header.delta = model.delta;
  c.header.n_b = static_cast<std::uint32_t>(model.n_b());
  c.header.segment_count = static_cast<std::uint32_t>(model.segment_count());
  c.header.sample_count = model.sample_count;
  c.header.dictionary_id = model.dictionary_id();
  c.header.dictionary = model.dictionary;
  const ModelStreams s = model_streams(model);
  c.st_ind = use_huffman ? detail::pack_huffman(s.indices) : detail::pack_fixed(s.indices);
  c.st_cf = use_huffman ? detail::pack_huffman(s.magnitudes) : detail::pack_fixed(s.magnitudes);
  c.st_sg = detail::pack_signs(s.signs);
  return c;
}

inline QuantizedModel decode(const EncodedContainer& c) {
  const auto& h = c.header;
  if (h.version != kContainerVersion) throw CorruptError("unsupported container version", 4);
  if (h.flags & ~kFlagHuffman) throw CorruptError("unknown container flags", 6);
  if (h.dictionary.n_b != h.n_b) throw CorruptError("n_b disagrees with dictionary config", 16);
  if (dictionary_id(h.dictionary) != h.dictionary_id) throw CorruptError("dictionary id mismatch", 32);
  const std::size_t ind_base = EncodedContainer::kHeaderBytes + 4;
  const std::size_t cf_base = ind_base + c.st_ind.size() + 4;
  const std::size_t sg_base = cf_base + c.st_cf.size() + 4;
  // Each segment holds at most n_b terms plus its separator.
  const std::size_t max_terms = std::size_t{h.segment_count} * h.n_b;
  const std::size_t max_ind = max_terms + h.segment_count;
  ModelStreams s;
  s.indices = h.huffman() ? detail::unpack_huffman(c.st_ind, ind_base, max_ind)
                          : detail::unpack_fixed(c.st_ind, ind_base, max_ind);
  s.magnitudes = h.huffman() ? detail::unpack_huffman(c.st_cf, cf_base, max_terms)
                             : detail::unpack_fixed(c.st_cf, cf_base, max_terms);
  s.signs = detail::unpack_signs(c.st_sg, sg_base, max_terms);

  QuantizedModel m;
  m.delta = h.delta;
  m.sample_count = h.sample_count;
  m.dictionary = h.dictionary;
  m.segments = segments_from_streams(s, h.segment_count);
  m.validate();
  return m;
}

inline std::vector<std::uint8_t> EncodedContainer::to_bytes() const {
  ByteWriter w;
  w.raw("SECG", 4);
  w.u16(header.version);
  w.u16(header.flags);
  w.f64(header.delta);
  w.u32(header.n_b);
  w.u32(header.segment_count);
  w.u64(header.sample_count);
  w.u64(header.dictionary_id);
  write_config(w, header.dictionary);
  for (const auto* s : {&st_ind, &st_cf, &st_sg}) {
    w.u32(static_cast<std::uint32_t>(s->size()));
    w.bytes(*s);
  }
  return std::move(w).take();
}

inline EncodedContainer EncodedContainer::from_bytes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.bytes(4);
  if (std::string(magic.begin(), magic.end()) != "SECG") throw CorruptError("bad magic", 0);
  EncodedContainer c;
  auto& h = c.header;
  h.version = r.u16();
  if (h.version != kContainerVersion) throw CorruptError("unsupported container version", 4);
  h.flags = r.u16();
  h.delta = r.f64();
  if (!(h.delta > 0.0) || !std::isfinite(h.delta)) throw CorruptError("invalid delta", 8);
  h.n_b = r.u32();
  h.segment_count = r.u32();
  h.sample_count = r.u64();
  h.dictionary_id = r.u64();
  h.dictionary = read_config(r);
  for (auto* s : {&c.st_ind, &c.st_cf, &c.st_sg}) {
    const std::size_t len = r.u32();
    const auto b = r.bytes(len);
    s->assign(b.begin(), b.end());
  }
  if (!r.done()) throw CorruptError("trailing bytes after container", r.position());
  return c;
}

}  // namespace secg
