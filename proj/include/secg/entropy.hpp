#pragma once

// Canonical Huffman coding of nonnegative integer streams. The table is kept
// sparse (symbol, length) so that large magnitudes do not inflate memory, and
// serialized as the alphabet size followed by run-length coded code lengths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "secg/bitstream.hpp"
#include "secg/error.hpp"

namespace secg {

inline constexpr int kMaxHuffmanLength = 58;
inline constexpr std::uint64_t kMaxHuffmanSymbols = std::uint64_t{1} << 24;

class HuffmanTable {
 public:
  struct Entry {
    std::uint64_t symbol;
    int length;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  HuffmanTable() = default;

  /// Entries sorted by symbol, lengths in [1, kMaxHuffmanLength].
  explicit HuffmanTable(std::vector<Entry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.symbol < b.symbol; });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].length < 1 || entries_[i].length > kMaxHuffmanLength)
        throw ConfigError("Huffman code length out of range");
      if (i && entries_[i].symbol == entries_[i - 1].symbol) throw ConfigError("duplicate Huffman symbol");
    }
    if (kraft_numerator() > (std::uint64_t{1} << kMaxHuffmanLength))
      throw ConfigError("Huffman code lengths violate the Kraft inequality");
    assign_codes();
  }

  /// Code lengths from symbol frequencies (Huffman's algorithm, deterministic
  /// tie-breaking). A single symbol gets length 1.
  static HuffmanTable from_frequencies(const std::map<std::uint64_t, std::uint64_t>& freq) {
    if (freq.empty()) return {};
    if (freq.size() == 1) return HuffmanTable({{freq.begin()->first, 1}});
    std::vector<std::uint64_t> weights;
    std::vector<std::uint64_t> symbols;
    for (const auto& [s, f] : freq) {
      symbols.push_back(s);
      weights.push_back(std::max<std::uint64_t>(f, 1));
    }
    for (;;) {
      auto lengths = code_lengths(weights);
      if (*std::max_element(lengths.begin(), lengths.end()) <= kMaxHuffmanLength) {
        std::vector<Entry> e;
        for (std::size_t i = 0; i < symbols.size(); ++i) e.push_back({symbols[i], lengths[i]});
        return HuffmanTable(std::move(e));
      }
      for (auto& w : weights) w = std::max<std::uint64_t>(1, w / 2);
    }
  }

  std::span<const Entry> entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::uint64_t max_symbol() const noexcept { return entries_.empty() ? 0 : entries_.back().symbol; }

  /// Code length of `symbol`, 0 if absent.
  int length(std::uint64_t symbol) const {
    const auto it = find(symbol);
    return it == entries_.end() ? 0 : it->length;
  }
  /// Canonical code of `symbol` (right-aligned in `length(symbol)` bits).
  std::uint64_t code(std::uint64_t symbol) const {
    const auto it = find(symbol);
    if (it == entries_.end()) throw ConfigError("symbol not in Huffman table");
    return codes_[static_cast<std::size_t>(it - entries_.begin())];
  }

  /// sum 2^{-len} scaled by 2^kMaxHuffmanLength.
  std::uint64_t kraft_numerator() const {
    std::uint64_t s = 0;
    for (const auto& e : entries_) s += std::uint64_t{1} << (kMaxHuffmanLength - e.length);
    return s;
  }

  /// varint alphabet size A (= max symbol + 1, 0 if empty), then runs
  /// {u8 length, varint run} covering symbols 0..A-1 (length 0 = absent).
  void serialize(ByteWriter& w) const {
    if (entries_.empty()) {
      w.varint(0);
      return;
    }
    w.varint(max_symbol() + 1);
    std::uint64_t next = 0;  // first symbol not yet covered
    std::size_t i = 0;
    while (i < entries_.size()) {
      if (entries_[i].symbol > next) {
        w.u8(0);
        w.varint(entries_[i].symbol - next);
        next = entries_[i].symbol;
      }
      std::size_t j = i + 1;
      while (j < entries_.size() && entries_[j].symbol == entries_[j - 1].symbol + 1 &&
             entries_[j].length == entries_[i].length)
        ++j;
      w.u8(static_cast<std::uint8_t>(entries_[i].length));
      w.varint(j - i);
      next = entries_[j - 1].symbol + 1;
      i = j;
    }
  }

  /// `max_entries` bounds the number of coded symbols (corrupt tables cannot
  /// force large allocations).
  static HuffmanTable deserialize(ByteReader& r, std::uint64_t max_entries = kMaxHuffmanSymbols) {
    const std::size_t start = r.position();
    const std::uint64_t alphabet = r.varint();
    std::vector<Entry> entries;
    std::uint64_t covered = 0;
    while (covered < alphabet) {
      const int len = r.u8();
      const std::uint64_t run = r.varint();
      if (run == 0 || run > alphabet - covered) throw CorruptError("bad Huffman table run", r.position());
      if (len > kMaxHuffmanLength) throw CorruptError("bad Huffman code length", r.position());
      if (len > 0) {
        if (entries.size() + run > std::min(max_entries, kMaxHuffmanSymbols))
          throw CorruptError("implausible Huffman table size", r.position());
        for (std::uint64_t s = 0; s < run; ++s) entries.push_back({covered + s, len});
      }
      covered += run;
    }
    if (alphabet > 0 && (entries.empty() || entries.back().symbol != alphabet - 1))
      throw CorruptError("Huffman alphabet size does not match its last symbol", start);
    try {
      return HuffmanTable(std::move(entries));
    } catch (const ConfigError& e) {
      throw CorruptError(e.what(), start);
    }
  }

  friend bool operator==(const HuffmanTable& a, const HuffmanTable& b) { return a.entries_ == b.entries_; }

 private:
  friend class HuffmanDecoder;

  std::vector<Entry>::const_iterator find(std::uint64_t symbol) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), symbol,
                               [](const Entry& e, std::uint64_t s) { return e.symbol < s; });
    return (it != entries_.end() && it->symbol == symbol) ? it : entries_.end();
  }

  // Lengths for weights via a min-heap merge; ties broken by creation order.
  static std::vector<int> code_lengths(const std::vector<std::uint64_t>& weights) {
    const std::size_t n = weights.size();
    std::vector<std::size_t> parent(2 * n - 1, 0);
    using Node = std::pair<std::uint64_t, std::size_t>;  // (weight, id)
    std::priority_queue<Node, std::vector<Node>, std::greater<>> heap;
    for (std::size_t i = 0; i < n; ++i) heap.push({weights[i], i});
    std::size_t next = n;
    while (heap.size() > 1) {
      const auto a = heap.top();
      heap.pop();
      const auto b = heap.top();
      heap.pop();
      parent[a.second] = next;
      parent[b.second] = next;
      heap.push({a.first + b.first, next});
      ++next;
    }
    const std::size_t root = next - 1;
    std::vector<int> depth(2 * n - 1, 0);
    for (std::size_t id = root; id-- > 0;) depth[id] = depth[parent[id]] + 1;
    return {depth.begin(), depth.begin() + static_cast<std::ptrdiff_t>(n)};
  }

  // Canonical order: by (length, symbol).
  void assign_codes() {
    std::vector<std::size_t> order(entries_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return entries_[a].length != entries_[b].length ? entries_[a].length < entries_[b].length
                                                      : entries_[a].symbol < entries_[b].symbol;
    });
    codes_.assign(entries_.size(), 0);
    std::uint64_t code = 0;
    int prev_len = order.empty() ? 0 : entries_[order[0]].length;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const int len = entries_[order[k]].length;
      code <<= (len - prev_len);
      codes_[order[k]] = code++;
      prev_len = len;
    }
    canonical_order_ = std::move(order);
  }

  std::vector<Entry> entries_;
  std::vector<std::uint64_t> codes_;
  std::vector<std::size_t> canonical_order_;
};

/// Table-driven canonical decoder (first code per length).
class HuffmanDecoder {
 public:
  explicit HuffmanDecoder(const HuffmanTable& t) : table_(t) {
    for (std::size_t k = 0; k < t.canonical_order_.size(); ++k) {
      const auto& e = t.entries_[t.canonical_order_[k]];
      if (count_[e.length]++ == 0) {
        first_code_[e.length] = t.codes_[t.canonical_order_[k]];
        first_index_[e.length] = k;
      }
      max_len_ = std::max(max_len_, e.length);
    }
  }

  std::uint64_t next(BitReader& in) const {
    std::uint64_t code = 0;
    const std::size_t start = in.bit_position();
    for (int len = 1; len <= max_len_; ++len) {
      code = (code << 1) | (in.get_bit() ? 1U : 0U);
      if (count_[len] && code >= first_code_[len] && code - first_code_[len] < count_[len]) {
        const auto k = first_index_[len] + static_cast<std::size_t>(code - first_code_[len]);
        return table_.entries_[table_.canonical_order_[k]].symbol;
      }
    }
    throw CorruptError("invalid Huffman prefix", start / 8);
  }

 private:
  const HuffmanTable& table_;
  std::uint64_t first_code_[kMaxHuffmanLength + 1] = {};
  std::size_t first_index_[kMaxHuffmanLength + 1] = {};
  std::uint64_t count_[kMaxHuffmanLength + 1] = {};
  int max_len_ = 0;
};

struct HuffmanEncoded {
  HuffmanTable table;
  std::vector<std::uint8_t> bits;  // MSB-first, zero-padded to a byte
  std::size_t bit_count = 0;
  std::size_t symbol_count = 0;
};

inline HuffmanEncoded huffman_encode(std::span<const std::uint64_t> stream) {
  std::map<std::uint64_t, std::uint64_t> freq;
  for (auto s : stream) ++freq[s];
  HuffmanEncoded out;
  out.table = HuffmanTable::from_frequencies(freq);
  out.symbol_count = stream.size();
  BitWriter w;
  for (auto s : stream) w.put(out.table.code(s), out.table.length(s));
  out.bit_count = w.bit_count();
  out.bits = std::move(w).take();
  return out;
}

/// Decodes exactly `count` symbols; the remaining bits must be zero padding.
inline std::vector<std::uint64_t> huffman_decode(std::span<const std::uint8_t> bits, std::size_t count,
                                                 const HuffmanTable& table) {
  std::vector<std::uint64_t> out;
  if (count == 0) {
    if (!bits.empty()) throw CorruptError("dangling bits in empty Huffman stream", 0);
    return out;
  }
  if (table.empty()) throw CorruptError("empty Huffman table for nonempty stream", 0);
  if (count > bits.size() * 8) throw CorruptError("Huffman stream shorter than its symbol count", bits.size());
  out.reserve(count);
  BitReader in(bits);
  const HuffmanDecoder dec(table);
  for (std::size_t i = 0; i < count; ++i) out.push_back(dec.next(in));
  in.expect_padding();
  return out;
}

/// Empirical zeroth-order entropy in bits per symbol.
inline double empirical_entropy(std::span<const std::uint64_t> stream) {
  if (stream.empty()) return 0.0;
  std::map<std::uint64_t, std::uint64_t> freq;
  for (auto s : stream) ++freq[s];
  double h = 0.0;
  const double n = static_cast<double>(stream.size());
  for (const auto& [s, f] : freq) {
    const double p = static_cast<double>(f) / n;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace secg
