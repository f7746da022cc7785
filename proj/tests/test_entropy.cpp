#include <gtest/gtest.h>

#include <random>

#include "model_generators.hpp"
#include "secg/entropy.hpp"

using namespace secg;

TEST(Huffman, SingleSymbolGetsOneBit) {
  const std::vector<std::uint64_t> s(100, 42);
  const auto e = huffman_encode(s);
  EXPECT_EQ(e.table.length(42), 1);
  EXPECT_LE(e.bit_count, 100U);
  EXPECT_EQ(huffman_decode(e.bits, s.size(), e.table), s);
}

TEST(Huffman, MajoritySymbolIsShortest) {
  const std::vector<std::uint64_t> s{0, 0, 0, 1};
  const auto e = huffman_encode(s);
  EXPECT_EQ(e.table.length(0), 1);
  EXPECT_EQ(e.table.code(0), 0U);
  EXPECT_EQ(huffman_decode(e.bits, s.size(), e.table), s);
}

TEST(Huffman, RandomStreamsRoundTrip) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 10000; ++i) {
    const auto s = secg::testing::random_stream(rng);
    const auto e = huffman_encode(s);
    ASSERT_EQ(huffman_decode(e.bits, s.size(), e.table), s) << "case " << i;
  }
}

TEST(Huffman, CompleteCodeAndCanonicalOrder) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto s = secg::testing::random_stream(rng);
    const auto t = huffman_encode(s).table;
    if (t.entries().size() > 1) { EXPECT_EQ(t.kraft_numerator(), std::uint64_t{1} << kMaxHuffmanLength); }
    // (length, symbol) order gives consecutive codes.
    std::vector<HuffmanTable::Entry> e(t.entries().begin(), t.entries().end());
    std::sort(e.begin(), e.end(), [](auto& a, auto& b) { return a.length != b.length ? a.length < b.length : a.symbol < b.symbol; });
    for (std::size_t k = 1; k < e.size(); ++k) {
      const auto prev = t.code(e[k - 1].symbol) + 1;
      EXPECT_EQ(t.code(e[k].symbol), prev << (e[k].length - e[k - 1].length));
    }
  }
}

TEST(Huffman, SizeWithinEntropyBound) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    const auto s = secg::testing::random_stream(rng);
    const auto e = huffman_encode(s);
    const double bound = empirical_entropy(s) * static_cast<double>(s.size()) + static_cast<double>(s.size());
    EXPECT_LE(static_cast<double>(e.bit_count), bound + 1e-9);
  }
}

TEST(Huffman, DeterministicBits) {
  std::mt19937_64 rng(5);
  const auto s = secg::testing::random_stream(rng);
  const auto a = huffman_encode(s);
  const auto b = huffman_encode(s);
  EXPECT_EQ(a.bits, b.bits);
  EXPECT_EQ(a.table, b.table);
}

TEST(Huffman, TableSerializationRoundTrip) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 1000; ++i) {
    const auto t = huffman_encode(secg::testing::random_stream(rng)).table;
    ByteWriter w;
    t.serialize(w);
    ByteReader r(w.data());
    EXPECT_EQ(HuffmanTable::deserialize(r), t);
    EXPECT_TRUE(r.done());
  }
}

// Pathological frequencies (Fibonacci) that would exceed the length cap.
TEST(Huffman, LengthsAreCapped) {
  std::map<std::uint64_t, std::uint64_t> freq;
  std::uint64_t a = 1, b = 1;
  for (std::uint64_t s = 0; s < 80; ++s) {
    freq[s] = a;
    const auto c = a + b;
    a = b;
    b = c > (std::uint64_t{1} << 62) ? (std::uint64_t{1} << 62) : c;
  }
  const auto t = HuffmanTable::from_frequencies(freq);
  for (const auto& e : t.entries()) EXPECT_LE(e.length, kMaxHuffmanLength);
  EXPECT_EQ(t.kraft_numerator(), std::uint64_t{1} << kMaxHuffmanLength);
}

TEST(Huffman, InvalidPrefixAndDanglingBitsAreCorrupt) {
  // Lengths {1, 2}: codes 0 and 10; prefix 11 is unused.
  const HuffmanTable t({{5, 1}, {9, 2}});
  const std::vector<std::uint8_t> bad{0b11000000};
  EXPECT_THROW(huffman_decode(bad, 1, t), CorruptError);
  const std::vector<std::uint8_t> dangling{0b00000000, 0b00000000};
  EXPECT_THROW(huffman_decode(dangling, 2, t), CorruptError);
  const std::vector<std::uint8_t> padding{0b00000001};
  EXPECT_THROW(huffman_decode(padding, 2, t), CorruptError);
  const std::vector<std::uint8_t> ok{0b01000000};
  EXPECT_EQ(huffman_decode(ok, 2, t), (std::vector<std::uint64_t>{5, 9}));
}

TEST(Huffman, InvalidTablesAreRejected) {
  EXPECT_THROW(HuffmanTable({{1, 1}, {2, 1}, {3, 1}}), ConfigError);  // Kraft > 1
  EXPECT_THROW(HuffmanTable({{1, 0}}), ConfigError);
  EXPECT_THROW(HuffmanTable({{1, 1}, {1, 2}}), ConfigError);
  ByteWriter w;
  w.varint(3);
  w.u8(1);
  w.varint(3);  // three 1-bit codes
  ByteReader r(w.data());
  EXPECT_THROW(HuffmanTable::deserialize(r), CorruptError);
}
