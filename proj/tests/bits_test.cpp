#include <gtest/gtest.h>

#include "uss/bits.hpp"

using uss::BitString;

TEST(BitString, BinaryRoundTrip) {
  auto b = BitString::from_binary("1011001");
  EXPECT_EQ(b.size(), 7U);
  EXPECT_EQ(b.to_uint(), 0b1011001U);
  EXPECT_EQ(b.to_binary(), "1011001");
  EXPECT_TRUE(b.get(0));
  EXPECT_FALSE(b.get(1));
  EXPECT_THROW(BitString::from_binary("10x"), std::invalid_argument);
}

TEST(BitString, BytesAreBigEndian) {
  auto b = BitString::from_uint(0x1ABC, 13);
  auto bytes = b.to_bytes();
  ASSERT_EQ(bytes.size(), 2U);
  EXPECT_EQ(bytes[0], 0x1A);
  EXPECT_EQ(bytes[1], 0xBC);
  EXPECT_EQ(BitString::from_bytes(bytes, 13), b);
}

TEST(BitString, FromUintMasksHighBits) {
  auto b = BitString::from_uint(0xFF, 4);
  EXPECT_EQ(b.to_uint(), 0xFU);
  EXPECT_EQ(b, BitString::from_binary("1111"));
}

TEST(BitString, SliceAndAppendAcrossWords) {
  BitString acc;
  for (int i = 0; i < 5; ++i) acc.append_uint(0x5A5A5A5A5A5A5A5AULL ^ i, 37);
  EXPECT_EQ(acc.size(), 185U);
  for (int i = 0; i < 5; ++i) {
    std::uint64_t want = (0x5A5A5A5A5A5A5A5AULL ^ i) & ((1ULL << 37) - 1);
    EXPECT_EQ(acc.read_uint(37 * i, 37), want);
    EXPECT_EQ(acc.slice(37 * i, 37).to_uint(), want);
  }
}

TEST(BitString, XorPopcountDistance) {
  auto x = BitString::from_binary("110011");
  auto y = BitString::from_binary("101010");
  EXPECT_EQ((x ^ y).to_binary(), "011001");
  EXPECT_EQ(hamming_distance(x, y), 3U);
  EXPECT_EQ(x.popcount(), 4U);
  EXPECT_THROW(x ^= BitString(5), std::invalid_argument);
}

TEST(BitString, DegreeAndResize) {
  BitString z(130);
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.degree(), -1);
  z.set(129, true);
  EXPECT_EQ(z.degree(), 129);
  z.resize(100);
  EXPECT_TRUE(z.is_zero());
  z.resize(140);
  EXPECT_EQ(z.size(), 140U);
}
