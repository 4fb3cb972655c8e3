#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace uss {

/// Fixed-length bit string with integer semantics: bit i is the coefficient
/// of 2^i (or x^i when read as a polynomial over GF(2)). Bits above size()
/// are always zero.
///
/// External representations (to_binary, to_bytes) are big-endian, most
/// significant bit first.
class BitString {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  BitString() = default;
  explicit BitString(std::size_t size);

  static BitString from_uint(std::uint64_t value, std::size_t size);
  /// Parses a string of '0'/'1', most significant bit first.
  static BitString from_binary(std::string_view msb_first);
  /// Inverse of to_bytes(): ceil(size/8) bytes holding the value big-endian.
  static BitString from_bytes(std::span<const std::uint8_t> bytes,
                              std::size_t size);
  static BitString from_words(std::span<const Word> words, std::size_t size);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool get(std::size_t i) const {
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
  }
  void set(std::size_t i, bool value);
  void flip(std::size_t i) { words_[i / kWordBits] ^= Word{1} << (i % kWordBits); }

  /// Low 64 bits of the value.
  std::uint64_t to_uint() const { return words_.empty() ? 0 : words_[0]; }

  /// Bits [pos, pos + len) as a new string of length len.
  BitString slice(std::size_t pos, std::size_t len) const;
  /// Appends `other` above the current most significant bit.
  void append(const BitString& other);
  void append_uint(std::uint64_t value, std::size_t width);
  /// Reads `width` (≤ 64) bits starting at `pos`.
  std::uint64_t read_uint(std::size_t pos, std::size_t width) const;

  /// Keeps the low `new_size` bits (or zero-extends).
  void resize(std::size_t new_size);

  BitString& operator^=(const BitString& other);
  friend BitString operator^(BitString lhs, const BitString& rhs) {
    lhs ^= rhs;
    return lhs;
  }

  std::size_t popcount() const;
  bool is_zero() const;
  /// Index of the highest set bit, or -1 for zero.
  long degree() const;

  std::span<const Word> words() const { return {words_.data(), words_.size()}; }
  std::span<Word> mutable_words() { return {words_.data(), words_.size()}; }

  std::string to_binary() const;
  std::vector<std::uint8_t> to_bytes() const;

  friend bool operator==(const BitString& lhs, const BitString& rhs) {
    return lhs.size_ == rhs.size_ && lhs.words_ == rhs.words_;
  }

 private:
  void clear_padding();

  std::size_t size_ = 0;
  boost::container::small_vector<Word, 2> words_;
};

std::size_t hamming_distance(const BitString& lhs, const BitString& rhs);

inline std::size_t words_for(std::size_t bits) {
  return (bits + BitString::kWordBits - 1) / BitString::kWordBits;
}

}  // namespace uss
