#include "uss/bits.hpp"

#include <bit>
#include <stdexcept>

namespace uss {

BitString::BitString(std::size_t size) : size_(size), words_(words_for(size), 0) {}

BitString BitString::from_uint(std::uint64_t value, std::size_t size) {
  BitString out(size);
  if (size > 0) {
    out.words_[0] = value;
    out.clear_padding();
  }
  return out;
}

BitString BitString::from_binary(std::string_view msb_first) {
  BitString out(msb_first.size());
  for (std::size_t i = 0; i < msb_first.size(); ++i) {
    char c = msb_first[msb_first.size() - 1 - i];
    if (c != '0' && c != '1') {
      throw std::invalid_argument("bit string may only contain '0' and '1'");
    }
    out.set(i, c == '1');
  }
  return out;
}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes,
                                std::size_t size) {
  if (bytes.size() != (size + 7) / 8) {
    throw std::invalid_argument("byte count does not match bit length");
  }
  BitString out(size);
  // bytes are big-endian: the last byte carries bits 0..7
  for (std::size_t b = 0; b < bytes.size(); ++b) {
    std::size_t base = (bytes.size() - 1 - b) * 8;
    for (std::size_t j = 0; j < 8; ++j) {
      if ((bytes[b] >> j) & 1U) {
        if (base + j >= size) {
          throw std::invalid_argument("bits set beyond declared bit length");
        }
        out.set(base + j, true);
      }
    }
  }
  return out;
}

BitString BitString::from_words(std::span<const Word> words, std::size_t size) {
  BitString out(size);
  for (std::size_t i = 0; i < out.words_.size() && i < words.size(); ++i) {
    out.words_[i] = words[i];
  }
  out.clear_padding();
  return out;
}

void BitString::set(std::size_t i, bool value) {
  Word mask = Word{1} << (i % kWordBits);
  if (value) {
    words_[i / kWordBits] |= mask;
  } else {
    words_[i / kWordBits] &= ~mask;
  }
}

std::uint64_t BitString::read_uint(std::size_t pos, std::size_t width) const {
  if (width == 0) return 0;
  std::size_t w = pos / kWordBits;
  std::size_t off = pos % kWordBits;
  std::uint64_t v = words_[w] >> off;
  if (off != 0 && off + width > kWordBits && w + 1 < words_.size()) {
    v |= words_[w + 1] << (kWordBits - off);
  }
  if (width < kWordBits) v &= (Word{1} << width) - 1;
  return v;
}

BitString BitString::slice(std::size_t pos, std::size_t len) const {
  if (pos + len > size_) {
    throw std::out_of_range("slice exceeds bit string length");
  }
  BitString out(len);
  for (std::size_t i = 0; i < out.words_.size(); ++i) {
    std::size_t width = std::min(kWordBits, len - i * kWordBits);
    out.words_[i] = read_uint(pos + i * kWordBits, width);
  }
  return out;
}

void BitString::append(const BitString& other) {
  std::size_t old = size_;
  resize(size_ + other.size_);
  std::size_t w = old / kWordBits;
  std::size_t off = old % kWordBits;
  for (std::size_t i = 0; i < other.words_.size(); ++i) {
    Word v = other.words_[i];
    words_[w + i] |= v << off;
    if (off != 0 && w + i + 1 < words_.size()) {
      words_[w + i + 1] |= v >> (kWordBits - off);
    }
  }
}

void BitString::append_uint(std::uint64_t value, std::size_t width) {
  append(from_uint(value, width));
}

void BitString::resize(std::size_t new_size) {
  size_ = new_size;
  words_.resize(words_for(new_size), 0);
  clear_padding();
}

BitString& BitString::operator^=(const BitString& other) {
  if (other.size_ != size_) {
    throw std::invalid_argument("xor of bit strings with different lengths");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

std::size_t BitString::popcount() const {
  std::size_t n = 0;
  for (Word w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitString::is_zero() const {
  for (Word w : words_) {
    if (w != 0) return false;
  }
  return true;
}

long BitString::degree() const {
  for (std::size_t i = words_.size(); i-- > 0;) {
    if (words_[i] != 0) {
      return static_cast<long>(i * kWordBits + kWordBits - 1 -
                               static_cast<std::size_t>(std::countl_zero(words_[i])));
    }
  }
  return -1;
}

std::string BitString::to_binary() const {
  std::string out(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) out[size_ - 1 - i] = '1';
  }
  return out;
}

std::vector<std::uint8_t> BitString::to_bytes() const {
  std::size_t n = (size_ + 7) / 8;
  std::vector<std::uint8_t> out(n, 0);
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) out[n - 1 - i / 8] |= static_cast<std::uint8_t>(1U << (i % 8));
  }
  return out;
}

void BitString::clear_padding() {
  std::size_t rem = size_ % kWordBits;
  if (rem != 0 && !words_.empty()) {
    words_.back() &= (Word{1} << rem) - 1;
  }
}

std::size_t hamming_distance(const BitString& lhs, const BitString& rhs) {
  if (lhs.size() != rhs.size()) {
    throw std::invalid_argument("hamming distance of unequal lengths");
  }
  std::size_t n = 0;
  auto a = lhs.words();
  auto b = rhs.words();
  for (std::size_t i = 0; i < a.size(); ++i) {
    n += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
  }
  return n;
}

}  // namespace uss
