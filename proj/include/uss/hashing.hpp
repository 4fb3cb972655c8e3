#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "uss/bits.hpp"

namespace uss {

/// Identifies a signature key across the network: the recipient the sender
/// originally issued it to, and its slot within that recipient's N k keys.
struct KeyId {
  std::uint32_t origin = 0;
  std::uint64_t slot = 0;

  friend auto operator<=>(const KeyId&, const KeyId&) = default;
};

/// One member of the affine family h(m) = low_t(multiplier * m) xor offset,
/// with multiplication in GF(2^a).
struct HashKey {
  BitString multiplier;  // a bits
  BitString offset;      // t bits

  friend bool operator==(const HashKey&, const HashKey&) = default;
};

struct Tag {
  BitString value;  // t bits

  friend bool operator==(const Tag&, const Tag&) = default;
};

/// Irreducible polynomial of the given degree with the smallest integer
/// encoding (bit i = coefficient of x^i) among those with a nonzero constant
/// term. Results are cached per degree; the cache is safe for concurrent use.
BitString find_irreducible(unsigned degree);

/// Rabin irreducibility test over GF(2).
bool is_irreducible(const BitString& poly);

/// GF(2^a) with the modulus from find_irreducible(a).
class BinaryField {
 public:
  explicit BinaryField(unsigned degree);

  unsigned degree() const { return degree_; }
  const BitString& modulus() const { return modulus_; }

  BitString mul(const BitString& x, const BitString& y) const;

 private:
  unsigned degree_;
  BitString modulus_;
  std::uint64_t low_modulus_ = 0;  // modulus without x^a, valid when degree <= 64
};

constexpr unsigned kMaxFieldDegree = 4096;

BitString gf_mul(const BitString& x, const BitString& y, unsigned degree);

Tag make_tag(const BinaryField& field, const HashKey& key, const BitString& message,
             unsigned t);
Tag make_tag(const HashKey& key, const BitString& message, unsigned t);

using KeyedHash = std::pair<KeyId, HashKey>;
using KeyedTag = std::pair<KeyId, Tag>;

/// Tags for every key, ordered canonically by KeyId (origin, then slot).
/// Throws std::invalid_argument on duplicate KeyIds.
std::vector<KeyedTag> batch_tags(std::span<const KeyedHash> keys,
                                 const BitString& message, unsigned t);

/// Slot identifiers travel as fixed-width unsigned integers.
BitString encode_slot(std::uint64_t slot, std::uint32_t width);

}  // namespace uss
