#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uss/bits.hpp"
#include "uss/hashing.hpp"
#include "uss/keystore.hpp"
#include "uss/secparams.hpp"

namespace uss {

/// The signer. Holds all N^2 k keys it issued, in canonical KeyId order, and
/// nothing about how recipients later partition them.
struct Sender {
  std::vector<KeyedHash> keys;
};

struct HeldKey {
  KeyId id;
  HashKey key;
};

struct Recipient {
  std::uint32_t index = 0;
  /// The N k keys received from the sender, by slot. Origin is `index`.
  std::vector<HashKey> issued;
  /// Private randomness for the sharing split.
  std::uint64_t partition_seed = 0;
  /// After sharing: groups[g] holds the k keys contributed by recipient g
  /// (groups[index] is the kept set).
  std::vector<std::vector<HeldKey>> groups;
};

struct Distribution {
  Sender sender;
  std::vector<Recipient> recipients;
};

struct Signature {
  BitString message;
  std::vector<Tag> tags;  // N^2 k tags, canonical KeyId order
};

struct VerificationReport {
  int level = 0;
  std::vector<std::uint64_t> mismatches;  // per group (origin recipient)
  std::vector<double> mismatch_fraction;
  std::uint32_t tests_passed = 0;
  bool accepted = false;
};

/// Preparation step: the sender draws N k keys of a + t bits from each
/// sender link. Partition seeds derive from `protocol_seed`.
Distribution prepare(Network& network, const ProtocolParams& params,
                     std::uint64_t protocol_seed);

/// Sharing step: each recipient splits its N k keys uniformly at random
/// into N sets of k, keeps one, and sends each other set (slot id + key)
/// over the one-time-pad channel to a distinct recipient.
void share(std::vector<Recipient>& recipients, Network& network,
           const ProtocolParams& params);

Signature sign(const Sender& sender, const BitString& message, const ProtocolParams& params);

/// Per-group mismatch counts, independent of the level.
std::vector<std::uint64_t> count_mismatches(const Recipient& recipient,
                                            const Signature& signature,
                                            const ProtocolParams& params);

/// Applies the level-l thresholds to precomputed mismatch counts.
VerificationReport evaluate_level(std::span<const std::uint64_t> mismatches, int level,
                                  const ProtocolParams& params);

VerificationReport verify(const Recipient& recipient, const Signature& signature, int level,
                          const ProtocolParams& params);

/// Verifies along a forwarding chain at start_level, start_level - 1, ...
std::vector<VerificationReport> forward_chain(std::span<const Recipient* const> chain,
                                              const Signature& signature, int start_level,
                                              const ProtocolParams& params);

/// Byte layout (all integers big-endian):
///   u32 a | u32 t | u32 tag count | ceil(a/8) message bytes |
///   tags packed t bits each, MSB first, zero-padded to a byte boundary.
std::vector<std::uint8_t> serialize_signature(const Signature& signature);
Signature deserialize_signature(std::span<const std::uint8_t> bytes);

}  // namespace uss
