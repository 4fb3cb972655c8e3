#include "uss/protocol.hpp"

#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "uss/errors.hpp"
#include "uss/rng.hpp"

namespace uss {

namespace {

constexpr std::uint64_t kPartitionLabel = 0x7061727469;  // "parti"

HashKey split_key(const BitString& bits, std::size_t pos, std::uint32_t a, std::uint32_t t) {
  return HashKey{bits.slice(pos, a), bits.slice(pos + a, t)};
}

void check_message(const BitString& message, const ProtocolParams& params) {
  if (message.size() != params.msg_len_bits) {
    throw std::invalid_argument(fmt::format("message must be {} bits wide (got {})",
                                            params.msg_len_bits, message.size()));
  }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t pos) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | in[pos + i];
  return v;
}

}  // namespace

Distribution prepare(Network& network, const ProtocolParams& params,
                     std::uint64_t protocol_seed) {
  params.validate();
  const std::uint32_t n = params.n_recipients;
  if (network.users() < n + 1) {
    throw ParameterError("users", fmt::format("network has {} users but N = {} needs {}",
                                              network.users(), n, n + 1));
  }
  const std::uint64_t per_recipient = params.keys_per_recipient();
  const std::uint64_t key_bits = params.key_bits();
  const std::uint32_t a = params.msg_len_bits;
  const std::uint32_t t = params.tag_len_bits;

  Distribution d;
  d.sender.keys.reserve(params.total_keys());
  d.recipients.resize(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    LinkKeyStore& link = network.link(kSenderId, recipient_user(r));
    const std::size_t bits = per_recipient * key_bits;
    BitString sender_view = link.draw_shared(bits, kSenderId);
    BitString recipient_view = link.draw_shared(bits, recipient_user(r));

    Recipient& rec = d.recipients[r];
    rec.index = r;
    rec.partition_seed = derive_seed(protocol_seed, {kPartitionLabel, r});
    rec.issued.reserve(per_recipient);
    for (std::uint64_t slot = 0; slot < per_recipient; ++slot) {
      d.sender.keys.emplace_back(KeyId{r, slot}, split_key(sender_view, slot * key_bits, a, t));
      rec.issued.push_back(split_key(recipient_view, slot * key_bits, a, t));
    }
  }
  return d;
}

void share(std::vector<Recipient>& recipients, Network& network,
           const ProtocolParams& params) {
  const std::uint32_t n = params.n_recipients;
  const std::uint64_t k = params.k;
  const std::uint64_t per_recipient = params.keys_per_recipient();
  const std::uint32_t ids = id_bits(n, k);
  const std::uint32_t a = params.msg_len_bits;
  const std::uint32_t t = params.tag_len_bits;
  const std::uint64_t record_bits = ids + params.key_bits();

  if (recipients.size() != n) {
    throw std::invalid_argument(
        fmt::format("expected {} recipients, got {}", n, recipients.size()));
  }
  for (const auto& rec : recipients) {
    if (rec.issued.size() != per_recipient) {
      throw std::invalid_argument(
          fmt::format("recipient {} does not hold {} issued keys; run prepare first",
                      rec.index, per_recipient));
    }
  }
  for (auto& rec : recipients) {
    rec.groups.assign(n, {});
    for (auto& g : rec.groups) g.reserve(k);
  }

  for (std::uint32_t r = 0; r < n; ++r) {
    Recipient& origin = recipients[r];
    std::vector<std::uint64_t> slots(per_recipient);
    std::iota(slots.begin(), slots.end(), std::uint64_t{0});
    Rng rng(origin.partition_seed);
    shuffle(slots.begin(), slots.end(), rng);

    for (std::uint32_t j = 0; j < n; ++j) {
      std::span<const std::uint64_t> chunk(slots.data() + j * k, k);
      if (j == r) {
        for (std::uint64_t slot : chunk) {
          origin.groups[r].push_back({KeyId{r, slot}, origin.issued[slot]});
        }
        continue;
      }
      BitString payload;
      for (std::uint64_t slot : chunk) {
        payload.append(encode_slot(slot, ids));
        payload.append(origin.issued[slot].multiplier);
        payload.append(origin.issued[slot].offset);
      }
      BitString received = network.link(recipient_user(r), recipient_user(j))
                               .otp_transfer(payload, recipient_user(r));
      auto& group = recipients[j].groups[r];
      for (std::uint64_t i = 0; i < k; ++i) {
        const std::size_t base = i * record_bits;
        std::uint64_t slot = received.read_uint(base, ids);
        group.push_back({KeyId{r, slot}, split_key(received, base + ids, a, t)});
      }
    }
  }
}

Signature sign(const Sender& sender, const BitString& message, const ProtocolParams& params) {
  check_message(message, params);
  if (sender.keys.size() != params.total_keys()) {
    throw std::invalid_argument(fmt::format("sender holds {} keys, expected N^2 k = {}",
                                            sender.keys.size(), params.total_keys()));
  }
  Signature sig;
  sig.message = message;
  auto tagged = batch_tags(sender.keys, message, params.tag_len_bits);
  sig.tags.reserve(tagged.size());
  for (auto& [id, tag] : tagged) sig.tags.push_back(std::move(tag));
  return sig;
}

std::vector<std::uint64_t> count_mismatches(const Recipient& recipient,
                                            const Signature& signature,
                                            const ProtocolParams& params) {
  check_message(signature.message, params);
  const std::uint32_t n = params.n_recipients;
  const std::uint64_t per_recipient = params.keys_per_recipient();
  if (signature.tags.size() != params.total_keys()) {
    throw std::invalid_argument(fmt::format("malformed signature: {} tags, expected {}",
                                            signature.tags.size(), params.total_keys()));
  }
  if (recipient.groups.size() != n) {
    throw std::invalid_argument(
        fmt::format("recipient {} has not completed sharing", recipient.index));
  }
  BinaryField field(params.msg_len_bits);
  std::vector<std::uint64_t> mismatches(n, 0);
  for (std::uint32_t g = 0; g < n; ++g) {
    for (const HeldKey& held : recipient.groups[g]) {
      // An id corrupted in transit points outside the issued range.
      if (held.id.origin >= n || held.id.slot >= per_recipient) {
        ++mismatches[g];
        continue;
      }
      const Tag& claimed = signature.tags[held.id.origin * per_recipient + held.id.slot];
      if (make_tag(field, held.key, signature.message, params.tag_len_bits) != claimed) {
        ++mismatches[g];
      }
    }
  }
  return mismatches;
}

VerificationReport evaluate_level(std::span<const std::uint64_t> mismatches, int level,
                                  const ProtocolParams& params) {
  if (level < -1 || level > params.l_max) {
    throw ParameterError("level", fmt::format("must lie in [-1, {}], got {}", params.l_max,
                                              level));
  }
  if (mismatches.size() != params.n_recipients) {
    throw std::invalid_argument("need one mismatch count per group");
  }
  const double s = params.s(level);
  const double k = static_cast<double>(params.k);
  VerificationReport report;
  report.level = level;
  report.mismatches.assign(mismatches.begin(), mismatches.end());
  for (std::uint64_t m : mismatches) {
    report.mismatch_fraction.push_back(static_cast<double>(m) / k);
    if (static_cast<double>(m) < s * k) ++report.tests_passed;
  }
  report.accepted = static_cast<double>(report.tests_passed) /
                        static_cast<double>(params.n_recipients) >
                    params.delta(level);
  return report;
}

VerificationReport verify(const Recipient& recipient, const Signature& signature, int level,
                          const ProtocolParams& params) {
  if (level < -1 || level > params.l_max) {
    throw ParameterError("level", fmt::format("must lie in [-1, {}], got {}", params.l_max,
                                              level));
  }
  return evaluate_level(count_mismatches(recipient, signature, params), level, params);
}

std::vector<VerificationReport> forward_chain(std::span<const Recipient* const> chain,
                                              const Signature& signature, int start_level,
                                              const ProtocolParams& params) {
  if (start_level < -1 || start_level > params.l_max) {
    throw ParameterError("level", fmt::format("start level must lie in [-1, {}]",
                                              params.l_max));
  }
  if (chain.size() > static_cast<std::size_t>(start_level + 2)) {
    throw std::invalid_argument(
        fmt::format("chain of {} recipients exceeds the {} levels from {} down to -1",
                    chain.size(), start_level + 2, start_level));
  }
  std::vector<VerificationReport> reports;
  int level = start_level;
  for (const Recipient* rec : chain) {
    reports.push_back(verify(*rec, signature, level, params));
    --level;
  }
  return reports;
}

std::vector<std::uint8_t> serialize_signature(const Signature& signature) {
  const std::uint32_t t =
      signature.tags.empty() ? 0 : static_cast<std::uint32_t>(signature.tags[0].value.size());
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(signature.message.size()));
  put_u32(out, t);
  put_u32(out, static_cast<std::uint32_t>(signature.tags.size()));
  auto msg = signature.message.to_bytes();
  out.insert(out.end(), msg.begin(), msg.end());

  std::uint8_t acc = 0;
  int filled = 0;
  for (const Tag& tag : signature.tags) {
    if (tag.value.size() != t) throw std::invalid_argument("tags of unequal length");
    for (std::size_t i = t; i-- > 0;) {
      acc = static_cast<std::uint8_t>((acc << 1) | (tag.value.get(i) ? 1 : 0));
      if (++filled == 8) {
        out.push_back(acc);
        acc = 0;
        filled = 0;
      }
    }
  }
  if (filled != 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - filled)));
  return out;
}

Signature deserialize_signature(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw std::invalid_argument("signature header truncated");
  const std::uint32_t a = get_u32(bytes, 0);
  const std::uint32_t t = get_u32(bytes, 4);
  const std::uint32_t count = get_u32(bytes, 8);
  const std::size_t msg_bytes = (a + 7) / 8;
  const std::uint64_t tag_bits = std::uint64_t{t} * count;
  const std::size_t expected = 12 + msg_bytes + (tag_bits + 7) / 8;
  if (bytes.size() != expected) {
    throw std::invalid_argument(
        fmt::format("signature is {} bytes, layout requires {}", bytes.size(), expected));
  }
  if (count > 0 && t == 0) throw std::invalid_argument("zero-width tags");
  Signature sig;
  sig.message = BitString::from_bytes(bytes.subspan(12, msg_bytes), a);
  auto body = bytes.subspan(12 + msg_bytes);
  std::uint64_t pos = 0;
  sig.tags.reserve(count);
  for (std::uint32_t c = 0; c < count; ++c) {
    BitString value(t);
    for (std::size_t i = t; i-- > 0; ++pos) {
      if ((body[pos / 8] >> (7 - pos % 8)) & 1U) value.set(i, true);
    }
    sig.tags.push_back(Tag{std::move(value)});
  }
  return sig;
}

}  // namespace uss
