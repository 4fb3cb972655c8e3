#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "uss/bits.hpp"
#include "uss/secparams.hpp"

namespace uss {

/// User 0 is the sender; recipient r (0-based) is user r + 1.
using UserId = std::uint32_t;
using LinkKey = std::pair<UserId, UserId>;  // (low, high)

inline constexpr UserId kSenderId = 0;
inline UserId recipient_user(std::uint32_t recipient) { return recipient + 1; }

LinkKey make_link_key(UserId x, UserId y);

struct LinkSpec {
  UserId a = 0;
  UserId b = 0;
  double rate_bps = 0.0;
  double flip_prob = 0.0;
};

struct NetworkConfig {
  std::uint32_t users = 8;  // sender + N recipients
  double default_rate_bps = 1000.0;
  double default_flip_prob = 0.0;
  std::vector<LinkSpec> links;  // per-pair overrides
  std::uint64_t seed = 0;

  double rate(UserId x, UserId y) const;
  double flip_prob(UserId x, UserId y) const;

  /// Throws ParameterError on bad counts, rates, probabilities, or links.
  void validate() const;

  /// Uniform network; `sender_flip_prob` applies to every sender link.
  static NetworkConfig uniform(std::uint32_t users, double rate_bps, std::uint64_t seed,
                               double sender_flip_prob = 0.0);
  static NetworkConfig from_json(const std::string& text);
  static NetworkConfig load(const std::filesystem::path& path);
};

/// Shared secret pool of one link. The pool is an unbounded, seeded bit
/// stream addressed by position; each endpoint reads it through its own
/// cursor. The higher-numbered endpoint sees every bit flipped
/// independently with probability flip_prob. Consumption is the furthest
/// position either side has reached.
class LinkKeyStore {
 public:
  LinkKeyStore(UserId x, UserId y, double rate_bps, double flip_prob, std::uint64_t seed);

  UserId low() const { return low_; }
  UserId high() const { return high_; }
  UserId noisy_side() const { return high_; }
  double rate_bps() const { return rate_bps_; }
  double flip_prob() const { return flip_prob_; }

  /// Next n_bits of this endpoint's view of the pool.
  BitString draw_shared(std::size_t n_bits, UserId side);

  /// One-time-pad transfer from `from` to the other endpoint. Both sides
  /// draw |payload| fresh pad bits; returns what the receiver decrypts.
  BitString otp_transfer(const BitString& payload, UserId from);

  std::uint64_t consumed_bits() const;
  std::uint64_t cursor(UserId side) const;

  /// [begin, end) pool ranges handed to one-time pads, in issue order.
  const std::vector<std::pair<std::uint64_t, std::uint64_t>>& pad_ranges() const {
    return pad_ranges_;
  }

 private:
  BitString read(std::uint64_t pos, std::size_t n_bits, bool noisy) const;
  std::uint64_t& cursor_ref(UserId side);

  UserId low_;
  UserId high_;
  double rate_bps_;
  double flip_prob_;
  std::uint64_t pool_seed_;
  std::uint64_t flip_seed_;
  std::uint64_t flip_threshold_;
  bool flip_all_;
  std::uint64_t low_cursor_ = 0;
  std::uint64_t high_cursor_ = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pad_ranges_;
};

/// Fully connected set of link stores.
class Network {
 public:
  explicit Network(NetworkConfig config);

  const NetworkConfig& config() const { return config_; }
  std::uint32_t users() const { return config_.users; }

  LinkKeyStore& link(UserId x, UserId y);
  const LinkKeyStore& link(UserId x, UserId y) const;

  std::map<LinkKey, std::uint64_t> total_consumed() const;

 private:
  NetworkConfig config_;
  std::map<LinkKey, LinkKeyStore> links_;
};

struct TimeToReady {
  double seconds = 0.0;
  LinkKey binding_link{0, 0};
  std::uint64_t binding_bits = 0;
};

/// Bits the distribution stage takes from each link: N k (a + t) on sender
/// links, 2 k (a + t + id_bits) between recipients.
std::map<LinkKey, std::uint64_t> distribution_bits_per_link(const ProtocolParams& params);

/// Worst link time (bits / rate) for one distribution stage.
TimeToReady time_to_ready(const NetworkConfig& config, const ProtocolParams& params);

}  // namespace uss
