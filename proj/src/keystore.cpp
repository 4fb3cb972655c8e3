#include "uss/keystore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "uss/errors.hpp"
#include "uss/rng.hpp"

namespace uss {

namespace {

constexpr std::uint64_t kPoolLabel = 0x706f6f6c;  // "pool"
constexpr std::uint64_t kFlipLabel = 0x666c6970;  // "flip"

const LinkSpec* find_override(const std::vector<LinkSpec>& links, UserId x, UserId y) {
  LinkKey key = make_link_key(x, y);
  for (const auto& l : links) {
    if (make_link_key(l.a, l.b) == key) return &l;
  }
  return nullptr;
}

}  // namespace

LinkKey make_link_key(UserId x, UserId y) { return {std::min(x, y), std::max(x, y)}; }

double NetworkConfig::rate(UserId x, UserId y) const {
  const LinkSpec* l = find_override(links, x, y);
  return l != nullptr ? l->rate_bps : default_rate_bps;
}

double NetworkConfig::flip_prob(UserId x, UserId y) const {
  const LinkSpec* l = find_override(links, x, y);
  return l != nullptr ? l->flip_prob : default_flip_prob;
}

void NetworkConfig::validate() const {
  if (users < 3) throw ParameterError("users", "need a sender and at least 2 recipients");
  if (!(default_rate_bps > 0.0) || !std::isfinite(default_rate_bps)) {
    throw ParameterError("default_rate_bps", "must be a positive finite rate");
  }
  if (!(default_flip_prob >= 0.0 && default_flip_prob <= 1.0)) {
    throw ParameterError("default_flip_prob", "must lie in [0, 1]");
  }
  std::vector<LinkKey> seen;
  for (const auto& l : links) {
    if (l.a == l.b || l.a >= users || l.b >= users) {
      throw ParameterError("links", fmt::format("invalid link ({}, {}) for {} users", l.a,
                                                l.b, users));
    }
    LinkKey key = make_link_key(l.a, l.b);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw ParameterError("links", fmt::format("link ({}, {}) listed twice", l.a, l.b));
    }
    seen.push_back(key);
    if (!(l.rate_bps > 0.0) || !std::isfinite(l.rate_bps)) {
      throw ParameterError("rate_bps",
                           fmt::format("link ({}, {}) needs a positive rate", l.a, l.b));
    }
    if (!(l.flip_prob >= 0.0 && l.flip_prob <= 1.0)) {
      throw ParameterError("flip_prob",
                           fmt::format("link ({}, {}) flip_prob must lie in [0, 1]", l.a, l.b));
    }
  }
}

NetworkConfig NetworkConfig::uniform(std::uint32_t users, double rate_bps, std::uint64_t seed,
                                     double sender_flip_prob) {
  NetworkConfig c;
  c.users = users;
  c.default_rate_bps = rate_bps;
  c.seed = seed;
  if (sender_flip_prob != 0.0) {
    for (UserId r = 1; r < users; ++r) {
      c.links.push_back({kSenderId, r, rate_bps, sender_flip_prob});
    }
  }
  return c;
}

NetworkConfig NetworkConfig::from_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParameterError("config", "top level must be an object");

  NetworkConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "users") {
        c.users = value.get<std::uint32_t>();
      } else if (key == "default_rate_bps") {
        c.default_rate_bps = value.get<double>();
      } else if (key == "default_flip_prob") {
        c.default_flip_prob = value.get<double>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "links") {
        for (const auto& entry : value) {
          LinkSpec l;
          l.rate_bps = c.default_rate_bps;
          bool has_rate = false;
          for (const auto& [lk, lv] : entry.items()) {
            if (lk == "a") {
              l.a = lv.get<UserId>();
            } else if (lk == "b") {
              l.b = lv.get<UserId>();
            } else if (lk == "rate_bps") {
              l.rate_bps = lv.get<double>();
              has_rate = true;
            } else if (lk == "flip_prob") {
              l.flip_prob = lv.get<double>();
            } else {
              throw ParameterError(lk, "unknown link key");
            }
          }
          // rate defaults are resolved after the whole document is read
          if (!has_rate) l.rate_bps = std::numeric_limits<double>::quiet_NaN();
          c.links.push_back(l);
        }
      } else {
        throw ParameterError(key, "unknown config key");
      }
    }
  } catch (const json::exception& e) {
    throw ParameterError("config", std::string("wrong value type: ") + e.what());
  }
  for (auto& l : c.links) {
    if (std::isnan(l.rate_bps)) l.rate_bps = c.default_rate_bps;
  }
  c.validate();
  return c;
}

NetworkConfig NetworkConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

LinkKeyStore::LinkKeyStore(UserId x, UserId y, double rate_bps, double flip_prob,
                           std::uint64_t seed)
    : low_(std::min(x, y)),
      high_(std::max(x, y)),
      rate_bps_(rate_bps),
      flip_prob_(flip_prob),
      pool_seed_(derive_seed(seed, {kPoolLabel, low_, high_})),
      flip_seed_(derive_seed(seed, {kFlipLabel, low_, high_})),
      flip_threshold_(0),
      flip_all_(flip_prob >= 1.0) {
  if (x == y) throw ParameterError("links", "a link needs two distinct endpoints");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) {
    throw ParameterError("flip_prob", "must lie in [0, 1]");
  }
  if (!flip_all_ && flip_prob > 0.0) {
    flip_threshold_ = static_cast<std::uint64_t>(std::ldexp(flip_prob, 64));
  }
}

std::uint64_t& LinkKeyStore::cursor_ref(UserId side) {
  if (side == low_) return low_cursor_;
  if (side == high_) return high_cursor_;
  throw std::invalid_argument(
      fmt::format("user {} is not an endpoint of link ({}, {})", side, low_, high_));
}

std::uint64_t LinkKeyStore::cursor(UserId side) const {
  return const_cast<LinkKeyStore*>(this)->cursor_ref(side);
}

std::uint64_t LinkKeyStore::consumed_bits() const {
  return std::max(low_cursor_, high_cursor_);
}

BitString LinkKeyStore::read(std::uint64_t pos, std::size_t n_bits, bool noisy) const {
  BitString out(n_bits);
  auto words = out.mutable_words();
  auto pool_word = [this](std::uint64_t w) { return mix64(pool_seed_ ^ mix64(w)); };
  const std::uint64_t off = pos % 64;
  std::uint64_t w = pos / 64;
  for (std::size_t i = 0; i < words.size(); ++i, ++w) {
    std::uint64_t v = pool_word(w) >> off;
    if (off != 0) v |= pool_word(w + 1) << (64 - off);
    words[i] = v;
  }
  out.resize(n_bits);  // clears padding
  if (noisy && (flip_all_ || flip_threshold_ != 0)) {
    for (std::size_t i = 0; i < n_bits; ++i) {
      if (flip_all_ || mix64(flip_seed_ ^ mix64(pos + i)) < flip_threshold_) out.flip(i);
    }
  }
  return out;
}

BitString LinkKeyStore::draw_shared(std::size_t n_bits, UserId side) {
  if (n_bits < 1) throw std::invalid_argument("draw_shared needs n_bits >= 1");
  std::uint64_t& cur = cursor_ref(side);
  BitString bits = read(cur, n_bits, side == noisy_side());
  cur += n_bits;
  return bits;
}

BitString LinkKeyStore::otp_transfer(const BitString& payload, UserId from) {
  if (payload.empty()) throw std::invalid_argument("otp_transfer needs a non-empty payload");
  UserId to = from == low_ ? high_ : low_;
  cursor_ref(from);  // endpoint check
  // Pad starts past anything either side has touched.
  std::uint64_t start = consumed_bits();
  low_cursor_ = start;
  high_cursor_ = start;
  BitString ciphertext = payload ^ draw_shared(payload.size(), from);
  BitString plaintext = ciphertext ^ draw_shared(payload.size(), to);
  pad_ranges_.emplace_back(start, start + payload.size());
  return plaintext;
}

Network::Network(NetworkConfig config) : config_(std::move(config)) {
  config_.validate();
  for (UserId x = 0; x < config_.users; ++x) {
    for (UserId y = x + 1; y < config_.users; ++y) {
      links_.emplace(std::piecewise_construct, std::forward_as_tuple(x, y),
                     std::forward_as_tuple(x, y, config_.rate(x, y), config_.flip_prob(x, y),
                                           config_.seed));
    }
  }
}

LinkKeyStore& Network::link(UserId x, UserId y) {
  auto it = links_.find(make_link_key(x, y));
  if (it == links_.end()) {
    throw std::invalid_argument(fmt::format("no link between users {} and {}", x, y));
  }
  return it->second;
}

const LinkKeyStore& Network::link(UserId x, UserId y) const {
  return const_cast<Network*>(this)->link(x, y);
}

std::map<LinkKey, std::uint64_t> Network::total_consumed() const {
  std::map<LinkKey, std::uint64_t> out;
  for (const auto& [key, store] : links_) out[key] = store.consumed_bits();
  return out;
}

std::map<LinkKey, std::uint64_t> distribution_bits_per_link(const ProtocolParams& params) {
  const std::uint64_t n = params.n_recipients;
  const std::uint64_t key = params.key_bits();
  const std::uint64_t ids = id_bits(n, params.k);
  std::map<LinkKey, std::uint64_t> out;
  for (std::uint32_t r = 0; r < n; ++r) {
    out[make_link_key(kSenderId, recipient_user(r))] = n * params.k * key;
    for (std::uint32_t q = r + 1; q < n; ++q) {
      out[make_link_key(recipient_user(r), recipient_user(q))] = 2 * params.k * (key + ids);
    }
  }
  return out;
}

TimeToReady time_to_ready(const NetworkConfig& config, const ProtocolParams& params) {
  config.validate();
  if (config.users < params.n_recipients + 1) {
    throw ParameterError("users", fmt::format("network has {} users but N = {} needs {}",
                                              config.users, params.n_recipients,
                                              params.n_recipients + 1));
  }
  TimeToReady worst;
  worst.seconds = -1.0;
  for (const auto& [link, bits] : distribution_bits_per_link(params)) {
    double rate = config.rate(link.first, link.second);
    if (!(rate > 0.0)) {
      throw ParameterError("rate_bps", fmt::format("link ({}, {}) has zero rate",
                                                   link.first, link.second));
    }
    double seconds = static_cast<double>(bits) / rate;
    if (seconds > worst.seconds) {
      worst = {seconds, link, bits};
    }
  }
  return worst;
}

}  // namespace uss
