#include "uss/hashing.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <stdexcept>

#include <fmt/format.h>

#include "uss/errors.hpp"

namespace uss {

namespace {

// Polynomials over GF(2) as little-endian word vectors, trimmed of
// high zero words.
using Words = std::vector<std::uint64_t>;
constexpr std::size_t kW = 64;

void trim(Words& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

long deg(const Words& p) {
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] != 0) {
      return static_cast<long>(i * kW + kW - 1 -
                               static_cast<std::size_t>(std::countl_zero(p[i])));
    }
  }
  return -1;
}

bool bit(const Words& p, std::size_t i) {
  return i / kW < p.size() && ((p[i / kW] >> (i % kW)) & 1U);
}

// acc ^= src << shift
void xor_shifted(Words& acc, const Words& src, std::size_t shift) {
  if (src.empty()) return;
  std::size_t ws = shift / kW;
  std::size_t bs = shift % kW;
  std::size_t need = src.size() + ws + (bs ? 1 : 0);
  if (acc.size() < need) acc.resize(need, 0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    acc[i + ws] ^= src[i] << bs;
    if (bs) acc[i + ws + 1] ^= src[i] >> (kW - bs);
  }
}

Words clmul(const Words& x, const Words& y) {
  Words out;
  for (std::size_t w = 0; w < y.size(); ++w) {
    std::uint64_t v = y[w];
    while (v != 0) {
      auto b = static_cast<std::size_t>(std::countr_zero(v));
      xor_shifted(out, x, w * kW + b);
      v &= v - 1;
    }
  }
  trim(out);
  return out;
}

Words square(const Words& x) {
  Words out(x.size() * 2, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t b = 0; b < kW; ++b) {
      if ((x[i] >> b) & 1U) {
        std::size_t pos = 2 * (i * kW + b);
        out[pos / kW] |= std::uint64_t{1} << (pos % kW);
      }
    }
  }
  trim(out);
  return out;
}

Words shift_right(const Words& p, std::size_t n) {
  std::size_t ws = n / kW;
  std::size_t bs = n % kW;
  if (ws >= p.size()) return {};
  Words out(p.size() - ws, 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = p[i + ws] >> bs;
    if (bs && i + ws + 1 < p.size()) out[i] |= p[i + ws + 1] << (kW - bs);
  }
  trim(out);
  return out;
}

Words low_bits(const Words& p, std::size_t n) {
  Words out(p.begin(), p.begin() + static_cast<long>(std::min(p.size(), (n + kW - 1) / kW)));
  if (n % kW != 0 && out.size() == (n + kW - 1) / kW) {
    out.back() &= (std::uint64_t{1} << (n % kW)) - 1;
  }
  trim(out);
  return out;
}

// Schoolbook reduction, one leading bit at a time.
Words mod_generic(Words r, const Words& f) {
  long df = deg(f);
  for (long i = deg(r); i >= df; --i) {
    if (bit(r, static_cast<std::size_t>(i))) {
      xor_shifted(r, f, static_cast<std::size_t>(i - df));
    }
  }
  trim(r);
  return r;
}

// Reduction modulo f = x^n + g. When g has low degree the high part folds
// down with a handful of shifted xors per pass.
class Modulus {
 public:
  explicit Modulus(Words f) : f_(std::move(f)) {
    trim(f_);
    n_ = static_cast<std::size_t>(deg(f_));
    g_ = low_bits(f_, n_);
    sparse_ = deg(g_) < static_cast<long>(n_ / 2);
  }

  std::size_t degree() const { return n_; }
  const Words& poly() const { return f_; }

  Words reduce(Words r) const {
    trim(r);
    if (!sparse_) return mod_generic(std::move(r), f_);
    while (deg(r) >= static_cast<long>(n_)) {
      Words high = shift_right(r, n_);
      Words next = low_bits(r, n_);
      Words folded = clmul(high, g_);
      if (next.size() < folded.size()) next.resize(folded.size(), 0);
      for (std::size_t i = 0; i < folded.size(); ++i) next[i] ^= folded[i];
      trim(next);
      r = std::move(next);
    }
    return r;
  }

 private:
  Words f_;
  Words g_;
  std::size_t n_ = 0;
  bool sparse_ = false;
};

Words gcd(Words a, Words b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Words r = mod_generic(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

std::vector<std::size_t> prime_factors(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

Words to_words(const BitString& b) {
  Words w(b.words().begin(), b.words().end());
  trim(w);
  return w;
}

bool rabin_irreducible(const Modulus& f) {
  const std::size_t n = f.degree();
  if (n == 0) return false;
  const Words x = f.reduce(Words{2});
  std::vector<std::size_t> checkpoints;
  for (std::size_t p : prime_factors(n)) checkpoints.push_back(n / p);

  Words h = x;
  for (std::size_t i = 1; i <= n; ++i) {
    h = f.reduce(square(h));
    if (std::find(checkpoints.begin(), checkpoints.end(), i) != checkpoints.end()) {
      Words diff = h;
      if (diff.size() < x.size()) diff.resize(x.size(), 0);
      for (std::size_t j = 0; j < x.size(); ++j) diff[j] ^= x[j];
      trim(diff);
      if (deg(gcd(f.poly(), diff)) > 0) return false;
    }
  }
  return h == x;
}

__extension__ using u128 = unsigned __int128;

u128 clmul64(std::uint64_t x, std::uint64_t y) {
  u128 out = 0;
  while (y != 0) {
    auto b = std::countr_zero(y);
    out ^= static_cast<u128>(x) << b;
    y &= y - 1;
  }
  return out;
}

}  // namespace

bool is_irreducible(const BitString& poly) {
  Words w = to_words(poly);
  if (deg(w) < 1) return false;
  return rabin_irreducible(Modulus(std::move(w)));
}

BitString find_irreducible(unsigned degree) {
  if (degree < 1 || degree > kMaxFieldDegree) {
    throw ParameterError("a", fmt::format("field degree must lie in [1, {}]", kMaxFieldDegree));
  }
  static std::shared_mutex mutex;
  static std::map<unsigned, BitString> cache;
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(degree); it != cache.end()) return it->second;
  }

  BitString found;
  if (degree == 1) {
    found = BitString::from_uint(0b11, 2);
  } else {
    // f = x^degree + g with g odd; an even number of terms means x+1 | f.
    for (std::uint64_t g = 1;; g += 2) {
      if (degree < 64 && g >= (std::uint64_t{1} << degree)) {
        throw std::logic_error("no irreducible polynomial found");
      }
      if (std::popcount(g) % 2 != 0) continue;
      Words f{g};
      f.resize(degree / kW + 1, 0);
      f[degree / kW] |= std::uint64_t{1} << (degree % kW);
      Modulus m(f);
      if (rabin_irreducible(m)) {
        found = BitString::from_words(f, degree + 1);
        break;
      }
    }
  }

  std::unique_lock lock(mutex);
  return cache.emplace(degree, std::move(found)).first->second;
}

BinaryField::BinaryField(unsigned degree)
    : degree_(degree), modulus_(find_irreducible(degree)) {
  if (degree_ <= 64) low_modulus_ = modulus_.to_uint();
}

BitString BinaryField::mul(const BitString& x, const BitString& y) const {
  if (x.size() != degree_ || y.size() != degree_) {
    throw std::invalid_argument(
        fmt::format("field operands must be {} bits wide (got {} and {})", degree_,
                    x.size(), y.size()));
  }
  if (degree_ <= 64) {
    u128 prod = clmul64(x.to_uint(), y.to_uint());
    // low_modulus_ holds the low 64 coefficients; x^64 is implicit for degree 64.
    u128 mod = static_cast<u128>(low_modulus_);
    if (degree_ == 64) mod |= static_cast<u128>(1) << 64;
    for (int i = 2 * static_cast<int>(degree_) - 2; i >= static_cast<int>(degree_); --i) {
      if ((prod >> i) & 1U) prod ^= mod << (i - static_cast<int>(degree_));
    }
    return BitString::from_uint(static_cast<std::uint64_t>(prod), degree_);
  }
  Words product = clmul(to_words(x), to_words(y));
  Words reduced = mod_generic(std::move(product), to_words(modulus_));
  return BitString::from_words(reduced, degree_);
}

BitString gf_mul(const BitString& x, const BitString& y, unsigned degree) {
  return BinaryField(degree).mul(x, y);
}

Tag make_tag(const BinaryField& field, const HashKey& key, const BitString& message,
             unsigned t) {
  const unsigned a = field.degree();
  if (message.size() != a) {
    throw std::invalid_argument(
        fmt::format("message must be {} bits wide (got {})", a, message.size()));
  }
  if (t < 1 || t > a) {
    throw std::invalid_argument(fmt::format("tag length {} must lie in [1, {}]", t, a));
  }
  if (key.multiplier.size() != a || key.offset.size() != t) {
    throw std::invalid_argument("hash key width does not match (a, t)");
  }
  BitString product = field.mul(key.multiplier, message);
  product.resize(t);
  product ^= key.offset;
  return Tag{std::move(product)};
}

Tag make_tag(const HashKey& key, const BitString& message, unsigned t) {
  return make_tag(BinaryField(static_cast<unsigned>(message.size())), key, message, t);
}

std::vector<KeyedTag> batch_tags(std::span<const KeyedHash> keys, const BitString& message,
                                 unsigned t) {
  std::vector<KeyedTag> out;
  if (keys.empty()) return out;
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return keys[i].first < keys[j].first; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (keys[order[i]].first == keys[order[i - 1]].first) {
      const KeyId& id = keys[order[i]].first;
      throw std::invalid_argument(
          fmt::format("duplicate key id (origin {}, slot {})", id.origin, id.slot));
    }
  }
  BinaryField field(static_cast<unsigned>(message.size()));
  out.reserve(keys.size());
  for (std::size_t i : order) {
    out.emplace_back(keys[i].first, make_tag(field, keys[i].second, message, t));
  }
  return out;
}

BitString encode_slot(std::uint64_t slot, std::uint32_t width) {
  if (width < 64 && (slot >> width) != 0) {
    throw std::invalid_argument(fmt::format("slot {} does not fit in {} bits", slot, width));
  }
  return BitString::from_uint(slot, width);
}

}  // namespace uss
