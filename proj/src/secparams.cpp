#include "uss/secparams.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "uss/errors.hpp"

namespace uss {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kGapTolerance = 1e-12;

double clamp_probability(double p) {
  if (std::isnan(p)) return 1.0;
  return std::clamp(p, 0.0, 1.0);
}

double exp_clamped(double log_p) {
  if (log_p == kNegInf) return 0.0;
  return clamp_probability(std::exp(log_p));
}

double log_add(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

double log_binomial(std::uint64_t n, std::uint64_t m) {
  auto nd = static_cast<double>(n);
  auto md = static_cast<double>(m);
  return std::lgamma(nd + 1.0) - std::lgamma(md + 1.0) - std::lgamma(nd - md + 1.0);
}

}  // namespace

std::string to_string(TailMode mode) {
  return mode == TailMode::kLiteral ? "literal" : "squared";
}

std::string to_string(CostMode mode) {
  return mode == CostMode::kLiteral ? "literal" : "accounting";
}

TailMode parse_tail_mode(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "squared") return TailMode::kSquared;
  if (lower == "literal") return TailMode::kLiteral;
  throw ParameterError("mode", "expected 'squared' or 'literal', got '" + text + "'");
}

void SLevelSpec::validate() const {
  if (!(eps1 > 0.0)) throw ParameterError("eps1", "must be > 0");
  if (!(eps2 > 0.0)) throw ParameterError("eps2", "must be > 0");
  if (!(eps1 + eps2 < 0.5)) throw ParameterError("eps1", "eps1 + eps2 must be < 1/2");
}

double ProtocolParams::s(int level) const {
  auto it = s_levels.find(level);
  if (it == s_levels.end()) {
    throw ParameterError("level", fmt::format("no s-level defined for level {}", level));
  }
  return it->second;
}

double ProtocolParams::delta(int level) const { return compute_delta(level, d_r); }

void ProtocolParams::validate() const {
  if (n_recipients < 2) throw ParameterError("n", "need at least 2 recipients");
  if (msg_len_bits < 1) throw ParameterError("a", "message length must be >= 1");
  if (tag_len_bits < 1) throw ParameterError("t", "tag length must be >= 1");
  if (tag_len_bits > msg_len_bits) {
    throw ParameterError("t", "tag length must not exceed the message length a");
  }
  if (l_max < 0) throw ParameterError("l_max", "must be >= 0");
  if (!(d_r >= 0.0 && d_r < 0.5)) throw ParameterError("d_r", "must lie in [0, 1/2)");
  if (!((l_max + 1) * d_r < 0.5)) {
    throw ParameterError("l_max", fmt::format("(l_max + 1) * d_R = {} is not < 1/2",
                                              (l_max + 1) * d_r));
  }
  if (k < 1) throw ParameterError("k", "must be >= 1");
  if (!(p_target > 0.0 && p_target < 1.0)) {
    throw ParameterError("p_target", "must lie in (0, 1)");
  }
  if (s_levels.size() != static_cast<std::size_t>(l_max) + 2 ||
      s_levels.begin()->first != -1 || s_levels.rbegin()->first != l_max) {
    throw ParameterError("s_levels", "must define exactly the levels -1..l_max");
  }
  double first_gap = -1.0;
  for (int l = l_max; l >= 0; --l) {
    double lo = s_levels.at(l);
    double hi = s_levels.at(l - 1);
    if (!(lo > 0.0 && hi < 0.5)) {
      throw ParameterError("s_levels", "every level must lie in (0, 1/2)");
    }
    if (!(hi > lo)) {
      throw ParameterError("s_levels", "must strictly increase as the level decreases");
    }
    double gap = hi - lo;
    if (first_gap < 0.0) {
      first_gap = gap;
    } else if (std::abs(gap - first_gap) > kGapTolerance) {
      throw ParameterError("s_levels", "gaps between consecutive levels must be equal");
    }
  }
}

double compute_dr(int l_max, std::uint32_t n) {
  if (n < 1) throw ParameterError("n", "must be >= 1");
  if (l_max < 0) throw ParameterError("l_max", "must be >= 0");
  double d = static_cast<double>(l_max) / static_cast<double>(n);
  if (d >= 0.5) {
    throw ParameterError("l_max", fmt::format("d_R = {}/{} >= 1/2; the protocol cannot "
                                              "be secure with a dishonest majority",
                                              l_max, n));
  }
  return d;
}

int compute_lmax(std::uint32_t n) {
  if (n < 2) throw ParameterError("n", "need at least 2 recipients");
  // l(l+1) < n/2  <=>  2 l (l+1) < n
  int l = 0;
  while (2ULL * static_cast<std::uint64_t>(l + 1) * static_cast<std::uint64_t>(l + 2) < n) {
    ++l;
  }
  return l;
}

SLevels make_s_levels(int l_max, const SLevelSpec& spec) {
  if (l_max < 0) throw ParameterError("l_max", "must be >= 0");
  spec.validate();
  double top = 0.5 - spec.eps2;
  double step = (top - spec.eps1) / static_cast<double>(l_max + 1);
  SLevels levels;
  levels[l_max] = spec.eps1;
  for (int l = l_max - 1; l >= 0; --l) {
    levels[l] = spec.eps1 + static_cast<double>(l_max - l) * step;
  }
  levels[-1] = top;
  return levels;
}

double compute_delta(int level, double d_r) {
  if (level < -1) throw ParameterError("level", "must be >= -1");
  double delta = 0.5 + static_cast<double>(level + 1) * d_r;
  if (delta > 1.0) {
    throw ParameterError("level", fmt::format("delta_{} = {} exceeds 1", level, delta));
  }
  return delta;
}

std::int64_t max_tolerated_mismatches(double s, std::uint64_t k) {
  double limit = s * static_cast<double>(k);
  auto m = static_cast<std::int64_t>(std::floor(limit));
  if (static_cast<double>(m) >= limit) --m;
  return m;
}

double log_tail_bound_pm(int level, std::uint64_t k, const SLevels& s_levels,
                         TailMode mode) {
  if (k < 1) throw ParameterError("k", "must be >= 1");
  auto lo = s_levels.find(level);
  auto hi = s_levels.find(level - 1);
  if (lo == s_levels.end() || hi == s_levels.end()) {
    throw ParameterError("level", fmt::format("levels {} and {} must both be defined",
                                              level, level - 1));
  }
  double gap = hi->second - lo->second;
  if (!(gap > 0.0)) {
    throw ParameterError("s_levels", fmt::format("s_{} must exceed s_{}", level - 1, level));
  }
  double rate = mode == TailMode::kLiteral ? gap : gap * gap;
  return -rate * static_cast<double>(k) / 2.0;
}

double tail_bound_pm(int level, std::uint64_t k, const SLevels& s_levels, TailMode mode) {
  return exp_clamped(log_tail_bound_pm(level, k, s_levels, mode));
}

double p_forge(std::uint32_t n, double d_r, double p_t) {
  double nn = static_cast<double>(n) * (1.0 - d_r);
  return clamp_probability(nn * nn * p_t);
}

std::uint64_t honest_pairs(std::uint32_t n, double d_r) {
  double honest = static_cast<double>(n) * (1.0 - d_r);
  // N(1 - d_R) is an integer whenever d_R = l_max / N; absorb rounding.
  auto h = static_cast<std::uint64_t>(std::floor(honest + 1e-9));
  return h < 2 ? 0 : h * (h - 1) / 2;
}

double guess_pass_probability(std::uint64_t k, std::uint32_t t, double s) {
  std::int64_t m_max = max_tolerated_mismatches(s, k);
  if (m_max < 0) return 0.0;
  m_max = std::min<std::int64_t>(m_max, static_cast<std::int64_t>(k));
  double log_hit = -static_cast<double>(t) * std::log(2.0);
  double log_miss = std::log1p(-std::exp(log_hit));
  // s < 1/2 <= 1 - 2^-t keeps m_max below the binomial mode, so terms shrink
  // monotonically as m decreases from m_max.
  double acc = kNegInf;
  for (std::int64_t m = m_max; m >= 0; --m) {
    auto mu = static_cast<std::uint64_t>(m);
    double term = log_binomial(k, mu) + static_cast<double>(mu) * log_miss +
                  static_cast<double>(k - mu) * log_hit;
    acc = log_add(acc, term);
    if (term < acc - 60.0) break;
  }
  return exp_clamped(acc);
}

namespace {

double log_nontransfer(int level, const ProtocolParams& params, TailMode mode,
                       std::uint64_t n_p, double* log_p_m) {
  double lpm = log_tail_bound_pm(level, params.k, params.s_levels, mode);
  if (log_p_m != nullptr) *log_p_m = lpm;
  if (n_p == 0) return kNegInf;
  double n = static_cast<double>(params.n_recipients);
  double prefactor = n * (params.delta(level) - params.d_r) + 1.0;
  return std::log(static_cast<double>(n_p)) + std::log(prefactor) + lpm;
}

}  // namespace

BoundReport p_nontransfer(int level, const ProtocolParams& params, TailMode mode) {
  if (level < 0 || level > params.l_max) {
    throw ParameterError("level", fmt::format("must lie in [0, {}]", params.l_max));
  }
  BoundReport r;
  r.level = level;
  r.n_p = honest_pairs(params.n_recipients, params.d_r);
  r.log_p_nontransfer = log_nontransfer(level, params, mode, r.n_p, &r.log_p_m);
  r.p_m = exp_clamped(r.log_p_m);
  r.p_nontransfer = exp_clamped(r.log_p_nontransfer);
  r.p_t = guess_pass_probability(params.k, params.tag_len_bits, params.s(level));
  r.p_forge = p_forge(params.n_recipients, params.d_r, r.p_t);
  return r;
}

std::uint64_t solve_k(double p_target, std::uint32_t n, int l_max,
                      const SLevelSpec& spec, TailMode mode) {
  if (!(p_target > 0.0 && p_target < 1.0)) {
    throw ParameterError("p_target", "must lie in (0, 1)");
  }
  ProtocolParams probe;
  probe.n_recipients = n;
  probe.l_max = l_max;
  probe.d_r = compute_dr(l_max, n);
  if (!((l_max + 1) * probe.d_r < 0.5)) {
    throw ParameterError("l_max", "(l_max + 1) d_R must be < 1/2");
  }
  probe.s_levels = make_s_levels(l_max, spec);
  const double log_target = std::log(p_target);
  const std::uint64_t n_p = honest_pairs(n, probe.d_r);

  auto meets = [&](std::uint64_t k) {
    probe.k = k;
    for (int l = 0; l <= l_max; ++l) {
      if (log_nontransfer(l, probe, mode, n_p, nullptr) > log_target) return false;
    }
    return true;
  };

  constexpr std::uint64_t kCeiling = std::uint64_t{1} << 32;
  if (!meets(kCeiling)) {
    throw ParameterError("p_target",
                         fmt::format("no k <= 2^32 reaches p_target = {}", p_target));
  }
  std::uint64_t lo = 1;
  std::uint64_t hi = kCeiling;
  if (meets(lo)) return lo;
  // invariant: !meets(lo) && meets(hi)
  while (hi - lo > 1) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    if (meets(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // Linear confirmation around the boundary.
  while (hi > 1 && meets(hi - 1)) --hi;
  while (!meets(hi)) ++hi;
  return hi;
}

std::uint32_t id_bits(std::uint64_t n, std::uint64_t k) {
  std::uint64_t keys = n * k;
  if (keys <= 1) return 1;
  return static_cast<std::uint32_t>(std::bit_width(keys - 1));
}

ConsumptionReport consumption(const ProtocolParams& params, CostMode mode) {
  const std::uint64_t n = params.n_recipients;
  const std::uint64_t k = params.k;
  const std::uint64_t a = params.msg_len_bits;
  ConsumptionReport r;
  r.mode = mode;
  r.id_bits = id_bits(n, k);
  if (mode == CostMode::kLiteral) {
    r.preparation_bits = n * n * k * a;
    r.sharing_bits = n * (n - 1) * (a + r.id_bits);
  } else {
    const std::uint64_t key = params.key_bits();
    r.preparation_bits = n * n * k * key;
    r.sharing_bits = n * (n - 1) * k * (key + r.id_bits);
  }
  r.total_bits = r.preparation_bits + r.sharing_bits;
  return r;
}

std::string consumption_csv_header() {
  return "n,k,a,t,mode,prep_bits,share_bits,total_bits,id_bits";
}

std::string consumption_csv_row(const ProtocolParams& params,
                                const ConsumptionReport& report) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", params.n_recipients, params.k,
                     params.msg_len_bits, params.tag_len_bits, to_string(report.mode),
                     report.preparation_bits, report.sharing_bits, report.total_bits,
                     report.id_bits);
}

ProtocolParams resolve_params(const ParamRequest& request) {
  if (request.n < 2) throw ParameterError("n", "need at least 2 recipients");
  if (request.a < 1) throw ParameterError("a", "message length must be >= 1");
  ProtocolParams p;
  p.n_recipients = request.n;
  p.msg_len_bits = request.a;
  p.tag_len_bits = request.t.value_or(std::min<std::uint32_t>(request.a, 32));
  p.l_max = request.l_max.value_or(compute_lmax(request.n));
  p.d_r = compute_dr(p.l_max, p.n_recipients);
  if (!((p.l_max + 1) * p.d_r < 0.5)) {
    throw ParameterError("l_max", fmt::format("l_max = {} violates (l_max + 1) d_R < 1/2 "
                                              "for n = {}",
                                              p.l_max, p.n_recipients));
  }
  p.s_levels = make_s_levels(p.l_max, request.levels);
  p.p_target = request.p_target;
  if (request.k) {
    p.k = *request.k;
  } else {
    p.k = solve_k(request.p_target, p.n_recipients, p.l_max, request.levels, request.mode);
  }
  p.validate();
  return p;
}

}  // namespace uss
