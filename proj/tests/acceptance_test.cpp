// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Reference values are computed here independently of the
// library where possible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "uss/hashing.hpp"
#include "uss/keystore.hpp"
#include "uss/protocol.hpp"
#include "uss/secparams.hpp"
#include "uss/simlab.hpp"

using namespace uss;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, std::string what) {
    if (!ok) pass = false;
    notes.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
  }
  void info(std::string what) { notes.push_back("info " + what); }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// s-levels and the non-transfer bound, written out from the definitions.
double oracle_s(int l, int lmax, double eps1, double eps2) {
  return eps1 + (lmax - l) * (0.5 - eps2 - eps1) / (lmax + 1);
}

double oracle_bound(int n, int lmax, int l, double k, bool squared) {
  double dr = double(lmax) / n;
  int honest = int(std::lround(n * (1 - dr)));
  double np = honest * (honest - 1) / 2.0;
  double gap = oracle_s(l - 1, lmax, 0.005, 0.001) - oracle_s(l, lmax, 0.005, 0.001);
  double rate = squared ? gap * gap : gap;
  return np * (n * (0.5 + (l + 1) * dr - dr) + 1) * std::exp(-rate * k / 2);
}

std::uint64_t oracle_scan_k(int n, int lmax, double target, bool squared) {
  for (std::uint64_t k = 1;; ++k) {
    bool ok = true;
    for (int l = 0; l <= lmax; ++l) {
      ok = ok && oracle_bound(n, lmax, l, double(k), squared) <= target;
    }
    if (ok) return k;
  }
}

std::uint32_t oracle_id_bits(std::uint64_t nk) {
  std::uint32_t b = 0;
  while ((std::uint64_t{1} << b) < nk) ++b;
  return std::max<std::uint32_t>(b, 1);
}

double binomial_cdf_below(std::uint64_t k, double p, double limit) {
  // P[Bin(k, p) < limit]
  double total = 0;
  for (std::uint64_t m = 0; double(m) < limit && m <= k; ++m) {
    total += std::exp(std::lgamma(k + 1.0) - std::lgamma(m + 1.0) - std::lgamma(k - m + 1.0) +
                      m * std::log(p) + (k - m) * std::log1p(-p));
  }
  return total;
}

ProtocolParams seven_users(std::uint64_t k) {
  ParamRequest req;
  req.k = k;
  return resolve_params(req);
}

// 1. Parameter reproduction.
Outcome parameters() {
  Outcome o;
  auto t0 = Clock::now();
  ParamRequest req;
  req.n = 7;
  req.l_max = 1;
  auto p = resolve_params(req);
  o.check(p.s(1) == 0.005 && std::abs(p.s(0) - 0.252) < 1e-15 && std::abs(p.s(-1) - 0.499) < 1e-15,
          fmt::format("s-levels {{{}, {}, {}}} == {{0.005, 0.252, 0.499}}", p.s(1), p.s(0),
                      p.s(-1)));
  o.check(p.d_r == 1.0 / 7.0, fmt::format("d_R = {} == 1/7", p.d_r));
  auto oracle = oracle_scan_k(7, 1, 1e-10, true);
  o.check(oracle == 900, fmt::format("linear-scan oracle k = {} (frozen 900)", oracle));
  o.check(p.k == 900, fmt::format("solve_k(1e-10, squared) = {}", p.k));
  double rel = std::abs(double(p.k) - 906.0) / 906.0;
  o.check(rel < 0.01, fmt::format("relative gap to reported 906: {:.4f} < 0.01", rel));
  double secs = seconds_since(t0);
  o.check(secs < 1.0, fmt::format("runtime {:.3f} s < 1 s", secs));
  return o;
}

// 2. Honest completeness.
Outcome completeness() {
  Outcome o;
  auto t0 = Clock::now();
  auto p = seven_users(906);
  int accepted = 0;
  int clean = 0;
  int chains = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto run = run_honest(p, seed, 0.0);
    for (const auto& r : run.reports) {
      accepted += r.accepted && r.level == 1;
      clean += std::all_of(r.mismatches.begin(), r.mismatches.end(),
                           [](std::uint64_t m) { return m == 0; });
    }
    chains += run.forward.size() == 2 && run.forward[0].level == 1 &&
              run.forward[1].level == 0 && run.forward[0].accepted && run.forward[1].accepted;
  }
  o.check(accepted == 700, fmt::format("{}/700 acceptances at level 1", accepted));
  o.check(clean == 700, fmt::format("{}/700 reports with zero mismatches", clean));
  o.check(chains == 100, fmt::format("{}/100 forward chains 1 -> 0 accepted", chains));
  double secs = seconds_since(t0);
  o.check(secs < 120.0, fmt::format("runtime {:.1f} s < 120 s", secs));
  return o;
}

// 3. Accounting equality.
Outcome accounting() {
  Outcome o;
  std::mt19937_64 rng(3);
  int exact = 0;
  int links_ok = 0;
  int links = 0;
  for (int i = 0; i < 50; ++i) {
    ParamRequest req;
    req.n = 2 + std::uint32_t(rng() % 7);
    req.a = 1 + std::uint32_t(rng() % 16);
    req.t = 1 + std::uint32_t(rng() % req.a);
    req.k = 1 + rng() % 1000;
    auto p = resolve_params(req);
    Network net(NetworkConfig::uniform(p.n_recipients + 1, 1000, rng()));
    auto dist = prepare(net, p, rng());
    share(dist.recipients, net, p);

    const std::uint64_t n = p.n_recipients, k = p.k, key = p.msg_len_bits + p.tag_len_bits;
    const std::uint64_t id = oracle_id_bits(n * k);
    std::uint64_t total = 0;
    for (const auto& [link, used] : net.total_consumed()) {
      std::uint64_t want = link.first == 0 ? n * k * key : 2 * k * (key + id);
      ++links;
      links_ok += used == want;
      total += used;
    }
    std::uint64_t want_total = n * n * k * key + n * (n - 1) * k * (key + id);
    exact += total == want_total && total == consumption(p, CostMode::kAccounting).total_bits;
  }
  o.check(exact == 50,
          fmt::format("{}/50 tuples: total consumed == consumption(ACCOUNTING)", exact));
  o.check(links_ok == links, fmt::format("{}/{} links match per-link accounting", links_ok, links));
  return o;
}

// 4. Hash family bound.
Outcome hash_family() {
  Outcome o;
  constexpr int kKeys = 100000;
  BinaryField f(16);
  std::mt19937_64 rng(4);
  auto draw = [&](std::size_t n) {
    BitString b(n);
    for (auto& w : b.mutable_words()) w = rng();
    b.resize(n);
    return b;
  };
  auto m1 = BitString::from_uint(0x0001, 16);
  auto m2 = BitString::from_uint(0x8F3C, 16);
  int collisions = 0;
  int cell_hits = 0;
  for (int i = 0; i < kKeys; ++i) {
    HashKey key{draw(16), draw(8)};
    auto h1 = make_tag(f, key, m1, 8).value.to_uint();
    auto h2 = make_tag(f, key, m2, 8).value.to_uint();
    collisions += h1 == h2;
    // 256 fixed, disjoint cells (y, y xor 0xA7): pooled estimate of one
    // cell's joint probability
    cell_hits += h2 == (h1 ^ 0xA7);
  }
  double p = 1.0 / 256;
  double rate = double(collisions) / kKeys;
  double sigma = std::sqrt(p * (1 - p) / kKeys);
  o.check(std::abs(rate - p) < 3 * sigma,
          fmt::format("collision rate {:.6f} within 3 sigma ({:.6f}) of 2^-8", rate, 3 * sigma));
  double joint = double(cell_hits) / kKeys / 256;
  o.check(joint < std::ldexp(1.0, 1 - 16),
          fmt::format("two-point frequency {:.3e} < 2^-15 = {:.3e}", joint, std::ldexp(1.0, -15)));
  return o;
}

// 5. Forging oracle match.
Outcome forging() {
  Outcome o;
  ParamRequest req;
  req.n = 3;
  req.k = 4;
  req.a = 1;
  req.t = 1;
  req.levels.eps1 = 0.252;
  auto p = resolve_params(req);
  // A guessed group passes iff fewer than 0.252 * 4 of its 4 tags are
  // wrong, i.e. at most one: (1 + 4) / 16. The forger's own group always
  // passes, so acceptance (> 1/2 of 3 tests) needs one of two unknown groups.
  double pt = 5.0 / 16;
  double want = 1 - (1 - pt) * (1 - pt);
  AttackSpec spec;
  spec.kind = AttackKind::kForge;
  spec.forger = 0;
  spec.target = 1;
  spec.trials = 100000;
  spec.seed = 5;
  auto res = attack_forge(spec, p);
  double sigma = std::sqrt(want * (1 - want) / spec.trials);
  o.check(std::abs(res.success.rate - want) < 3 * sigma,
          fmt::format("rate {:.5f} vs exact 135/256 = {:.5f} (3 sigma {:.5f})", res.success.rate,
                      want, 3 * sigma));
  double pt_sigma = std::sqrt(pt * (1 - pt) / res.unknown_group_pass.trials);
  o.check(std::abs(res.unknown_group_pass.rate - pt) < 3 * pt_sigma,
          fmt::format("single-test pass {:.5f} vs 5/16 (3 sigma {:.5f})",
                      res.unknown_group_pass.rate, 3 * pt_sigma));
  double prefactor = 9.0 * (1 - p.d_r) * (1 - p.d_r);
  o.check(std::abs(prefactor * res.unknown_group_pass.rate - prefactor * pt) <
              3 * prefactor * pt_sigma,
          fmt::format("N^2(1-d_R)^2 p_t: empirical {:.4f} vs analytic {:.4f}",
                      prefactor * res.unknown_group_pass.rate, prefactor * pt));
  o.check(res.analytic_bound >= res.success.rate,
          fmt::format("P(Forge) = {} >= empirical {:.5f}", res.analytic_bound,
                      res.success.rate));
  return o;
}

// 6. Repudiation bound. A pilot over a grid of per-block strategies picks the
// strongest one per k; it is then re-measured with fresh seeds.
Outcome repudiation() {
  Outcome o;
  auto t0 = Clock::now();
  std::vector<std::vector<double>> grid;
  for (int blocks = 4; blocks <= 7; ++blocks) {
    for (double g : {0.2, 0.25, 0.3, 0.35, 0.4, 0.45}) {
      std::vector<double> gamma(7, 0.0);
      std::fill(gamma.begin(), gamma.begin() + blocks, g);
      grid.push_back(gamma);
    }
  }
  for (std::uint64_t k : {10, 20, 30}) {
    auto p = seven_users(k);
    AttackSpec spec;
    spec.trials = 400;
    std::size_t best = 0;
    double best_rate = -1;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      spec.gamma = grid[i];
      spec.seed = 1000 * k + i;
      double r = attack_repudiation(spec, p).success.rate;
      if (r > best_rate) best_rate = r, best = i;
    }
    spec.gamma = grid[best];
    spec.trials = 10000;
    spec.seed = 1;
    auto res = attack_repudiation(spec, p);
    auto bound = p_nontransfer(0, p, TailMode::kSquared);
    int blocks = int(std::count_if(grid[best].begin(), grid[best].end(),
                                   [](double g) { return g > 0; }));
    o.check(res.success.rate <= bound.p_nontransfer + 3 * res.success.sigma(),
            fmt::format("k={}: best strategy {} blocks at gamma {}: rate {:.4f} [{:.4f}, {:.4f}] "
                        "<= bound {} + 3 sigma (unclamped bound {:.3g})",
                        k, blocks, grid[best][0], res.success.rate, res.success.lower,
                        res.success.upper, bound.p_nontransfer, std::exp(bound.log_p_nontransfer)));
  }
  double secs = seconds_since(t0);
  o.check(secs < 600.0, fmt::format("runtime {:.1f} s < 600 s", secs));
  return o;
}

// 7. Error tolerance shape.
Outcome error_tolerance() {
  Outcome o;
  ParamRequest req;
  req.k = 906;
  std::vector<double> qs;
  for (int i = 0; i <= 17; ++i) qs.push_back(i / 1000.0);
  qs.insert(qs.begin() + 1, {0.0001, 0.0002, 0.0003, 0.0005});
  auto sweep = sweep_error_tolerance(qs, req, 0.002, 10, 7);
  const auto& rows = sweep.rows;
  auto at = [&](double q) {
    return *std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.q == q; });
  };
  o.check(at(0.0).group_pass.rate == 1.0,
          fmt::format("pass probability at q=0: {}", at(0.0).group_pass.rate));

  const double e = expected_tag_mismatch(0.01, 8, 8);
  const double oracle = binomial_cdf_below(906, e, 0.005 * 906);
  const auto& r01 = at(0.01);
  o.check(oracle < 0.01 && r01.group_pass.rate < 0.01,
          fmt::format("q=0.01: binomial-tail oracle {:.3g}, empirical {} ({} tests) < 0.01", oracle,
                      r01.group_pass.rate, r01.group_pass.trials));

  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    monotone = monotone && rows[i].group_pass.lower <= rows[i - 1].group_pass.upper;
  }
  o.check(monotone, "pass probability nonincreasing in q (Wilson intervals)");

  // Cost steps: id width must be ceil(log2(N k(q))) and move by one bit.
  bool ids_ok = true;
  bool steps_ok = true;
  std::vector<std::string> steps;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::uint64_t n = r.adjusted.n_recipients, k = r.adjusted.k;
    ids_ok = ids_ok && r.cost.id_bits == oracle_id_bits(n * k) &&
             r.cost.total_bits == n * n * k * 16 + n * (n - 1) * k * (16 + r.cost.id_bits);
    if (i > 0 && r.cost.id_bits != rows[i - 1].cost.id_bits) {
      steps_ok = steps_ok && r.cost.id_bits == rows[i - 1].cost.id_bits + 1;
      steps.push_back(fmt::format("q={} k {}->{} id {}->{}", r.q, rows[i - 1].adjusted.k, k,
                                  rows[i - 1].cost.id_bits, r.cost.id_bits));
    }
  }
  o.check(ids_ok, "cost uses id_bits = ceil(log2(N k(q))) at every q");
  o.check(steps_ok && !steps.empty(), fmt::format("unit id-bit steps: {}", fmt::join(steps, "; ")));
  return o;
}

// 8. Threshold arithmetic.
Outcome thresholds() {
  Outcome o;
  auto p = seven_users(906);
  auto with_passes = [&](int passes) {
    std::vector<std::uint64_t> m(7, 0);
    for (int i = passes; i < 7; ++i) m[i] = 906;
    return m;
  };
  auto accepted_levels = [&](int passes) {
    std::string s;
    auto m = with_passes(passes);
    for (int l = 1; l >= -1; --l) {
      bool lib = evaluate_level(m, l, p).accepted;
      bool oracle = double(passes) / 7 > 0.5 + (l + 1) / 7.0;
      if (lib != oracle) return std::string("mismatch");
      s += lib ? "A" : "r";
    }
    return s;
  };
  o.check(accepted_levels(6) == "AAA", "6/7 -> accept at level 1 (and below)");
  o.check(accepted_levels(5) == "rAA", "5/7 -> reject level 1, accept level 0");
  o.check(accepted_levels(4) == "rrA", "4/7 -> accept at level -1 only");
  o.check(accepted_levels(3) == "rrr", "3/7 -> reject everywhere");
  return o;
}

// 9. Reported figures that depend on unstated conventions or hardware.
Outcome informational() {
  Outcome o;
  auto p906 = seven_users(906);
  ParamRequest one_bit;
  one_bit.k = 906;
  one_bit.a = 1;
  auto p1 = resolve_params(one_bit);
  o.info(fmt::format("secret bits to sign 1 bit: reported 14958; literal {} / accounting {}",
                     consumption(p1, CostMode::kLiteral).total_bits,
                     consumption(p1, CostMode::kAccounting).total_bits));
  o.info(fmt::format("secret bits to sign 8 bits: reported 35898; literal {} / accounting {}",
                     consumption(p906, CostMode::kLiteral).total_bits,
                     consumption(p906, CostMode::kAccounting).total_bits));
  for (std::uint32_t n : {7U, 8U}) {
    ParamRequest r;
    r.n = n;
    auto p = resolve_params(r);
    o.info(fmt::format("data at 8 participants, P_r=1e-10: reported ~5 Mbit; N={} k={}: "
                       "literal {:.3f} Mbit, accounting {:.3f} Mbit",
                       n, p.k, consumption(p, CostMode::kLiteral).total_bits / 1e6,
                       consumption(p, CostMode::kAccounting).total_bits / 1e6));
  }
  for (std::uint32_t a : {2U, 8U, 16U}) {
    ParamRequest r;
    r.a = a;
    r.k = 906;
    auto p = resolve_params(r);
    auto t = time_to_ready(NetworkConfig::uniform(8, kSimRateBps, 0), p);
    o.info(fmt::format("key generation time, N=7, a={}: reported as box plots over testbed "
                       "links; simulated {:.1f} s at {} bit/s per link",
                       a, t.seconds, kSimRateBps));
  }
  auto t1 = time_to_ready(NetworkConfig::uniform(8, kSimRateBps, 0), p1);
  ParamRequest three;
  three.n = 3;
  three.a = 1;
  auto p3 = resolve_params(three);
  auto t3 = time_to_ready(NetworkConfig::uniform(4, kSimRateBps, 0), p3);
  o.info(fmt::format("signature time per bit: reported 1041 s (73 s for 3 receivers); "
                     "simulated {:.1f} s ({:.1f} s for 3) at {} bit/s, hardware-bound",
                     t1.seconds, t3.seconds, kSimRateBps));
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"parameter reproduction", parameters},
      {"honest completeness", completeness},
      {"accounting equality", accounting},
      {"hash family bound", hash_family},
      {"forging oracle match", forging},
      {"repudiation bound", repudiation},
      {"error tolerance shape", error_tolerance},
      {"threshold arithmetic", thresholds},
      {"informational figures (not asserted)", informational},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = Clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out.check(false, fmt::format("exception: {}", e.what()));
    }
    failed += out.pass ? 0 : 1;
    std::printf("%s  %zu. %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                seconds_since(t0));
    for (const auto& n : out.notes) std::printf("        %s\n", n.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
