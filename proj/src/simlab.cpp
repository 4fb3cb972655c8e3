#include "uss/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "uss/errors.hpp"
#include "uss/rng.hpp"

namespace uss {

namespace {

constexpr std::uint64_t kNetworkLabel = 1;
constexpr std::uint64_t kProtocolLabel = 2;
constexpr std::uint64_t kMessageLabel = 3;
constexpr std::uint64_t kAdversaryLabel = 4;

struct Counts {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t c = 0;
  std::uint64_t d = 0;

  Counts& operator+=(const Counts& o) {
    a += o.a;
    b += o.b;
    c += o.c;
    d += o.d;
    return *this;
  }
};

// Trials are independent and seeded by index, so the split across workers
// does not affect the totals.
template <typename Fn>
Counts run_trials(std::uint64_t trials, Fn&& trial) {
  unsigned workers = std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, trials));
  if (workers <= 1) {
    Counts total;
    for (std::uint64_t i = 0; i < trials; ++i) total += trial(i);
    return total;
  }
  std::vector<Counts> partial(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::uint64_t i = w; i < trials; i += workers) partial[w] += trial(i);
    });
  }
  for (auto& th : pool) th.join();
  Counts total;
  for (const auto& p : partial) total += p;
  return total;
}

BitString random_bits(Rng& rng, std::size_t n) {
  BitString out(n);
  auto words = out.mutable_words();
  for (auto& w : words) w = rng();
  out.resize(n);
  return out;
}

struct TrialSetup {
  Network network;
  Distribution dist;
};

TrialSetup setup_on(const ProtocolParams& params, NetworkConfig config, std::uint64_t seed) {
  TrialSetup s{Network(std::move(config)), {}};
  s.dist = prepare(s.network, params, derive_seed(seed, {kProtocolLabel}));
  share(s.dist.recipients, s.network, params);
  return s;
}

TrialSetup setup_trial(const ProtocolParams& params, std::uint64_t seed, double flip_prob) {
  return setup_on(params,
                  NetworkConfig::uniform(params.n_recipients + 1, kSimRateBps,
                                         derive_seed(seed, {kNetworkLabel}), flip_prob),
                  seed);
}

HonestRun finish_honest(const TrialSetup& s, const ProtocolParams& params, std::uint64_t seed,
                        const std::optional<BitString>& message) {
  Rng rng(derive_seed(seed, {kMessageLabel}));
  HonestRun run;
  run.signature = sign(s.dist.sender,
                       message ? *message : random_bits(rng, params.msg_len_bits), params);
  for (const auto& rec : s.dist.recipients) {
    run.reports.push_back(verify(rec, run.signature, params.l_max, params));
  }
  std::vector<const Recipient*> chain;
  for (int l = params.l_max; l >= 0; --l) chain.push_back(&s.dist.recipients[chain.size()]);
  run.forward = forward_chain(chain, run.signature, params.l_max, params);
  return run;
}

}  // namespace

HonestRun run_honest(const ProtocolParams& params, std::uint64_t network_seed,
                     double flip_prob) {
  return finish_honest(setup_trial(params, network_seed, flip_prob), params, network_seed, {});
}

HonestRun run_honest_on(const ProtocolParams& params, const NetworkConfig& config,
                        std::uint64_t seed, const std::optional<BitString>& message) {
  params.validate();
  if (config.users != params.n_recipients + 1) {
    throw ParameterError("users", fmt::format("network has {} users, need N + 1 = {}",
                                              config.users, params.n_recipients + 1));
  }
  if (message && message->size() != params.msg_len_bits) {
    throw ParameterError("message", fmt::format("must be {} bits", params.msg_len_bits));
  }
  return finish_honest(setup_on(params, config, seed), params, seed, message);
}

std::string to_string(AttackKind kind) {
  return kind == AttackKind::kForge ? "forge" : "repudiation";
}

AttackKind parse_attack_kind(const std::string& text) {
  if (text == "forge") return AttackKind::kForge;
  if (text == "repudiation") return AttackKind::kRepudiation;
  throw ParameterError("kind", "expected 'repudiation' or 'forge', got '" + text + "'");
}

void AttackSpec::validate(const ProtocolParams& params) const {
  const std::uint32_t n = params.n_recipients;
  if (trials < 1) throw ParameterError("trials", "must be >= 1");
  if (kind == AttackKind::kRepudiation) {
    if (gamma.size() != n) {
      throw ParameterError("gamma", fmt::format("need one fraction per origin block ({}), got {}",
                                                n, gamma.size()));
    }
    for (double g : gamma) {
      if (!(g >= 0.0 && g <= 1.0)) throw ParameterError("gamma", "fractions must lie in [0, 1]");
    }
    return;
  }
  if (forger >= n) throw ParameterError("forger", "must be a recipient index");
  if (target >= n) throw ParameterError("target", "must be a recipient index");
  if (target == forger) throw ParameterError("target", "must differ from the forger");
  for (std::uint32_t c : colluders) {
    if (c >= n) throw ParameterError("colluders", "must be recipient indices");
    if (c == target) throw ParameterError("colluders", "must not include the target");
  }
  if (level < -1 || level > params.l_max) {
    throw ParameterError("level", fmt::format("must lie in [-1, {}]", params.l_max));
  }
}

AttackResult attack_repudiation(const AttackSpec& spec, const ProtocolParams& params,
                                TailMode mode) {
  params.validate();
  spec.validate(params);
  if (spec.kind != AttackKind::kRepudiation) {
    throw ParameterError("kind", "attack_repudiation needs a repudiation spec");
  }
  const std::uint64_t per_block = params.keys_per_recipient();
  std::vector<std::uint64_t> corrupt_count;
  for (double g : spec.gamma) {
    corrupt_count.push_back(
        static_cast<std::uint64_t>(std::llround(g * static_cast<double>(per_block))));
  }

  Counts totals = run_trials(spec.trials, [&](std::uint64_t trial) {
    const std::uint64_t trial_seed = derive_seed(spec.seed, {trial});
    TrialSetup s = setup_trial(params, trial_seed, 0.0);
    Rng adversary(derive_seed(trial_seed, {kAdversaryLabel}));
    Signature sig = sign(s.dist.sender, random_bits(adversary, params.msg_len_bits), params);

    // The sender does not know the partitions, so it can only pick slots.
    std::vector<std::uint64_t> slots(per_block);
    for (std::uint32_t r = 0; r < params.n_recipients; ++r) {
      for (std::uint64_t i = 0; i < per_block; ++i) slots[i] = i;
      for (std::uint64_t i = 0; i < corrupt_count[r]; ++i) {
        std::uint64_t j = i + uniform_below(adversary, per_block - i);
        std::swap(slots[i], slots[j]);
        sig.tags[r * per_block + slots[i]].value.flip(0);
      }
    }

    bool accepted_high = false;
    bool rejected_low = false;
    for (const auto& rec : s.dist.recipients) {
      auto mismatches = count_mismatches(rec, sig, params);
      accepted_high |= evaluate_level(mismatches, 0, params).accepted;
      rejected_low |= !evaluate_level(mismatches, -1, params).accepted;
    }
    return Counts{accepted_high && rejected_low ? 1U : 0U, 0, 0, 0};
  });

  AttackResult result;
  result.success = make_estimate(totals.a, spec.trials);
  result.analytic_bound = p_nontransfer(0, params, mode).p_nontransfer;
  return result;
}

AttackResult attack_forge(const AttackSpec& spec, const ProtocolParams& params) {
  params.validate();
  spec.validate(params);
  if (spec.kind != AttackKind::kForge) {
    throw ParameterError("kind", "attack_forge needs a forge spec");
  }
  const std::uint32_t n = params.n_recipients;
  const std::uint64_t per_block = params.keys_per_recipient();
  std::vector<bool> known(n, false);
  known[spec.forger] = true;
  for (std::uint32_t c : spec.colluders) known[c] = true;
  const auto unknown_groups =
      static_cast<std::uint64_t>(std::count(known.begin(), known.end(), false));

  Counts totals = run_trials(spec.trials, [&](std::uint64_t trial) {
    const std::uint64_t trial_seed = derive_seed(spec.seed, {trial});
    TrialSetup s = setup_trial(params, trial_seed, 0.0);
    Rng forger_rng(derive_seed(trial_seed, {kAdversaryLabel}));
    BinaryField field(params.msg_len_bits);

    Signature forged;
    forged.message = random_bits(forger_rng, params.msg_len_bits);
    forged.tags.reserve(params.total_keys());
    for (std::uint32_t o = 0; o < n; ++o) {
      for (std::uint64_t slot = 0; slot < per_block; ++slot) {
        if (known[o]) {
          forged.tags.push_back(make_tag(field, s.dist.recipients[o].issued[slot],
                                         forged.message, params.tag_len_bits));
        } else {
          forged.tags.push_back(Tag{random_bits(forger_rng, params.tag_len_bits)});
        }
      }
    }

    auto mismatches = count_mismatches(s.dist.recipients[spec.target], forged, params);
    VerificationReport report = evaluate_level(mismatches, spec.level, params);
    const double limit = params.s(spec.level) * static_cast<double>(params.k);
    std::uint64_t unknown_passes = 0;
    for (std::uint32_t g = 0; g < n; ++g) {
      if (!known[g] && static_cast<double>(mismatches[g]) < limit) ++unknown_passes;
    }
    return Counts{report.accepted ? 1U : 0U, unknown_passes, 0, 0};
  });

  AttackResult result;
  result.success = make_estimate(totals.a, spec.trials);
  result.unknown_group_pass = make_estimate(totals.b, spec.trials * unknown_groups);
  result.p_t_analytic =
      guess_pass_probability(params.k, params.tag_len_bits, params.s(spec.level));
  result.analytic_bound = p_forge(n, params.d_r, result.p_t_analytic);
  result.p_forge_from_empirical = p_forge(n, params.d_r, result.unknown_group_pass.rate);
  return result;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kN:
      return "n";
    case SweepAxis::kPTarget:
      return "p_target";
    case SweepAxis::kMsgLen:
      return "msg_len";
  }
  return "n";
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "n") return SweepAxis::kN;
  if (text == "p_target") return SweepAxis::kPTarget;
  if (text == "msg_len") return SweepAxis::kMsgLen;
  throw ParameterError("axis", "expected n, p_target, msg_len or error, got '" + text + "'");
}

ConsumptionSweep sweep_consumption(SweepAxis axis, std::span<const double> values,
                                   const ParamRequest& base) {
  if (values.empty()) throw ParameterError("range", "sweep range is empty");
  ConsumptionSweep sweep;
  sweep.axis = axis;
  for (double v : values) {
    ParamRequest req = base;
    switch (axis) {
      case SweepAxis::kN:
        if (v < 2 || v != std::floor(v)) {
          throw ParameterError("n", "axis values must be integers >= 2");
        }
        req.n = static_cast<std::uint32_t>(v);
        req.l_max.reset();
        break;
      case SweepAxis::kPTarget:
        req.p_target = v;
        break;
      case SweepAxis::kMsgLen:
        if (v < 1 || v != std::floor(v)) {
          throw ParameterError("a", "axis values must be integers >= 1");
        }
        req.a = static_cast<std::uint32_t>(v);
        break;
    }
    ConsumptionRow row;
    row.axis_value = v;
    row.params = resolve_params(req);
    row.literal = consumption(row.params, CostMode::kLiteral);
    row.accounting = consumption(row.params, CostMode::kAccounting);
    sweep.rows.push_back(std::move(row));
  }
  return sweep;
}

CsvTable ConsumptionSweep::table() const {
  CsvTable t;
  t.header = {to_string(axis), "n", "a", "t", "p_target", "l_max", "band", "d_r", "k",
              "id_bits", "literal_total_bits", "accounting_prep_bits",
              "accounting_share_bits", "accounting_total_bits"};
  for (const auto& r : rows) {
    const auto& p = r.params;
    t.rows.push_back({format_number(r.axis_value), std::to_string(p.n_recipients),
                      std::to_string(p.msg_len_bits), std::to_string(p.tag_len_bits),
                      format_number(p.p_target), std::to_string(p.l_max),
                      fmt::format("lmax={}", p.l_max), format_number(p.d_r),
                      std::to_string(p.k), std::to_string(r.accounting.id_bits),
                      std::to_string(r.literal.total_bits),
                      std::to_string(r.accounting.preparation_bits),
                      std::to_string(r.accounting.sharing_bits),
                      std::to_string(r.accounting.total_bits)});
  }
  return t;
}

double expected_tag_mismatch(double q, std::uint32_t a, std::uint32_t t) {
  double any_flip = 1.0 - std::pow(1.0 - q, static_cast<double>(a) + static_cast<double>(t));
  return any_flip * (1.0 - std::ldexp(1.0, -static_cast<int>(t)));
}

ErrorToleranceSweep sweep_error_tolerance(std::span<const double> q_values,
                                          const ParamRequest& base, double margin,
                                          std::uint64_t runs, std::uint64_t seed) {
  if (q_values.empty()) throw ParameterError("range", "sweep range is empty");
  if (runs < 1) throw ParameterError("trials", "need at least one run per point");
  if (!(margin >= 0.0)) throw ParameterError("margin", "must be >= 0");
  for (double q : q_values) {
    if (!(q >= 0.0 && q < 0.5)) {
      throw ParameterError("q", "flip probabilities must lie in [0, 0.5)");
    }
  }

  ErrorToleranceSweep sweep;
  sweep.baseline = resolve_params(base);
  const ProtocolParams& p = sweep.baseline;
  const std::uint32_t n = p.n_recipients;
  const double interior = p.s(p.l_max - 1);
  auto adjusted_s_lmax = [&](double q) {
    double s = std::max(base.levels.eps1,
                        expected_tag_mismatch(q, p.msg_len_bits, p.tag_len_bits) + margin);
    if (s >= interior) {
      throw ParameterError("q", fmt::format("q = {} needs s_lmax = {} which reaches the next "
                                            "level s_{} = {}",
                                            q, s, p.l_max - 1, interior));
    }
    return s;
  };
  // Fail before any Monte Carlo work.
  for (double q : q_values) adjusted_s_lmax(q);

  for (std::size_t qi = 0; qi < q_values.size(); ++qi) {
    const double q = q_values[qi];
    ErrorToleranceRow row;
    row.q = q;

    row.expected_mismatch = expected_tag_mismatch(q, p.msg_len_bits, p.tag_len_bits);
    row.adjusted_s_lmax = adjusted_s_lmax(q);
    Counts c = run_trials(runs, [&](std::uint64_t run) {
      HonestRun h = run_honest(p, derive_seed(seed, {qi, run}), q);
      Counts out;
      for (const auto& rep : h.reports) {
        out.a += rep.tests_passed;
        out.b += rep.accepted ? 1 : 0;
      }
      return out;
    });
    row.group_pass = make_estimate(c.a, runs * n * n);
    row.acceptance = make_estimate(c.b, runs * n);

    ParamRequest adjusted = base;
    adjusted.levels.eps1 = row.adjusted_s_lmax;
    adjusted.k.reset();
    row.adjusted = resolve_params(adjusted);
    row.cost = consumption(row.adjusted, CostMode::kAccounting);
    sweep.rows.push_back(std::move(row));
  }
  return sweep;
}

CsvTable ErrorToleranceSweep::table() const {
  CsvTable t;
  t.header = {"q",          "runs",          "group_tests",   "group_passes",
              "pass_prob",  "pass_lo",       "pass_hi",       "accept_rate",
              "e_q",        "adjusted_s_lmax", "adjusted_k",  "id_bits",
              "cost_bits"};
  for (const auto& r : rows) {
    t.rows.push_back({format_number(r.q),
                      std::to_string(r.acceptance.trials / baseline.n_recipients),
                      std::to_string(r.group_pass.trials), std::to_string(r.group_pass.successes),
                      format_number(r.group_pass.rate), format_number(r.group_pass.lower),
                      format_number(r.group_pass.upper), format_number(r.acceptance.rate),
                      format_number(r.expected_mismatch), format_number(r.adjusted_s_lmax),
                      std::to_string(r.adjusted.k), std::to_string(r.cost.id_bits),
                      std::to_string(r.cost.total_bits)});
  }
  return t;
}

}  // namespace uss
