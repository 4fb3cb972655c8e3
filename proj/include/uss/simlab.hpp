#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uss/csv.hpp"
#include "uss/protocol.hpp"
#include "uss/secparams.hpp"
#include "uss/stats.hpp"

namespace uss {

/// Link rate used for simulated networks; it only matters for time-to-ready.
inline constexpr double kSimRateBps = 1000.0;

struct HonestRun {
  std::vector<VerificationReport> reports;  // one per recipient, at l_max
  /// Recipient 0 verifies at l_max, forwards to 1 at l_max - 1, ... down to 0.
  std::vector<VerificationReport> forward;
  Signature signature;
};

/// prepare -> share -> sign -> verify at l_max for every recipient, over a
/// fresh uniform network whose sender links flip bits with `flip_prob`.
HonestRun run_honest(const ProtocolParams& params, std::uint64_t network_seed,
                     double flip_prob = 0.0);

/// Same over a caller-supplied network. The message is random unless given.
HonestRun run_honest_on(const ProtocolParams& params, const NetworkConfig& config,
                        std::uint64_t seed, const std::optional<BitString>& message = {});

enum class AttackKind { kRepudiation, kForge };

std::string to_string(AttackKind kind);
AttackKind parse_attack_kind(const std::string& text);

struct AttackSpec {
  AttackKind kind = AttackKind::kRepudiation;
  /// Repudiation: fraction of tags corrupted inside each origin block.
  std::vector<double> gamma;
  /// Forging: forger, its colluders, the target and the level it verifies at.
  /// Collusion beyond floor(d_R N) is accepted but leaves the threat model.
  std::uint32_t forger = 0;
  std::vector<std::uint32_t> colluders;
  std::uint32_t target = 1;
  int level = 0;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;

  void validate(const ProtocolParams& params) const;
};

struct AttackResult {
  Estimate success;
  /// Repudiation: p_nontransfer at level 0. Forging: p_forge with the
  /// analytic single-test guess probability.
  double analytic_bound = 0.0;
  /// Forging only: per-test pass rate of the target's unknown groups, its
  /// analytic value, and N^2 (1 - d_R)^2 times the empirical rate.
  Estimate unknown_group_pass;
  double p_t_analytic = 0.0;
  double p_forge_from_empirical = 0.0;
};

/// Malicious sender corrupts round(gamma_R N k) randomly chosen tags in each
/// origin block R. A trial succeeds when some honest recipient accepts at
/// level 0 while another rejects at level -1.
AttackResult attack_repudiation(const AttackSpec& spec, const ProtocolParams& params,
                                TailMode mode = TailMode::kSquared);

/// A recipient forges a signature on a fresh message: tags under keys
/// originally issued to itself or a colluder are computed, all others are
/// uniform guesses. Success means the target accepts at spec.level.
AttackResult attack_forge(const AttackSpec& spec, const ProtocolParams& params);

enum class SweepAxis { kN, kPTarget, kMsgLen };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& text);

struct ConsumptionRow {
  double axis_value = 0.0;
  ProtocolParams params;
  ConsumptionReport literal;
  ConsumptionReport accounting;
};

struct ConsumptionSweep {
  SweepAxis axis = SweepAxis::kN;
  std::vector<ConsumptionRow> rows;

  CsvTable table() const;
};

ConsumptionSweep sweep_consumption(SweepAxis axis, std::span<const double> values,
                                   const ParamRequest& base);

/// Expected fraction of tags that disagree when every key bit flips with
/// probability q: (1 - (1-q)^(a+t)) (1 - 2^-t).
double expected_tag_mismatch(double q, std::uint32_t a, std::uint32_t t);

struct ErrorToleranceRow {
  double q = 0.0;
  Estimate group_pass;   // single group tests at s_{l_max}
  Estimate acceptance;   // recipients accepting at l_max
  double expected_mismatch = 0.0;
  double adjusted_s_lmax = 0.0;
  ProtocolParams adjusted;
  ConsumptionReport cost;  // accounting, adjusted parameters
};

struct ErrorToleranceSweep {
  ProtocolParams baseline;
  std::vector<ErrorToleranceRow> rows;

  CsvTable table() const;
};

/// For each q: Monte Carlo pass rate of the l_max test over `runs` full
/// protocol runs with the parameters resolved from `base`, and the cost of a
/// protocol re-solved with s_{l_max} = max(eps1, e(q) + margin).
ErrorToleranceSweep sweep_error_tolerance(std::span<const double> q_values,
                                          const ParamRequest& base, double margin,
                                          std::uint64_t runs, std::uint64_t seed);

}  // namespace uss
