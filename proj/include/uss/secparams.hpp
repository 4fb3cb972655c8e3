#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace uss {

/// Exponent form of the per-level tail bound p_m.
///
///  kLiteral: exp(-(s_{l-1} - s_l) * k / 2)
///  kSquared: exp(-(s_{l-1} - s_l)^2 * k / 2)   (default)
enum class TailMode { kLiteral, kSquared };

/// kLiteral evaluates N^2 k a + N(N-1)(a + ceil(log2 Nk)).
/// kAccounting counts bits actually moved with key length L = a + t.
enum class CostMode { kLiteral, kAccounting };

std::string to_string(TailMode mode);
std::string to_string(CostMode mode);
TailMode parse_tail_mode(const std::string& text);

/// Mismatch thresholds indexed by transferability level -1..l_max.
using SLevels = std::map<int, double>;

struct SLevelSpec {
  double eps1 = 0.005;  // s_{l_max} = eps1
  double eps2 = 0.001;  // s_{-1} = 1/2 - eps2

  void validate() const;
};

struct ProtocolParams {
  std::uint32_t n_recipients = 7;
  std::uint32_t msg_len_bits = 8;
  std::uint32_t tag_len_bits = 8;
  int l_max = 1;
  double d_r = 1.0 / 7.0;
  SLevels s_levels;
  std::uint64_t k = 1;
  double p_target = 1e-10;

  std::uint32_t n() const { return n_recipients; }
  std::uint32_t a() const { return msg_len_bits; }
  std::uint32_t t() const { return tag_len_bits; }
  /// Signature key length: multiplier (a bits) plus offset (t bits).
  std::uint64_t key_bits() const {
    return std::uint64_t{msg_len_bits} + tag_len_bits;
  }
  /// Keys issued to each recipient, N k.
  std::uint64_t keys_per_recipient() const { return std::uint64_t{n_recipients} * k; }
  std::uint64_t total_keys() const { return keys_per_recipient() * n_recipients; }

  double s(int level) const;
  double delta(int level) const;

  /// Throws ParameterError naming the first offending field.
  void validate() const;
};

/// Inputs from which a full ProtocolParams is resolved. Unset optionals are
/// derived: t = min(a, 32), l_max = compute_lmax(n), k = solve_k(...).
struct ParamRequest {
  std::uint32_t n = 7;
  std::uint32_t a = 8;
  std::optional<std::uint32_t> t;
  std::optional<int> l_max;
  std::optional<std::uint64_t> k;
  double p_target = 1e-10;
  SLevelSpec levels;
  TailMode mode = TailMode::kSquared;
};

ProtocolParams resolve_params(const ParamRequest& request);

double compute_dr(int l_max, std::uint32_t n);
int compute_lmax(std::uint32_t n);
SLevels make_s_levels(int l_max, const SLevelSpec& spec);
double compute_delta(int level, double d_r);

/// Largest mismatch count m with m < s * k; -1 when no count qualifies.
std::int64_t max_tolerated_mismatches(double s, std::uint64_t k);

double log_tail_bound_pm(int level, std::uint64_t k, const SLevels& s_levels,
                         TailMode mode);
double tail_bound_pm(int level, std::uint64_t k, const SLevels& s_levels,
                     TailMode mode);

double p_forge(std::uint32_t n, double d_r, double p_t);

/// floor(N(1 - d_R)) (floor(N(1 - d_R)) - 1) / 2
std::uint64_t honest_pairs(std::uint32_t n, double d_r);

struct BoundReport {
  int level = 0;
  std::uint64_t n_p = 0;
  double p_m = 0.0;
  double p_nontransfer = 0.0;
  double p_forge = 0.0;
  double p_t = 0.0;
  // Unclamped natural logs; finite where the linear values underflow.
  double log_p_m = 0.0;
  double log_p_nontransfer = 0.0;
};

/// Probability that uniformly guessed t-bit tags pass one group test of k
/// keys at mismatch threshold s: P[Binomial(k, 1 - 2^-t) < s k].
double guess_pass_probability(std::uint64_t k, std::uint32_t t, double s);

/// Non-transferability bound at `level` (repudiation is level 0), with the
/// forging figures filled in from guess_pass_probability at the same level.
BoundReport p_nontransfer(int level, const ProtocolParams& params, TailMode mode);

/// Smallest k with p_nontransfer(l) <= p_target for every l in 0..l_max.
std::uint64_t solve_k(double p_target, std::uint32_t n, int l_max,
                      const SLevelSpec& spec, TailMode mode);

/// ceil(log2(n k)), at least 1.
std::uint32_t id_bits(std::uint64_t n, std::uint64_t k);

struct ConsumptionReport {
  std::uint64_t preparation_bits = 0;
  std::uint64_t sharing_bits = 0;
  std::uint64_t total_bits = 0;
  std::uint32_t id_bits = 0;
  CostMode mode = CostMode::kAccounting;
};

ConsumptionReport consumption(const ProtocolParams& params, CostMode mode);

/// CSV columns: n,k,a,t,mode,prep_bits,share_bits,total_bits,id_bits
std::string consumption_csv_header();
std::string consumption_csv_row(const ProtocolParams& params,
                                const ConsumptionReport& report);

}  // namespace uss
