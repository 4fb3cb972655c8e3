#include "uss/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "uss/csv.hpp"
#include "uss/errors.hpp"
#include "uss/keystore.hpp"
#include "uss/protocol.hpp"
#include "uss/secparams.hpp"
#include "uss/simlab.hpp"

#ifndef USS_VERSION
#define USS_VERSION "dev"
#endif

namespace uss::cli {

namespace {

struct ParamOptions {
  std::uint32_t n = 7;
  std::uint32_t a = 8;
  std::uint32_t t = 0;
  int lmax = 0;
  std::uint64_t k = 0;
  double p_target = 1e-10;
  double eps1 = 0.005;
  double eps2 = 0.001;
  std::string mode = "squared";
  std::uint64_t seed = 0;

  CLI::Option* t_opt = nullptr;
  CLI::Option* lmax_opt = nullptr;
  CLI::Option* k_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--n", n, "number of recipients N")->capture_default_str();
    app->add_option("--a", a, "message length in bits")->capture_default_str();
    t_opt = app->add_option("--t", t, "tag length in bits (default min(a, 32))");
    lmax_opt = app->add_option("--lmax", lmax, "maximum transferability level");
    k_opt = app->add_option("--k", k, "security parameter (default: solved)");
    app->add_option("--p-target", p_target, "target failure probability")
        ->capture_default_str();
    app->add_option("--eps1", eps1, "offset of s_lmax above 0")->capture_default_str();
    app->add_option("--eps2", eps2, "offset of s_-1 below 1/2")->capture_default_str();
    app->add_option("--mode", mode, "tail bound form: squared|literal")->capture_default_str();
    app->add_option("--seed", seed, "simulation seed")->envname("USS_SEED")->capture_default_str();
  }

  ParamRequest request() const {
    ParamRequest r;
    r.n = n;
    r.a = a;
    if (t_opt->count()) r.t = t;
    if (lmax_opt->count()) r.l_max = lmax;
    if (k_opt->count()) {
      if (k < 1) throw ParameterError("k", "must be >= 1");
      r.k = k;
    }
    r.p_target = p_target;
    r.levels = {eps1, eps2};
    r.mode = parse_tail_mode(mode);
    return r;
  }
};

std::string describe(const ProtocolParams& p, TailMode mode, std::uint64_t seed) {
  std::string levels;
  for (auto it = p.s_levels.rbegin(); it != p.s_levels.rend(); ++it) {
    if (!levels.empty()) levels += ' ';
    levels += fmt::format("s_{}={}", it->first, format_number(it->second));
  }
  return fmt::format("n={} a={} t={} l_max={} d_r={} k={} p_target={} mode={} seed={} {}",
                     p.n_recipients, p.msg_len_bits, p.tag_len_bits, p.l_max,
                     format_number(p.d_r), p.k, format_number(p.p_target), to_string(mode),
                     seed, levels);
}

std::vector<std::string> csv_comments(const ProtocolParams& p, TailMode mode,
                                      std::uint64_t seed, const std::string& what) {
  return {fmt::format("uss {} {}", USS_VERSION, what), "params " + describe(p, mode, seed)};
}

// Writes to --out when given, otherwise to `out`.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path);
  file << text;
}

// Decimal rounding keeps stepped axis values such as 0.01 exact.
double tidy(double v) { return std::stod(fmt::format("{:.12g}", v)); }

std::vector<double> linear_range(double from, double to, double step, const std::string& name) {
  if (!(step > 0.0)) throw ParameterError("step", "must be > 0");
  if (to < from) throw ParameterError(name, "--to must not be below --from");
  std::vector<double> out;
  for (std::uint64_t i = 0;; ++i) {
    double v = tidy(from + static_cast<double>(i) * step);
    if (v > to + step * 1e-9) break;
    out.push_back(v);
    if (out.size() > 100000) throw ParameterError(name, "range too long");
  }
  return out;
}

std::vector<double> decade_range(double from, double to, std::uint32_t per_decade) {
  if (!(from > 0.0 && from < 1.0 && to > 0.0 && to < 1.0)) {
    throw ParameterError("p_target", "range endpoints must lie in (0, 1)");
  }
  if (per_decade < 1) throw ParameterError("points-per-decade", "must be >= 1");
  double e0 = std::log10(from);
  double e1 = std::log10(to);
  double dir = e1 < e0 ? -1.0 : 1.0;
  auto steps = static_cast<std::uint64_t>(std::llround(std::abs(e1 - e0) * per_decade));
  std::vector<double> out;
  for (std::uint64_t i = 0; i <= steps; ++i) {
    double e = tidy(e0 + dir * static_cast<double>(i) / per_decade);
    out.push_back(e == std::floor(e) ? std::stod(fmt::format("1e{}", static_cast<long>(e)))
                                     : tidy(std::pow(10.0, e)));
  }
  return out;
}

NetworkConfig network_for(const std::string& config_path, double rate, double q,
                          std::uint32_t n, std::uint64_t seed) {
  if (!config_path.empty()) return NetworkConfig::load(config_path);
  return NetworkConfig::uniform(n + 1, rate, seed, q);
}

int run_params(const ParamOptions& opts, std::ostream& out) {
  ParamRequest req = opts.request();
  ProtocolParams p = resolve_params(req);
  out << fmt::format("# uss {} params\n", USS_VERSION);
  out << fmt::format("n = {}\na = {}\nt = {}\nl_max = {}\nd_R = {}\np_target = {}\nmode = {}\n",
                     p.n_recipients, p.msg_len_bits, p.tag_len_bits, p.l_max,
                     format_number(p.d_r), format_number(p.p_target), to_string(req.mode));
  out << fmt::format("k = {} ({})\n", p.k, req.k ? "given" : "solved");
  for (auto it = p.s_levels.rbegin(); it != p.s_levels.rend(); ++it) {
    out << fmt::format("s_{} = {}\n", it->first, format_number(it->second));
  }
  for (int l = p.l_max; l >= -1; --l) {
    out << fmt::format("delta_{} = {}\n", l, format_number(p.delta(l)));
  }
  for (int l = 0; l <= p.l_max; ++l) {
    BoundReport b = p_nontransfer(l, p, req.mode);
    out << fmt::format(
        "bound level={} n_p={} p_m={} p_nontransfer={} log_p_nontransfer={} p_t={} "
        "p_forge={}\n",
        b.level, b.n_p, format_number(b.p_m), format_number(b.p_nontransfer),
        format_number(b.log_p_nontransfer), format_number(b.p_t), format_number(b.p_forge));
  }
  out << consumption_csv_header() << '\n';
  for (CostMode m : {CostMode::kLiteral, CostMode::kAccounting}) {
    out << consumption_csv_row(p, consumption(p, m)) << '\n';
  }
  return kExitOk;
}

std::string join_counts(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

int run_run(const ParamOptions& opts, const std::string& config, double rate, double q,
            const std::string& message, std::ostream& out) {
  ParamRequest req = opts.request();
  ProtocolParams p = resolve_params(req);
  NetworkConfig net = network_for(config, rate, q, p.n_recipients, opts.seed);
  std::optional<BitString> msg;
  if (!message.empty()) {
    try {
      msg = BitString::from_binary(message);
    } catch (const std::invalid_argument& e) {
      throw ParameterError("message", e.what());
    }
    if (msg->size() != p.msg_len_bits) {
      throw ParameterError("message", fmt::format("must be {} bits", p.msg_len_bits));
    }
  }
  HonestRun run = run_honest_on(p, net, opts.seed, msg);
  out << fmt::format("# uss {} run\n# params {}\n", USS_VERSION, describe(p, req.mode, opts.seed));
  std::uint32_t accepted = 0;
  for (std::size_t r = 0; r < run.reports.size(); ++r) {
    const auto& rep = run.reports[r];
    accepted += rep.accepted ? 1 : 0;
    out << fmt::format("recipient {} level {} tests_passed {}/{} {} mismatches {}\n", r,
                       rep.level, rep.tests_passed, p.n_recipients,
                       rep.accepted ? "accepted" : "rejected", join_counts(rep.mismatches));
  }
  for (std::size_t i = 0; i < run.forward.size(); ++i) {
    const auto& rep = run.forward[i];
    out << fmt::format("forward hop {} recipient {} level {} tests_passed {}/{} {}\n", i, i,
                       rep.level, rep.tests_passed, p.n_recipients,
                       rep.accepted ? "accepted" : "rejected");
  }
  out << fmt::format("accepted {}/{} at level {}\n", accepted, p.n_recipients, p.l_max);
  return kExitOk;
}

struct AttackOptions {
  std::string kind = "repudiation";
  std::uint64_t trials = 1000;
  std::vector<double> gamma;
  std::uint32_t forger = 0;
  std::uint32_t target = 1;
  std::vector<std::uint32_t> colluders;
  int level = 0;
  std::string out_path;
};

int run_attack(const ParamOptions& opts, const AttackOptions& a, std::ostream& out) {
  ParamRequest req = opts.request();
  ProtocolParams p = resolve_params(req);
  AttackSpec spec;
  spec.kind = parse_attack_kind(a.kind);
  spec.trials = a.trials;
  spec.seed = opts.seed;
  spec.forger = a.forger;
  spec.target = a.target;
  spec.colluders = a.colluders;
  spec.level = a.level;
  spec.gamma = a.gamma;
  if (spec.gamma.empty()) spec.gamma = {0.375};
  if (spec.gamma.size() == 1) spec.gamma.assign(p.n_recipients, spec.gamma[0]);

  AttackResult res = spec.kind == AttackKind::kRepudiation ? attack_repudiation(spec, p, req.mode)
                                                            : attack_forge(spec, p);
  CsvTable t;
  t.comments = csv_comments(p, req.mode, opts.seed, "attack " + to_string(spec.kind));
  t.header = {"kind",      "n",           "k",          "a",
              "t",         "level",       "trials",     "successes",
              "rate",      "wilson_lo",   "wilson_hi",  "analytic_bound",
              "group_tests", "group_passes", "p_t_empirical", "p_t_analytic",
              "p_forge_from_empirical"};
  const int level = spec.kind == AttackKind::kRepudiation ? 0 : spec.level;
  t.rows.push_back({to_string(spec.kind), std::to_string(p.n_recipients), std::to_string(p.k),
                    std::to_string(p.msg_len_bits), std::to_string(p.tag_len_bits),
                    std::to_string(level), std::to_string(res.success.trials),
                    std::to_string(res.success.successes), format_number(res.success.rate),
                    format_number(res.success.lower), format_number(res.success.upper),
                    format_number(res.analytic_bound),
                    std::to_string(res.unknown_group_pass.trials),
                    std::to_string(res.unknown_group_pass.successes),
                    format_number(res.unknown_group_pass.rate), format_number(res.p_t_analytic),
                    format_number(res.p_forge_from_empirical)});
  emit(a.out_path, t.str(), out);
  return kExitOk;
}

struct SweepOptions {
  std::string axis = "n";
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;
  std::uint32_t per_decade = 1;
  double margin = 0.002;
  std::uint64_t runs = 20;
  std::string out_path;
  CLI::Option* from_opt = nullptr;
  CLI::Option* to_opt = nullptr;
  CLI::Option* step_opt = nullptr;
};

int run_sweep(const ParamOptions& opts, const SweepOptions& s, std::ostream& out) {
  if (!s.from_opt->count() || !s.to_opt->count()) {
    throw ParameterError("from", "--from and --to are required");
  }
  ParamRequest req = opts.request();
  CsvTable table;
  ProtocolParams reference;
  if (s.axis == "error") {
    double step = s.step_opt->count() ? s.step : 0.001;
    auto qs = linear_range(s.from, s.to, step, "q");
    ErrorToleranceSweep sweep = sweep_error_tolerance(qs, req, s.margin, s.runs, opts.seed);
    table = sweep.table();
    reference = sweep.baseline;
    table.comments = csv_comments(
        reference, req.mode, opts.seed,
        fmt::format("sweep error from={} to={} step={} margin={} runs={}", format_number(s.from),
                    format_number(s.to), format_number(step), format_number(s.margin), s.runs));
  } else {
    SweepAxis axis = parse_sweep_axis(s.axis);
    std::vector<double> values;
    if (axis == SweepAxis::kPTarget) {
      values = decade_range(s.from, s.to, s.per_decade);
    } else {
      values = linear_range(s.from, s.to, s.step_opt->count() ? s.step : 1.0, to_string(axis));
    }
    ConsumptionSweep sweep = sweep_consumption(axis, values, req);
    table = sweep.table();
    reference = sweep.rows.front().params;
    table.comments = csv_comments(
        reference, req.mode, opts.seed,
        fmt::format("sweep {} from={} to={} points={}", to_string(axis), format_number(s.from),
                    format_number(s.to), values.size()));
  }
  emit(s.out_path, table.str(), out);
  return kExitOk;
}

int run_time_to_ready(const ParamOptions& opts, const std::string& config, double rate,
                      std::ostream& out) {
  ParamRequest req = opts.request();
  ProtocolParams p = resolve_params(req);
  NetworkConfig net = network_for(config, rate, 0.0, p.n_recipients, opts.seed);
  TimeToReady ttr = time_to_ready(net, p);
  out << fmt::format("# uss {} time-to-ready\n# params {}\n", USS_VERSION,
                     describe(p, req.mode, opts.seed));
  out << fmt::format("time_to_ready_s = {}\nbinding_link = {}-{}\nbinding_bits = {}\n",
                     format_number(ttr.seconds), ttr.binding_link.first,
                     ttr.binding_link.second, ttr.binding_bits);
  return kExitOk;
}

}  // namespace

const char* version() { return USS_VERSION; }

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unconditionally secure signatures over simulated QKD key stores", "uss"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(USS_VERSION));

  ParamOptions params_opts;
  auto* params_cmd = app.add_subcommand("params", "resolve parameters, bounds and costs");
  params_opts.attach(params_cmd);

  ParamOptions run_opts;
  std::string run_config;
  double run_rate = kSimRateBps;
  double run_q = 0.0;
  std::string run_message;
  auto* run_cmd = app.add_subcommand("run", "execute one honest protocol run");
  run_opts.attach(run_cmd);
  run_cmd->add_option("--config", run_config, "network config (JSON)");
  run_cmd->add_option("--rate", run_rate, "uniform link rate in bits/s")->capture_default_str();
  run_cmd->add_option("--q", run_q, "flip probability on sender links")->capture_default_str();
  run_cmd->add_option("--message", run_message, "message bits, MSB first (default: random)");

  ParamOptions attack_opts;
  AttackOptions attack;
  auto* attack_cmd = app.add_subcommand("attack", "Monte Carlo attack simulation (CSV)");
  attack_opts.attach(attack_cmd);
  attack_cmd->add_option("--kind", attack.kind, "repudiation|forge")->capture_default_str();
  attack_cmd->add_option("--trials", attack.trials)->capture_default_str();
  attack_cmd->add_option("--gamma", attack.gamma, "per-block corruption fractions")
      ->delimiter(',');
  attack_cmd->add_option("--forger", attack.forger)->capture_default_str();
  attack_cmd->add_option("--target", attack.target)->capture_default_str();
  attack_cmd->add_option("--colluders", attack.colluders)->delimiter(',');
  attack_cmd->add_option("--level", attack.level)->capture_default_str();
  attack_cmd->add_option("--out", attack.out_path, "CSV output path (default stdout)");

  ParamOptions sweep_opts;
  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweeps (CSV)");
  sweep_opts.attach(sweep_cmd);
  sweep_cmd->add_option("--axis", sweep.axis, "n|p_target|msg_len|error")->capture_default_str();
  sweep.from_opt = sweep_cmd->add_option("--from", sweep.from);
  sweep.to_opt = sweep_cmd->add_option("--to", sweep.to);
  sweep.step_opt = sweep_cmd->add_option("--step", sweep.step, "linear step (n, msg_len, error)");
  sweep_cmd->add_option("--points-per-decade", sweep.per_decade)->capture_default_str();
  sweep_cmd->add_option("--margin", sweep.margin, "error axis: margin above e(q)")
      ->capture_default_str();
  sweep_cmd->add_option("--trials", sweep.runs, "error axis: protocol runs per point")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out_path, "CSV output path (default stdout)");

  ParamOptions ttr_opts;
  std::string ttr_config;
  double ttr_rate = kSimRateBps;
  auto* ttr_cmd = app.add_subcommand("time-to-ready", "worst-link key accumulation time");
  ttr_opts.attach(ttr_cmd);
  ttr_cmd->add_option("--config", ttr_config, "network config (JSON)");
  ttr_cmd->add_option("--rate", ttr_rate, "uniform link rate in bits/s")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << USS_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (params_cmd->parsed()) return run_params(params_opts, out);
    if (run_cmd->parsed()) return run_run(run_opts, run_config, run_rate, run_q, run_message, out);
    if (attack_cmd->parsed()) return run_attack(attack_opts, attack, out);
    if (sweep_cmd->parsed()) return run_sweep(sweep_opts, sweep, out);
    if (ttr_cmd->parsed()) return run_time_to_ready(ttr_opts, ttr_config, ttr_rate, out);
  } catch (const ParameterError& e) {
    err << "error: invalid parameter " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace uss::cli
