#pragma once

// Command implementations behind the froglab executable. Each command takes
// a plain options struct, writes its artifacts under out_prefix, prints a
// short summary and returns normally; errors surface as exceptions and
// run_command maps them to exit codes (2 validation, 1 internal).

#include <chrono>
#include <iostream>
#include <map>
#include <optional>

#include "ambiguity.hpp"
#include "forward.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "recon.hpp"
#include "signals.hpp"
#include "uniqueness.hpp"

namespace froglab::cli {

using io::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;

template <class Fn> int run_command(Fn &&fn, std::ostream &err = std::cerr) {
  try {
    fn();
    return kExitOk;
  } catch (const ValidationError &e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

// Signal source shared by synth / verify / ambiguity.
struct SignalSource {
  std::optional<std::string> signal;
  std::optional<std::string> signal2;
  std::optional<std::size_t> random_n;
  bool bandlimit = false;
  std::optional<std::size_t> zero_run_start;
};

namespace detail {

inline std::string artifact(const std::string &prefix, const std::string &name) { return prefix + name; }

inline ZeroRun zero_run_for(const SignalSource &src, std::size_t n) {
  auto run = default_zero_run(n);
  if (src.zero_run_start) {
    require(*src.zero_run_start < n, "--zero-run-start must be below n");
    run.start = *src.zero_run_start;
  }
  return run;
}

// single: the gate uses only x1 (SHG, THG, PG), so x2 is a copy of x1.
inline PulsePair load_or_draw(const SignalSource &src, bool single, std::uint64_t seed) {
  require(src.signal.has_value() != src.random_n.has_value(), "give exactly one of --signal or --random");
  if (src.signal) {
    Pulse x1 = io::read_signal(*src.signal).signal;
    if (single) {
      require(!src.signal2, "this gate uses a single signal; --signal2 is not allowed");
      return {x1, x1};
    }
    Pulse x2 = src.signal2 ? io::read_signal(*src.signal2).signal : x1;
    require(x2.size() == x1.size(), "--signal and --signal2 have different lengths");
    return {std::move(x1), std::move(x2)};
  }
  const auto n = *src.random_n;
  require(n >= 2, "--random needs n >= 2");
  require(!src.signal2, "--signal2 cannot be combined with --random");
  Rng rng(seed);
  Pulse x1 = src.bandlimit ? random_bandlimited_pulse(n, rng, zero_run_for(src, n)) : random_pulse(n, rng);
  Pulse x2 = single ? x1 : random_pulse(n, rng);
  return {std::move(x1), std::move(x2)};
}

inline json source_json(const SignalSource &src) {
  json j;
  if (src.signal) {
    j["signal"] = *src.signal;
    if (src.signal2) j["signal2"] = *src.signal2;
  } else if (src.random_n) {
    j["random"] = {{"n", *src.random_n}, {"bandlimit", src.bandlimit}};
    if (src.zero_run_start) j["random"]["zero_run_start"] = *src.zero_run_start;
  }
  return j;
}

inline json bandlimit_json(const BandlimitCheck &b) {
  return {{"satisfied", b.satisfied},
          {"degenerate", b.degenerate},
          {"zero_run_start", b.zero_run_start},
          {"zero_run_length", b.zero_run_length}};
}

inline void write_spectrum(const std::string &path, const Pulse &x) {
  std::vector<std::vector<double>> rows;
  const auto p = power_spectrum(x);
  for (std::size_t k = 0; k < p.size(); ++k) rows.push_back({static_cast<double>(k), p[k]});
  io::write_table(path, {"k", "power"}, rows);
}

class Stopwatch {
public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Wall-clock timings would break byte-identical reruns, so they are opt-in.
inline void finish_report(json &report, const std::string &path, bool timings, const Stopwatch &clock) {
  if (timings) report["timings"] = {{"total_seconds", clock.seconds()}};
  io::write_json(path, report);
}

} // namespace detail

// ---- synth ------------------------------------------------------------------

struct SynthOptions {
  SignalSource source;
  std::string kind = "blind-shg";
  std::size_t l = 1;
  int delay_sign = 0; // 0 = default for the gate
  std::string noise_model = "none";
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  std::string out_prefix = "froglab_";
  bool timings = false;
};

inline void cmd_synth(const SynthOptions &o, std::ostream &out = std::cout) {
  detail::Stopwatch clock;
  const auto kind = parse_gate_kind(o.kind);
  const bool single = kind == GateKind::Shg || kind == GateKind::Thg || kind == GateKind::Pg;
  if (kind == GateKind::Shg) require(!o.source.signal2, "--kind shg takes a single signal; drop --signal2");
  const auto [x1, x2] = detail::load_or_draw(o.source, single, derive_seed(o.seed, 0));
  const auto geometry = o.delay_sign == 0 ? TraceGeometry::make(x1.size(), o.l, kind)
                                          : TraceGeometry::make(x1.size(), o.l, kind, o.delay_sign);
  const NoiseSpec noise{parse_noise_model(o.noise_model), o.noise_level, derive_seed(o.seed, 1)};
  const auto clean = synthesize_trace(x1, x2, geometry);
  const auto trace = add_noise(clean, noise);

  const auto p = o.out_prefix;
  io::write_trace(detail::artifact(p, "trace.csv"), trace, {o.seed, noise});
  io::write_signal(detail::artifact(p, "signal1.json"), x1, "x1");
  io::write_signal(detail::artifact(p, "signal2.json"), x2, "x2");
  detail::write_spectrum(detail::artifact(p, "spectrum1.csv"), x1);
  detail::write_spectrum(detail::artifact(p, "spectrum2.csv"), x2);

  const auto band = check_bandlimit(dft_forward(x1));
  json report;
  report["command"] = "synth";
  report["inputs"] = detail::source_json(o.source);
  report["options"] = {{"kind", std::string(to_string(kind))},
                       {"l", o.l},
                       {"delay_sign", geometry.delay_sign},
                       {"noise_model", std::string(to_string(noise.model))},
                       {"noise_level", noise.level}};
  report["seed"] = o.seed;
  report["metrics"] = {{"n", geometry.n},
                       {"m_count", geometry.m_count},
                       {"trace_max", trace.max_value()},
                       {"noise_relative_difference", relative_difference(trace, clean)},
                       {"bandlimit_x1", detail::bandlimit_json(band)}};
  detail::finish_report(report, detail::artifact(p, "report.json"), o.timings, clock);
  out << "synth: " << to_string(kind) << " trace " << geometry.n << "x" << geometry.m_count << " -> " << p
      << "trace.csv\n";
}

// ---- recon ------------------------------------------------------------------

struct ReconCliOptions {
  std::string trace;
  std::string algo = "ptycho";
  int max_iter = 1000;
  int restarts = 1;
  double beta = 0.2;
  double tol = 1e-4;
  std::uint64_t seed = 0;
  std::optional<std::string> truth;
  std::optional<std::string> truth2;
  std::string out_prefix = "froglab_";
  bool timings = false;
};

inline void cmd_recon(const ReconCliOptions &o, std::ostream &out = std::cout) {
  detail::Stopwatch clock;
  require(o.algo == "pcgp" || o.algo == "ptycho", "--algo must be pcgp or ptycho");
  const auto file = io::read_trace(o.trace);
  const auto &t = file.trace;
  const auto &g = t.geometry();
  require(is_shg_family(g.kind), "reconstruction supports only shg and blind-shg traces");
  if (o.algo == "pcgp") require(g.l == 1, "pcgp requires L = 1; this trace has L = " + std::to_string(g.l));
  const bool shg_mode = g.kind == GateKind::Shg;

  std::optional<PulsePair> truth;
  if (o.truth) {
    Pulse a = io::read_signal(*o.truth).signal;
    require(a.size() == g.n, "--truth length does not match the trace");
    Pulse b = a;
    if (o.truth2) {
      b = io::read_signal(*o.truth2).signal;
    } else {
      require(shg_mode, "blind traces need --truth2 for the gate signal");
    }
    require(b.size() == g.n, "--truth2 length does not match the trace");
    truth = PulsePair{std::move(a), std::move(b)};
  }

  ReconOptions ro;
  ro.max_iter = o.max_iter;
  ro.restarts = o.restarts;
  ro.beta = o.beta;
  ro.tol = o.tol;
  ro.seed = o.seed;
  const auto rep = o.algo == "pcgp" ? pcgp_reconstruct(t, ro, shg_mode, truth) : ptycho_reconstruct(t, ro, shg_mode, truth);
  const auto recon_trace = synthesize_trace(rep.estimate.first, rep.estimate.second, g);

  const auto p = o.out_prefix;
  io::write_signal(detail::artifact(p, "estimate1.json"), rep.estimate.first, "x1 estimate");
  io::write_signal(detail::artifact(p, "estimate2.json"), rep.estimate.second, "x2 estimate");
  io::write_trace(detail::artifact(p, "recon_trace.csv"), recon_trace, {o.seed, {}});
  std::vector<std::vector<double>> traj;
  for (std::size_t i = 0; i < rep.trace_error.size(); ++i) traj.push_back({static_cast<double>(i), rep.trace_error[i]});
  io::write_table(detail::artifact(p, "trajectory.csv"), {"iteration", "G"}, traj);

  json report;
  report["command"] = "recon";
  report["inputs"] = {{"trace", o.trace}};
  if (o.truth) report["inputs"]["truth"] = *o.truth;
  if (o.truth2) report["inputs"]["truth2"] = *o.truth2;
  report["options"] = {{"algo", o.algo},       {"max_iter", o.max_iter}, {"restarts", o.restarts},
                       {"beta", o.beta},       {"tol", o.tol},           {"shg_mode", shg_mode}};
  report["seed"] = o.seed;
  report["metrics"] = {{"G", rep.final_error},
                       {"mu", rep.mu},
                       {"iterations", rep.iterations},
                       {"converged", rep.converged},
                       {"restart_used", rep.restart_used}};
  if (rep.aligned_residual) report["metrics"]["aligned_residual"] = *rep.aligned_residual;
  detail::finish_report(report, detail::artifact(p, "report.json"), o.timings, clock);
  out << "recon: " << o.algo << " G = " << io::format_number(rep.final_error) << " after " << rep.iterations
      << " iterations" << (rep.converged ? " (converged)" : "");
  if (rep.aligned_residual) out << ", aligned residual " << io::format_number(*rep.aligned_residual);
  out << "\n";
}

// ---- verify -----------------------------------------------------------------

struct VerifyCliOptions {
  SignalSource source;
  std::string mode = "oracle";
  bool shg = false;
  int trials = 1;
  bool strict = false;
  int gs_restarts = 32;
  int gs_max_iter = 3000;
  std::uint64_t seed = 0;
  std::string out_prefix = "froglab_";
  bool timings = false;
};

inline VerifyMode parse_verify_mode(const std::string &s) {
  if (s == "oracle") return VerifyMode::OraclePhases;
  if (s == "gs") return VerifyMode::FullGs;
  throw ValidationError("--mode must be oracle or gs");
}

inline void cmd_verify(const VerifyCliOptions &o, std::ostream &out = std::cout) {
  detail::Stopwatch clock;
  require(o.trials >= 1, "--trials must be at least 1");
  const auto mode = parse_verify_mode(o.mode);
  const auto trials = static_cast<std::size_t>(o.trials);

  struct Trial {
    UniquenessReport report;
  };
  std::vector<Trial> results(trials);
  // Signals are drawn up front so a --strict failure is raised from this thread.
  std::vector<PulsePair> inputs;
  for (std::size_t i = 0; i < trials; ++i) {
    auto pair = detail::load_or_draw(o.source, o.shg, derive_seed(o.seed, 2 * i));
    if (o.strict && !check_bandlimit(dft_forward(pair.first)).satisfied)
      throw ValidationError("trial " + std::to_string(i) + ": x1 spectrum violates the band-limit hypothesis");
    inputs.push_back(std::move(pair));
  }
  parallel_for(trials, [&](std::size_t i) {
    VerifyOptions vo;
    vo.mode = mode;
    vo.shg = o.shg;
    vo.allow_hypothesis_violation = true;
    vo.gs.restarts = o.gs_restarts;
    vo.gs.max_iter = o.gs_max_iter;
    vo.seed = derive_seed(o.seed, 2 * i + 1);
    results[i].report = verify_uniqueness(inputs[i].first, inputs[i].second, vo);
  });

  std::size_t passed = 0, satisfied = 0;
  std::map<std::size_t, std::size_t> histogram;
  std::vector<std::vector<double>> residual_rows, row_rows;
  json per_trial = json::array();
  for (std::size_t i = 0; i < trials; ++i) {
    const auto &r = results[i].report;
    passed += r.passed;
    satisfied += r.hypothesis_satisfied;
    ++histogram[r.nullspace.dimension];
    residual_rows.push_back({static_cast<double>(i), r.aligned_residual, r.system_residual,
                             static_cast<double>(r.nullspace.dimension), static_cast<double>(r.rows_failed),
                             r.hypothesis_satisfied ? 1.0 : 0.0, r.passed ? 1.0 : 0.0});
    for (std::size_t k = 0; k < r.row_residuals.size(); ++k)
      row_rows.push_back({static_cast<double>(i), static_cast<double>(k), r.row_residuals[k],
                          r.row_converged[k] ? 1.0 : 0.0});
    per_trial.push_back({{"trial", i},
                         {"passed", r.passed},
                         {"hypothesis_satisfied", r.hypothesis_satisfied},
                         {"aligned_residual", r.aligned_residual},
                         {"system_residual", r.system_residual},
                         {"nullspace_dimension", r.nullspace.dimension},
                         {"rows_failed", r.rows_failed},
                         {"max_row_residual", *std::max_element(r.row_residuals.begin(), r.row_residuals.end())},
                         {"continuous_shift_used", r.continuous_shift_used},
                         {"fractional_shift", r.fractional_shift}});
  }

  const auto p = o.out_prefix;
  io::write_table(detail::artifact(p, "residuals.csv"),
                  {"trial", "aligned_residual", "system_residual", "nullspace_dimension", "rows_failed",
                   "hypothesis_satisfied", "passed"},
                  residual_rows);
  io::write_table(detail::artifact(p, "rows.csv"), {"trial", "k", "row_residual", "converged"}, row_rows);
  std::vector<std::vector<double>> hist_rows;
  json hist = json::object();
  for (const auto &[dim, count] : histogram) {
    hist_rows.push_back({static_cast<double>(dim), static_cast<double>(count)});
    hist[std::to_string(dim)] = count;
  }
  io::write_table(detail::artifact(p, "nullspace_hist.csv"), {"dimension", "count"}, hist_rows);

  json report;
  report["command"] = "verify";
  report["inputs"] = detail::source_json(o.source);
  report["options"] = {{"mode", std::string(to_string(mode))}, {"shg", o.shg},         {"trials", o.trials},
                       {"strict", o.strict},                    {"gs_restarts", o.gs_restarts},
                       {"gs_max_iter", o.gs_max_iter}};
  report["seed"] = o.seed;
  report["metrics"] = {{"pass_rate", static_cast<double>(passed) / static_cast<double>(trials)},
                       {"passed", passed},
                       {"hypothesis_satisfied", satisfied},
                       {"nullspace_histogram", hist},
                       {"trials", per_trial}};
  detail::finish_report(report, detail::artifact(p, "report.json"), o.timings, clock);
  out << "verify: " << passed << "/" << trials << " trials passed (" << to_string(mode) << " mode)\n";
}

// ---- ambiguity --------------------------------------------------------------

struct AmbiguityCliOptions {
  SignalSource source;
  std::string kind = "blind-shg";
  std::size_t l = 1;
  int draws = 4;
  bool corrupt_shift = false; // negative control
  std::uint64_t seed = 0;
  std::string out_prefix = "froglab_";
};

inline InvarianceReport cmd_ambiguity(const AmbiguityCliOptions &o, std::ostream &out = std::cout) {
  const auto kind = parse_gate_kind(o.kind);
  const bool single = kind == GateKind::Shg || kind == GateKind::Thg || kind == GateKind::Pg;
  if (kind == GateKind::Shg) require(!o.source.signal2, "--kind shg takes a single signal; drop --signal2");
  const auto [x1, x2] = detail::load_or_draw(o.source, single, derive_seed(o.seed, 0));
  const auto g = TraceGeometry::make(x1.size(), o.l, kind);
  InvarianceOptions opts;
  opts.seed = derive_seed(o.seed, 1);
  opts.draws = o.draws;
  opts.corrupt_shift = o.corrupt_shift;
  const auto rep = check_trace_invariance(x1, x2, g, opts);

  json lines = json::array();
  for (const auto &line : rep.lines) {
    const char *status = line.status == CheckStatus::Pass ? "PASS" : line.status == CheckStatus::Fail ? "FAIL" : "SKIP";
    out << status << "  " << line.name << "  max deviation " << io::format_number(line.max_deviation);
    if (!line.note.empty()) out << "  " << line.note;
    out << "\n";
    lines.push_back(
        {{"name", line.name}, {"status", status}, {"max_deviation", line.max_deviation}, {"note", line.note}});
  }
  json report;
  report["command"] = "ambiguity";
  report["inputs"] = detail::source_json(o.source);
  report["options"] = {{"kind", std::string(to_string(kind))},
                       {"l", o.l},
                       {"draws", o.draws},
                       {"corrupt_shift", o.corrupt_shift}};
  report["seed"] = o.seed;
  report["metrics"] = {{"passed", rep.passed}, {"lines", lines}};
  io::write_json(detail::artifact(o.out_prefix, "report.json"), report);
  return rep;
}

// ---- nullspace --------------------------------------------------------------

struct NullspaceCliOptions {
  std::size_t n = 8;
  std::string support = "full"; // full | bandlimit | from-signal
  std::optional<std::string> signal;
  std::optional<std::string> signal2;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out_prefix = "froglab_";
};

inline void cmd_nullspace(const NullspaceCliOptions &o, std::ostream &out = std::cout) {
  require(o.support == "full" || o.support == "bandlimit" || o.support == "from-signal",
          "--support must be full, bandlimit or from-signal");
  require(o.trials >= 1, "--trials must be at least 1");
  if (o.support == "from-signal") require(o.signal.has_value(), "--support from-signal needs --signal");
  else require(o.n >= 2, "--n must be at least 2");

  const auto trials = o.support == "from-signal" ? std::size_t{1} : static_cast<std::size_t>(o.trials);
  std::vector<NullspaceReport> reports(trials);
  parallel_for(trials, [&](std::size_t i) {
    PulsePair pair;
    if (o.support == "from-signal") {
      SignalSource src{o.signal, o.signal2, std::nullopt, false, std::nullopt};
      pair = detail::load_or_draw(src, false, 0);
    } else {
      SignalSource src{std::nullopt, std::nullopt, o.n, o.support == "bandlimit", std::nullopt};
      pair = detail::load_or_draw(src, false, derive_seed(o.seed, i));
    }
    const auto decomp = build_decomposition(power_spectrum(pair.first), power_spectrum(pair.second));
    const auto nn = static_cast<Eigen::Index>(decomp.n);
    const auto system = build_phase_system(decomp, Eigen::MatrixXd::Zero(nn, nn));
    reports[i] = analyze_nullspace(system);
  });

  std::map<std::size_t, std::size_t> histogram;
  json per_trial = json::array();
  for (std::size_t i = 0; i < trials; ++i) {
    const auto &r = reports[i];
    ++histogram[r.dimension];
    per_trial.push_back({{"trial", i},
                         {"dimension", r.dimension},
                         {"contains_constants", r.contains_constants},
                         {"constant_residual", r.constant_residual},
                         {"affine_residual", r.affine_residual},
                         {"system_shape", json::array({r.rows, static_cast<std::size_t>(r.basis.rows())})},
                         {"free_columns", r.free_columns}});
  }
  std::vector<std::vector<double>> hist_rows;
  json hist = json::object();
  std::size_t modal = 0, modal_count = 0;
  for (const auto &[dim, count] : histogram) {
    hist_rows.push_back({static_cast<double>(dim), static_cast<double>(count)});
    hist[std::to_string(dim)] = count;
    if (count > modal_count) {
      modal = dim;
      modal_count = count;
    }
  }
  io::write_table(detail::artifact(o.out_prefix, "nullspace_hist.csv"), {"dimension", "count"}, hist_rows);
  json report;
  report["command"] = "nullspace";
  report["inputs"] = {{"support", o.support}};
  if (o.signal) report["inputs"]["signal"] = *o.signal;
  if (o.signal2) report["inputs"]["signal2"] = *o.signal2;
  report["options"] = {{"n", o.n}, {"trials", o.trials}};
  report["seed"] = o.seed;
  report["metrics"] = {{"modal_dimension", modal}, {"histogram", hist}, {"trials", per_trial}};
  io::write_json(detail::artifact(o.out_prefix, "report.json"), report);
  const auto &first = per_trial.front();
  out << "nullspace: " << o.support << " support, modal dimension " << modal << " over " << trials
      << " trial(s); system " << first["system_shape"][0].get<std::size_t>() << "x"
      << first["system_shape"][1].get<std::size_t>() << "\n";
}

} // namespace froglab::cli
