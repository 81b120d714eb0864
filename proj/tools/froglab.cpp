// froglab: synthesize, invert and analyse FROG / blind-FROG traces.

#include <CLI11.hpp>

#include <froglab/commands.hpp>

namespace {

using namespace froglab::cli;

void add_source(CLI::App *cmd, SignalSource &src, bool with_bandlimit = true) {
  cmd->add_option("--signal", src.signal, "signal JSON for x1");
  cmd->add_option("--signal2", src.signal2, "signal JSON for x2 (bivariate gates)");
  cmd->add_option("--random", src.random_n, "draw random signals of length N instead of reading files");
  if (with_bandlimit) cmd->add_flag("--bandlimit", src.bandlimit, "zero the upper half of the x1 spectrum");
  cmd->add_option("--zero-run-start", src.zero_run_start, "first spectral bin of the zero run");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"FROG and blind-FROG trace synthesis, reconstruction and uniqueness experiments"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto *s = app.add_subcommand("synth", "synthesize a trace from signals");
  add_source(s, synth.source);
  s->add_option("--kind", synth.kind, "blind-shg | shg | thg | pg | crab")->capture_default_str();
  s->add_option("--l", synth.l, "delay stride L")->capture_default_str();
  s->add_option("--delay-sign", synth.delay_sign, "+1 or -1 for SHG gates (0 = default)");
  s->add_option("--noise-model", synth.noise_model, "none | gaussian | poisson")->capture_default_str();
  s->add_option("--noise-level", synth.noise_level, "relative std (gaussian) or peak counts (poisson)");
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--out-prefix", synth.out_prefix)->capture_default_str();
  s->add_flag("--timings", synth.timings, "add wall-clock timings to the report");

  ReconCliOptions recon;
  auto *r = app.add_subcommand("recon", "reconstruct signals from a trace");
  r->add_option("--trace", recon.trace, "trace CSV (sidecar JSON alongside)")->required();
  r->add_option("--algo", recon.algo, "pcgp | ptycho")->capture_default_str();
  r->add_option("--max-iter", recon.max_iter)->capture_default_str();
  r->add_option("--restarts", recon.restarts)->capture_default_str();
  r->add_option("--beta", recon.beta)->capture_default_str();
  r->add_option("--tol", recon.tol)->capture_default_str();
  r->add_option("--seed", recon.seed)->capture_default_str();
  r->add_option("--truth", recon.truth, "ground-truth x1 for the aligned residual");
  r->add_option("--truth2", recon.truth2, "ground-truth x2 (blind traces)");
  r->add_option("--out-prefix", recon.out_prefix)->capture_default_str();
  r->add_flag("--timings", recon.timings);

  VerifyCliOptions verify;
  bool full_band = false;
  auto *v = app.add_subcommand("verify", "run the uniqueness pipeline");
  add_source(v, verify.source, false);
  v->add_flag("--full-band", full_band, "draw random x1 without the spectral zero run");
  v->add_option("--mode", verify.mode, "oracle | gs")->capture_default_str();
  v->add_flag("--shg", verify.shg, "single-signal SHG FROG (x2 = x1)");
  v->add_option("--trials", verify.trials)->capture_default_str();
  v->add_flag("--strict", verify.strict, "fail when x1 violates the band-limit hypothesis");
  v->add_option("--gs-restarts", verify.gs_restarts)->capture_default_str();
  v->add_option("--gs-max-iter", verify.gs_max_iter)->capture_default_str();
  v->add_option("--seed", verify.seed)->capture_default_str();
  v->add_option("--out-prefix", verify.out_prefix)->capture_default_str();
  v->add_flag("--timings", verify.timings);

  AmbiguityCliOptions amb;
  auto *a = app.add_subcommand("ambiguity", "check trace invariance under the trivial ambiguities");
  add_source(a, amb.source);
  a->add_option("--kind", amb.kind)->capture_default_str();
  a->add_option("--l", amb.l)->capture_default_str();
  a->add_option("--draws", amb.draws)->capture_default_str();
  a->add_flag("--corrupt-shift", amb.corrupt_shift)->group(""); // negative control
  a->add_option("--seed", amb.seed)->capture_default_str();
  a->add_option("--out-prefix", amb.out_prefix)->capture_default_str();

  NullspaceCliOptions ns;
  auto *n = app.add_subcommand("nullspace", "null-space dimension of the phase system");
  n->add_option("--n", ns.n)->capture_default_str();
  n->add_option("--support", ns.support, "full | bandlimit | from-signal")->capture_default_str();
  n->add_option("--signal", ns.signal);
  n->add_option("--signal2", ns.signal2);
  n->add_option("--trials", ns.trials)->capture_default_str();
  n->add_option("--seed", ns.seed)->capture_default_str();
  n->add_option("--out-prefix", ns.out_prefix)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (s->parsed()) return run_command([&] { cmd_synth(synth); });
  if (r->parsed()) return run_command([&] { cmd_recon(recon); });
  if (v->parsed()) {
    verify.source.bandlimit = !full_band;
    return run_command([&] { cmd_verify(verify); });
  }
  if (a->parsed()) return run_command([&] { cmd_ambiguity(amb); });
  return run_command([&] { cmd_nullspace(ns); });
}
