// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
// Usage: froglab_acceptance <path to froglab executable>

#include <froglab/ambiguity.hpp>
#include <froglab/forward.hpp>
#include <froglab/io.hpp>
#include <froglab/oracle.hpp>
#include <froglab/recon.hpp>
#include <froglab/uniqueness.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>

using namespace froglab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char *name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

PulsePair draw_pair(Rng &rng, std::size_t n, bool shg) {
  Pulse x1 = random_bandlimited_pulse(n, rng);
  Pulse x2 = shg ? x1 : random_pulse(n, rng);
  return {std::move(x1), std::move(x2)};
}

// 1. Fast synthesis vs the direct-sum oracle.
Outcome oracle_equivalence() {
  constexpr double kTol = 1e-10;
  double worst = 0.0;
  Rng rng(101);
  for (std::size_t n = 3; n <= 64; ++n)
    for (std::size_t l : {1u, 2u, 4u}) {
      if (l > n) continue;
      for (auto kind : {GateKind::BlindShg, GateKind::Shg, GateKind::Thg, GateKind::Pg, GateKind::Crab}) {
        const auto g = TraceGeometry::make(n, l, kind);
        for (int pair = 0; pair < 50; ++pair) {
          const auto x1 = random_pulse(n, rng);
          const auto x2 = kind == GateKind::Shg ? x1 : random_pulse(n, rng);
          worst = std::max(worst, relative_difference(synthesize_trace(x1, x2, g), oracle::direct_trace(x1, x2, g)));
        }
      }
    }
  return {worst < kTol, "max relative error " + fmt("%.3g", worst) + " (tol 1e-10)"};
}

// 2. Spectral convolution route vs time-domain synthesis.
Outcome spectral_identity() {
  constexpr double kTol = 1e-10;
  double worst = 0.0;
  Rng rng(202);
  for (std::size_t n = 4; n <= 64; ++n)
    for (int pair = 0; pair < 50; ++pair) {
      const bool shg = pair % 2 == 1;
      const auto x1 = random_pulse(n, rng);
      const auto x2 = shg ? x1 : random_pulse(n, rng);
      const auto g = TraceGeometry::make(n, 1, shg ? GateKind::Shg : GateKind::BlindShg);
      worst = std::max(worst, relative_difference(synthesize_trace_spectral(x1, x2, g), synthesize_trace(x1, x2, g)));
    }
  return {worst < kTol, "max relative error " + fmt("%.3g", worst) + " (tol 1e-10)"};
}

// 3. Trivial-ambiguity invariance plus the asymmetric-shift negative control.
Outcome invariance() {
  constexpr double kTol = 1e-10;
  double worst = 0.0;
  std::size_t controls = 0, controls_failed = 0, lines = 0;
  Rng rng(303);
  for (std::size_t n : {4u, 8u, 16u, 32u})
    for (int pair = 0; pair < 100; ++pair) {
      const auto x1 = random_pulse(n, rng), x2 = random_pulse(n, rng);
      const auto g = TraceGeometry::make(n, 1, GateKind::BlindShg);
      InvarianceOptions opts;
      opts.seed = rng();
      opts.draws = 1;
      opts.tolerance = kTol;
      const auto rep = check_trace_invariance(x1, x2, g, opts);
      for (const auto &line : rep.lines) {
        if (line.status == CheckStatus::Skipped) return {false, "unexpected skip: " + line.name};
        worst = std::max(worst, line.max_deviation);
        ++lines;
      }
      opts.corrupt_shift = true;
      ++controls;
      controls_failed += check_trace_invariance(x1, x2, g, opts).lines[1].status == CheckStatus::Fail;
    }
  const bool ok = worst < kTol && controls_failed == controls && lines == 4 * 400;
  return {ok, "max deviation " + fmt("%.3g", worst) + " over " + std::to_string(lines) + " checks; negative controls failed " +
                  std::to_string(controls_failed) + "/" + std::to_string(controls)};
}

// 4. Null-space dimension of the phase system.
Outcome nullspace_dimension() {
  Rng rng(404);
  std::string bad;
  double worst_constant = 0.0;
  for (std::size_t n = 3; n <= 16; ++n)
    for (int draw = 0; draw < 5; ++draw) {
      const auto x1 = random_pulse(n, rng), x2 = random_pulse(n, rng);
      const auto d = build_decomposition(power_spectrum(x1), power_spectrum(x2), spectral_phases(x1, x2));
      const auto r = analyze_nullspace(build_phase_system(d, *d.phase_sum));
      worst_constant = std::max(worst_constant, r.constant_residual);
      if (r.dimension != 2 || r.constant_residual >= 1e-10)
        bad += " full N=" + std::to_string(n) + " dim=" + std::to_string(r.dimension);
    }
  std::string rates;
  for (std::size_t n : {6u, 8u, 12u, 16u}) {
    int two = 0;
    for (int draw = 0; draw < 20; ++draw) {
      const auto [x1, x2] = draw_pair(rng, n, false);
      const auto d = build_decomposition(power_spectrum(x1), power_spectrum(x2), spectral_phases(x1, x2));
      two += analyze_nullspace(build_phase_system(d, *d.phase_sum)).dimension == 2;
    }
    rates += " N=" + std::to_string(n) + ":" + std::to_string(two) + "/20";
    if (two < 19) bad += " bandlimited N=" + std::to_string(n);
  }
  return {bad.empty(), "full support dim 2 for N=3..16, constant residual " + fmt("%.3g", worst_constant) +
                           "; band-limited" + rates + bad};
}

// 5. Oracle-phase pipeline, blind pairs and SHG single signals.
Outcome oracle_pipeline() {
  std::string detail;
  bool ok = true;
  for (bool shg : {false, true})
    for (std::size_t n : {6u, 8u, 12u, 16u}) {
      Rng rng(derive_seed(505, 2 * n + shg));
      int passed = 0;
      for (int trial = 0; trial < 100; ++trial) {
        const auto [x1, x2] = draw_pair(rng, n, shg);
        VerifyOptions o;
        o.shg = shg;
        o.seed = derive_seed(5050, static_cast<std::uint64_t>(trial));
        passed += verify_uniqueness(x1, x2, o).aligned_residual < 1e-8;
      }
      ok &= passed >= 95;
      detail += std::string(shg ? " shg" : " blind") + " N=" + std::to_string(n) + ":" + std::to_string(passed);
    }
  return {ok, "trials with aligned residual < 1e-8 (of 100, need 95):" + detail};
}

// 6. Full alternating-projection pipeline with failure attribution.
Outcome gs_pipeline() {
  Rng rng(606);
  int passed = 0, unattributed = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto [x1, x2] = draw_pair(rng, 8, false);
    VerifyOptions o;
    o.mode = VerifyMode::FullGs;
    o.gs.restarts = 32;
    o.seed = derive_seed(6060, static_cast<std::uint64_t>(trial));
    const auto r = verify_uniqueness(x1, x2, o);
    if (r.aligned_residual < 1e-4) ++passed;
    else if (r.rows_failed == 0) ++unattributed;
  }
  return {passed >= 30 && unattributed == 0, std::to_string(passed) + "/50 trials < 1e-4 (need 30); failures without a "
                                             "non-converged row: " + std::to_string(unattributed)};
}

// 7. Exhaustive grid search on small band-limited rows.
Outcome small_n_certification() {
  constexpr std::size_t kQ = 8;
  Rng rng(707);
  std::uniform_int_distribution<int> digit(0, kQ - 1);
  std::uniform_real_distribution<double> mag(0.2, 1.5);
  int rows = 0, inequivalent = 0, truth_missing = 0;
  for (std::size_t n : {3u, 4u})
    for (int trial = 0; trial < 100; ++trial) {
      // Support: a circular block leaving at least ceil((N-1)/2) zeros.
      const std::size_t max_support = n - required_zero_run(n);
      const std::size_t support = 1 + rng() % max_support;
      const std::size_t start = rng() % n;
      std::vector<double> m(n, 0.0), truth(n, 0.0);
      std::vector<cplx> u(n);
      for (std::size_t i = 0; i < support; ++i) {
        const auto idx = (start + i) % n;
        m[idx] = mag(rng);
        truth[idx] = kTwoPi * digit(rng) / static_cast<double>(kQ);
        u[idx] = std::polar(m[idx], truth[idx]);
      }
      const auto s = dft_forward(Pulse(u));
      std::vector<double> spec(n);
      for (std::size_t k = 0; k < n; ++k) spec[k] = std::norm(s[k]);
      const auto matches = oracle::exhaustive_row_search(m, spec, kQ, 1e-9);
      bool found = false;
      for (const auto &a : matches) {
        found |= oracle::rows_equivalent(m, truth, a);
        for (const auto &b : matches) inequivalent += !oracle::rows_equivalent(m, a, b);
      }
      truth_missing += !found;
      ++rows;
    }
  return {inequivalent == 0 && truth_missing == 0,
          std::to_string(rows) + " rows, inequivalent match pairs " + std::to_string(inequivalent) +
              ", rows missing the truth " + std::to_string(truth_missing)};
}

// 8. Synthetic SHG reconstruction benchmark, N = 64.
Outcome reconstruction() {
  constexpr std::size_t kN = 64;
  constexpr int kRuns = 20;
  int pcgp_ok = 0, ptycho_ok = 0, pcgp_noisy = 0, ptycho_noisy = 0;
  const auto g = TraceGeometry::make(kN, 1, GateKind::Shg);
  for (int run = 0; run < kRuns; ++run) {
    Rng rng(derive_seed(808, static_cast<std::uint64_t>(run)));
    const auto x = random_bandlimited_pulse(kN, rng);
    const PulsePair truth{x, x};
    const auto clean = synthesize_trace(x, x, g);
    const auto noisy = add_noise(clean, {NoiseModel::AdditiveGaussian, 0.01, derive_seed(8080, run)});

    ReconOptions pc;
    pc.restarts = 8;
    pc.max_iter = 5000;
    pc.tol = 1e-4;
    pc.seed = derive_seed(81, static_cast<std::uint64_t>(run));
    ReconOptions pt;
    pt.beta = 0.2;
    pt.max_iter = 1000;
    pt.tol = 1e-4;
    pt.seed = derive_seed(82, static_cast<std::uint64_t>(run));

    pcgp_ok += pcgp_reconstruct(clean, pc, true).final_error < 1e-4;
    ptycho_ok += ptycho_reconstruct(clean, pt, true).final_error < 1e-4;
    // The noisy trace has a floor far above tol, so every run uses its full budget;
    // PCGP gets 1000 iterations per restart here.
    pc.max_iter = 1000;
    pcgp_noisy += *pcgp_reconstruct(noisy, pc, true, truth).aligned_residual < 5e-2;
    ptycho_noisy += *ptycho_reconstruct(noisy, pt, true, truth).aligned_residual < 5e-2;
  }
  const bool ok = pcgp_ok >= 10 && ptycho_ok >= 14 && pcgp_noisy >= 10 && ptycho_noisy >= 10;
  return {ok, "noiseless G<1e-4: pcgp " + std::to_string(pcgp_ok) + "/20 (need 10), ptycho " + std::to_string(ptycho_ok) +
                  "/20 (need 14); 1% noise residual<5e-2: pcgp " + std::to_string(pcgp_noisy) + "/20, ptycho " +
                  std::to_string(ptycho_noisy) + "/20 (need 10)"};
}

// 9. Byte-identical CLI artifacts across two runs.
Outcome cli_reproducibility(const std::string &exe) {
  if (exe.empty() || !fs::exists(exe)) return {false, "froglab executable not found: '" + exe + "'"};
  const auto root = fs::temp_directory_path() / "froglab_acceptance_cli";
  fs::remove_all(root);
  for (const char *run : {"a", "b"}) {
    const auto dir = root / run;
    fs::create_directories(dir);
    const std::string base = "\"" + exe + "\" ";
    const std::string synth = base + "synth --random 16 --bandlimit --kind blind-shg --noise-model poisson "
                                     "--noise-level 500 --seed 9 --out-prefix \"" + (dir / "synth_").string() + "\"";
    const std::string verify = base + "verify --random 8 --trials 10 --seed 4 --out-prefix \"" +
                               (dir / "verify_").string() + "\"";
    const std::string quiet = " > \"" + (dir / "log.txt").string() + "\" 2>&1";
    if (std::system((synth + quiet).c_str()) != 0 || std::system((verify + quiet).c_str()) != 0)
      return {false, "CLI run failed; see " + (dir / "log.txt").string()};
    fs::remove(dir / "log.txt");
  }
  std::size_t files = 0;
  for (const auto &entry : fs::directory_iterator(root / "a")) {
    const auto other = root / "b" / entry.path().filename();
    if (!fs::exists(other) || io::read_text(entry.path()) != io::read_text(other))
      return {false, "differs: " + entry.path().filename().string()};
    ++files;
  }
  fs::remove_all(root);
  return {files >= 10, std::to_string(files) + " files byte-identical"};
}

} // namespace

int main(int argc, char **argv) {
  const std::string exe = argc > 1 ? argv[1] : "";
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", 30, oracle_equivalence},
      {2, "spectral identity", 10, spectral_identity},
      {3, "ambiguity invariance", 30, invariance},
      {4, "null-space dimension", 60, nullspace_dimension},
      {5, "oracle-phase pipeline", 300, oracle_pipeline},
      {6, "full GS pipeline", 600, gs_pipeline},
      {7, "small-N exhaustive certification", 300, small_n_certification},
      {8, "N=64 SHG reconstruction", 900, reconstruction},
      {9, "CLI reproducibility", 60, [&] { return cli_reproducibility(exe); }},
  };
  int failures = 0;
  for (const auto &c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs < c.budget_seconds;
    const bool pass = o.pass && in_budget;
    failures += !pass;
    std::printf("%s criterion %d (%s): %s [%.1f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_seconds, in_budget ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
