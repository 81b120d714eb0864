#pragma once

// Iterative FROG trace inversion: principal-components generalized
// projections (PCGP) and a ptychographic per-delay engine, plus the
// scale-optimal trace error used to judge both.

#include <Eigen/Dense>
#include <numeric>
#include <optional>

#include "ambiguity.hpp"
#include "core.hpp"
#include "forward.hpp"
#include "parallel.hpp"
#include "signals.hpp"

namespace froglab {

using PulsePair = std::pair<Pulse, Pulse>;

struct TraceErrorResult {
  double g = 0.0;
  double mu = 0.0;
};

// mu = <Z_meas, Z_est> / <Z_est, Z_est>,  G = rms(Z_meas - mu Z_est) / max Z_meas.
inline TraceErrorResult trace_error(std::span<const double> estimate, std::span<const double> measured) {
  require(estimate.size() == measured.size() && !measured.empty(), "trace dimension mismatch");
  double cross = 0.0, self = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    cross += measured[i] * estimate[i];
    self += estimate[i] * estimate[i];
    peak = std::max(peak, measured[i]);
  }
  require(peak > 0.0, "measured trace is identically zero");
  TraceErrorResult out;
  out.mu = self > 0.0 ? cross / self : 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double d = measured[i] - out.mu * estimate[i];
    sum += d * d;
  }
  out.g = std::sqrt(sum / static_cast<double>(measured.size())) / peak;
  return out;
}

inline TraceErrorResult trace_error(const FrogTrace &estimate, const FrogTrace &measured) {
  require(estimate.rows() == measured.rows() && estimate.cols() == measured.cols(), "trace dimension mismatch");
  return trace_error(estimate.values(), measured.values());
}

enum class InitKind { GaussianRandomPhase, ProvidedGuess };
enum class ShgTie { AlignedAverage, LeftFactor };
enum class RankOneMethod { PowerStep, FullSvd };

struct ReconOptions {
  int max_iter = 1000;
  double tol = 1e-4;
  int restarts = 1;
  std::uint64_t seed = 0;
  double beta = 0.2;
  InitKind init = InitKind::GaussianRandomPhase;
  std::optional<PulsePair> guess;
  ShgTie shg_tie = ShgTie::AlignedAverage;
  RankOneMethod rank_one = RankOneMethod::PowerStep;

  void validate() const {
    require(max_iter >= 1, "max_iter must be at least 1");
    require(restarts >= 1, "restarts must be at least 1");
    require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0, 1]");
    require(tol >= 0.0, "tol must be nonnegative");
    require(init != InitKind::ProvidedGuess || guess.has_value(), "provided-guess initialization needs a guess");
  }
};

struct ReconReport {
  PulsePair estimate;
  std::vector<double> trace_error; // G per iteration / sweep, starting with the initial guess
  int iterations = 0;
  bool converged = false;
  double final_error = 0.0;
  double mu = 0.0;
  int restart_used = 0;
  std::optional<double> aligned_residual;
};

namespace detail {

// Current trace and the complex fields it came from, column-major by delay.
struct TraceFields {
  std::vector<std::vector<cplx>> columns; // columns[m][k] = Y[k, m]
  std::vector<double> intensity;          // row-major Z[k, m]
};

inline TraceFields compute_fields(const Pulse &x1, const Pulse &x2, const TraceGeometry &g) {
  TraceFields f;
  f.columns.resize(g.m_count);
  f.intensity.assign(g.n * g.m_count, 0.0);
  std::vector<cplx> y(g.n);
  for (std::size_t m = 0; m < g.m_count; ++m) {
    const auto d = g.delay_offset(m);
    for (std::size_t i = 0; i < g.n; ++i) y[i] = x1[i] * x2.at(static_cast<long long>(i) + d);
    f.columns[m] = fft(y);
    for (std::size_t k = 0; k < g.n; ++k) f.intensity[k * g.m_count + m] = std::norm(f.columns[m][k]);
  }
  return f;
}

inline void check_recon_input(const FrogTrace &t, bool require_unit_stride) {
  const auto &g = t.geometry();
  require(is_shg_family(g.kind), "reconstruction supports only SHG and blind SHG traces");
  if (require_unit_stride) require(g.l == 1, "PCGP requires L = 1 (one delay per sample)");
  require(t.max_value() > 0.0, "measured trace is identically zero");
}

// Scales both factors so the synthesized trace carries the measured energy.
inline void match_energy(Pulse &x1, Pulse &x2, const FrogTrace &t) {
  const auto f = compute_fields(x1, x2, t.geometry());
  const double have = std::accumulate(f.intensity.begin(), f.intensity.end(), 0.0);
  const double want = std::accumulate(t.values().begin(), t.values().end(), 0.0);
  if (have <= 0.0) return;
  const double s = std::pow(want / have, 0.25);
  for (auto &v : x1.mutable_values()) v *= s;
  for (auto &v : x2.mutable_values()) v *= s;
}

inline PulsePair initial_pair(const FrogTrace &t, const ReconOptions &opts, bool shg_mode, Rng &rng) {
  const auto n = t.geometry().n;
  PulsePair p;
  if (opts.init == InitKind::ProvidedGuess) {
    p = *opts.guess;
    require(p.first.size() == n && p.second.size() == n, "initial guess length does not match trace");
  } else {
    Pulse a = gaussian_random_phase_pulse(n, rng);
    Pulse b = shg_mode ? a : gaussian_random_phase_pulse(n, rng);
    p = {std::move(a), std::move(b)};
  }
  if (shg_mode) p.second = p.first;
  match_energy(p.first, p.second, t);
  return p;
}

// Symmetric merge of two factors that should agree up to a constant phase:
// x = (e^{-j theta/2} x1 + e^{j theta/2} x2) / 2 with theta = arg <x2, x1>.
inline Pulse aligned_average(const Pulse &x1, const Pulse &x2) {
  cplx inner{};
  for (std::size_t i = 0; i < x1.size(); ++i) inner += std::conj(x2[i]) * x1[i];
  const double theta = std::arg(inner);
  const auto a = std::polar(0.5, -theta / 2.0), b = std::polar(0.5, theta / 2.0);
  std::vector<cplx> out(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) out[i] = a * x1[i] + b * x2[i];
  return Pulse(std::move(out));
}

// Replace |Y| by sqrt(Z) keeping the phase; bins with |Y| == 0 are left as they are.
inline void project_magnitudes(std::vector<cplx> &column, const FrogTrace &t, std::size_t m) {
  for (std::size_t k = 0; k < column.size(); ++k) {
    const double a = std::abs(column[k]);
    if (a > 0.0) column[k] *= std::sqrt(std::max(t(k, m), 0.0)) / a;
  }
}

template <class Step>
ReconReport run_restarts(const FrogTrace &t, const ReconOptions &opts, bool shg_mode,
                         const std::optional<PulsePair> &truth, Step &&step) {
  std::vector<ReconReport> runs(static_cast<std::size_t>(opts.restarts));
  parallel_for(runs.size(), [&](std::size_t r) {
    Rng rng(derive_seed(opts.seed, r));
    auto pair = initial_pair(t, opts, shg_mode, rng);
    auto &rep = runs[r];
    auto err = trace_error(compute_fields(pair.first, pair.second, t.geometry()).intensity, t.values());
    rep.trace_error.push_back(err.g);
    int it = 0;
    while (it < opts.max_iter && err.g > opts.tol) {
      ++it;
      step(pair, rng);
      err = trace_error(compute_fields(pair.first, pair.second, t.geometry()).intensity, t.values());
      rep.trace_error.push_back(err.g);
    }
    rep.iterations = it;
    rep.final_error = err.g;
    rep.mu = err.mu;
    rep.converged = err.g <= opts.tol;
    rep.restart_used = static_cast<int>(r);
    rep.estimate = std::move(pair);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].final_error < runs[best].final_error) best = r;
  ReconReport out = std::move(runs[best]);
  // The continuous-shift search falls back to the discrete group, so it is
  // never worse; band-limited SHG pulses also admit sub-sample shifts.
  if (truth)
    out.aligned_residual =
        align_with_continuous_shift(out.estimate.first, out.estimate.second, truth->first, truth->second, shg_mode)
            .residual;
  return out;
}

} // namespace detail

// PCGP, one iteration:
//   (a) O[n, n'] = x1[n] x2[n']
//   (b) rotate to delay coordinates  O~[n, m] = O[n, n + s m]
//   (c) DFT every delay column over n
//   (d) replace magnitudes by sqrt(Z), keep phases
//   (e) inverse DFT and un-rotate
//   (f) rank-1 factors: x1 = O' conj(x2) / |x2|^2, x2 = O'^T conj(x1) / |x1|^2
// In shg_mode the two factors are then merged by their aligned average.
inline ReconReport pcgp_reconstruct(const FrogTrace &t, const ReconOptions &opts, bool shg_mode,
                                    const std::optional<PulsePair> &truth = std::nullopt) {
  opts.validate();
  detail::check_recon_input(t, true);
  const auto &g = t.geometry();
  const auto n = g.n;
  auto step = [&](PulsePair &pair, Rng &) {
    auto &[x1, x2] = pair;
    Eigen::MatrixXcd outer(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<cplx> y(n);
    for (std::size_t m = 0; m < n; ++m) {
      const auto d = g.delay_offset(m);
      for (std::size_t i = 0; i < n; ++i) y[i] = x1[i] * x2.at(static_cast<long long>(i) + d);
      auto col = detail::fft(y);
      detail::project_magnitudes(col, t, m);
      const auto back = detail::ifft(col);
      for (std::size_t i = 0; i < n; ++i)
        outer(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(wrap_index(static_cast<long long>(i) + d, n))) =
            back[i];
    }
    Eigen::VectorXcd a(static_cast<Eigen::Index>(n)), b(static_cast<Eigen::Index>(n));
    if (opts.rank_one == RankOneMethod::FullSvd) {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(outer, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const double s = std::sqrt(svd.singularValues()(0));
      a = s * svd.matrixU().col(0);
      b = s * svd.matrixV().col(0).conjugate();
    } else {
      const Eigen::Map<const Eigen::VectorXcd> v2(x2.values().data(), static_cast<Eigen::Index>(n));
      a = outer * v2.conjugate() / std::max(v2.squaredNorm(), 1e-300);
      b = outer.transpose() * a.conjugate() / std::max(a.squaredNorm(), 1e-300);
      // Balance the factor norms; their product is what the trace sees.
      const double na = a.norm(), nb = b.norm();
      if (na > 0.0 && nb > 0.0) {
        const double s = std::sqrt(nb / na);
        a *= s;
        b /= s;
      }
    }
    Pulse p1(std::vector<cplx>(a.data(), a.data() + n));
    Pulse p2(std::vector<cplx>(b.data(), b.data() + n));
    if (shg_mode) {
      p1 = opts.shg_tie == ShgTie::AlignedAverage ? detail::aligned_average(p1, p2) : p1;
      p2 = p1;
    }
    x1 = std::move(p1);
    x2 = std::move(p2);
  };
  return detail::run_restarts(t, opts, shg_mode, truth, step);
}

// Ptychographic engine, one sweep over the delays in random order:
//   y  = x1 * g,  g[n] = x2[n + d_m]
//   y' = IDFT( sqrt(Z[., m]) exp(j arg DFT y) )
//   x1 += beta conj(g) / max|g|^2 (y' - y)
//   x2[n + d_m] += beta conj(x1[n]) / max|x1|^2 (y' - y)[n]
// In shg_mode both corrections are applied to the single signal.
inline ReconReport ptycho_reconstruct(const FrogTrace &t, const ReconOptions &opts, bool shg_mode,
                                      const std::optional<PulsePair> &truth = std::nullopt) {
  opts.validate();
  detail::check_recon_input(t, false);
  const auto &g = t.geometry();
  const auto n = g.n;
  auto step = [&](PulsePair &pair, Rng &rng) {
    auto &[x1, x2] = pair;
    std::vector<std::size_t> order(g.m_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<cplx> gate(n), y(n);
    for (const auto m : order) {
      const auto d = g.delay_offset(m);
      double gate_peak = 0.0, probe_peak = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        gate[i] = x2.at(static_cast<long long>(i) + d);
        y[i] = x1[i] * gate[i];
        gate_peak = std::max(gate_peak, std::norm(gate[i]));
        probe_peak = std::max(probe_peak, std::norm(x1[i]));
      }
      auto col = detail::fft(y);
      detail::project_magnitudes(col, t, m);
      const auto updated = detail::ifft(col);
      auto &v1 = x1.mutable_values();
      auto &v2 = x2.mutable_values();
      const std::vector<cplx> old1(v1.begin(), v1.end());
      for (std::size_t i = 0; i < n; ++i) {
        const cplx diff = updated[i] - y[i];
        if (gate_peak > 0.0) v1[i] += opts.beta * std::conj(gate[i]) / gate_peak * diff;
        if (probe_peak > 0.0) {
          const auto j = wrap_index(static_cast<long long>(i) + d, n);
          (shg_mode ? v1 : v2)[j] += opts.beta * std::conj(old1[i]) / probe_peak * diff;
        }
      }
      if (shg_mode) x2 = x1;
    }
  };
  return detail::run_restarts(t, opts, shg_mode, truth, step);
}

} // namespace froglab
