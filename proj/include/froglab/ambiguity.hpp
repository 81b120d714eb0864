#pragma once

// Trivial ambiguities of (blind) FROG and an ambiguity-aware distance.
//
// Canonical order of a transform: conjugate reflection, joint circular shift,
// opposite-sign modulation, then global phases.
//
// Reflection acts as x1' = conj(x2[-n]), x2' = conj(x1[-n]). Reflecting both
// signals without exchanging them turns delay m into -m, which leaves a blind
// trace unchanged only when x1 == x2; with the exchange the gate products
// become conj(y_m[-n - d]) for every delay grid. For x1 == x2 the two forms
// coincide.

#include <array>
#include <limits>
#include <optional>
#include <random>

#include "core.hpp"
#include "forward.hpp"
#include "signals.hpp"

namespace froglab {

struct AmbiguityTransform {
  double psi1 = 0.0;
  double psi2 = 0.0;
  long long n0 = 0;
  bool reflect = false;
  long long k0 = 0;
};

namespace detail {

inline Pulse conj_reflect(const Pulse &x) {
  const auto n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::conj(x.at(-static_cast<long long>(i)));
  return Pulse(std::move(out));
}

inline Pulse modulate(const Pulse &x, double sign, long long k0) {
  const auto n = x.size();
  std::vector<cplx> out(n);
  const auto kk = static_cast<long long>(wrap_index(k0, n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto phase_index = static_cast<long long>(wrap_index(kk * static_cast<long long>(i), n));
    out[i] = x[i] * std::polar(1.0, sign * kTwoPi * static_cast<double>(phase_index) / static_cast<double>(n));
  }
  return Pulse(std::move(out));
}

inline Pulse rotate(const Pulse &x, double psi) {
  std::vector<cplx> out(x.begin(), x.end());
  const auto w = std::polar(1.0, psi);
  for (auto &v : out) v *= w;
  return Pulse(std::move(out));
}

inline double angle_distance(double a, double b) { return std::abs(std::remainder(a - b, kTwoPi)); }

} // namespace detail

// shg_mode requires the transform to keep x1 == x2: equal phases and
// 2 k0 = 0 mod N (k0 = N/2 multiplies every delay column by (-1)^m).
inline std::pair<Pulse, Pulse> apply_transform(const Pulse &x1, const Pulse &x2, const AmbiguityTransform &t,
                                               bool shg_mode = false) {
  require(x1.size() == x2.size(), "pulse length mismatch");
  const auto n = x1.size();
  if (shg_mode) {
    require(detail::angle_distance(t.psi1, t.psi2) < 1e-15, "SHG mode requires psi1 == psi2");
    require(wrap_index(2 * t.k0, n) == 0, "SHG mode allows only k0 = 0 or N/2");
  }
  Pulse a = x1, b = x2;
  if (t.reflect) {
    Pulse ra = detail::conj_reflect(b);
    Pulse rb = detail::conj_reflect(a);
    a = std::move(ra);
    b = std::move(rb);
  }
  if (t.n0 != 0) {
    a = circular_shift(a, t.n0);
    b = circular_shift(b, t.n0);
  }
  if (wrap_index(t.k0, n) != 0) {
    a = detail::modulate(a, -1.0, t.k0);
    b = detail::modulate(b, +1.0, t.k0);
  }
  a = detail::rotate(a, t.psi1);
  // k0 = N/2 gives the same factor on both copies; keep them bitwise equal.
  if (shg_mode) return {a, a};
  return {a, detail::rotate(b, t.psi2)};
}

struct AlignmentResult {
  AmbiguityTransform transform;
  double residual = 0.0;
};

// Exhaustive search over reflect x n0 x k0 (k0 in {0, N/2} in shg_mode) with the
// global phases in closed form. For fixed (reflect, n0) the inner products
// over all k0 are a single DFT, so the sweep costs O(N^2 log N). Ties go to
// the lexicographically first (reflect, n0, k0).
inline AlignmentResult align_up_to_ambiguities(const Pulse &cand1, const Pulse &cand2, const Pulse &ref1,
                                               const Pulse &ref2, bool shg_mode) {
  const auto n = ref1.size();
  require(cand1.size() == n && cand2.size() == n && ref2.size() == n, "pulse length mismatch");
  const double ref_energy = ref1.energy() + ref2.energy();
  require(ref_energy > 0.0, "reference pair has zero energy");
  const double cand_energy = cand1.energy() + cand2.energy();

  AmbiguityTransform best;
  double best_err = std::numeric_limits<double>::infinity();
  std::vector<cplx> w1(n), w2(n);
  for (int r = 0; r < 2; ++r) {
    const bool reflect = r == 1;
    const Pulse b1 = reflect ? detail::conj_reflect(cand2) : cand1;
    const Pulse b2 = reflect ? detail::conj_reflect(cand1) : cand2;
    for (std::size_t s = 0; s < n; ++s) {
      const auto n0 = static_cast<long long>(s);
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<long long>(i);
        w1[i] = std::conj(b1.at(ii - n0)) * ref1[i];
        w2[i] = std::conj(b2.at(ii - n0)) * ref2[i];
      }
      // <c1', r1>(k0) = sum_n w1[n] e^{+2 pi j k0 n / N};  <c2', r2>(k0) = sum_n w2[n] e^{-2 pi j k0 n / N}
      std::vector<cplx> ip1, ip2;
      if (shg_mode) {
        ip1.assign(n % 2 == 0 ? 2 : 1, cplx{});
        ip2.assign(ip1.size(), cplx{});
        for (std::size_t i = 0; i < n; ++i) {
          ip1[0] += w1[i];
          ip2[0] += w2[i];
          if (ip1.size() == 2) {
            const double sign = i % 2 == 0 ? 1.0 : -1.0;
            ip1[1] += sign * w1[i];
            ip2[1] += sign * w2[i];
          }
        }
      } else {
        ip1 = detail::ifft(w1);
        for (auto &v : ip1) v *= static_cast<double>(n);
        ip2 = detail::fft(w2);
      }
      for (std::size_t k = 0; k < ip1.size(); ++k) {
        const double err = ref_energy + cand_energy - 2.0 * (std::abs(ip1[k]) + std::abs(ip2[k]));
        if (err < best_err - 1e-12 * ref_energy) {
          best_err = err;
          const auto k0 = shg_mode ? static_cast<long long>(k * (n / 2)) : static_cast<long long>(k);
          best = {std::arg(ip1[k]), std::arg(ip2[k]), n0, reflect, k0};
        }
      }
    }
  }
  if (shg_mode) best.psi2 = best.psi1 = std::arg(std::polar(1.0, best.psi1) + std::polar(1.0, best.psi2));

  // Recompute directly: the expanded form above cancels catastrophically near zero.
  const auto [c1, c2] = apply_transform(cand1, cand2, best, false);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) err += std::norm(ref1[i] - c1[i]) + std::norm(ref2[i] - c2[i]);
  return {best, std::sqrt(err / ref_energy)};
}

struct ContinuousAlignment {
  AlignmentResult discrete;
  // Joint delay (in samples, possibly fractional) applied after the discrete transform.
  double fractional_shift = 0.0;
  double residual = 0.0;
};

// Delays a pair by tau samples through the spectral ramp exp(-2 pi j k' tau / N),
// k' counted from `origin` so the ramp is continuous across the occupied band.
inline std::pair<Pulse, Pulse> fractional_shift(const Pulse &x1, const Pulse &x2, double tau, std::size_t origin) {
  const auto n = x1.size();
  auto s1 = dft_forward(x1), s2 = dft_forward(x2);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<double>(wrap_index(static_cast<long long>(k) - static_cast<long long>(origin), n));
    const auto ramp = std::polar(1.0, -kTwoPi * kk * tau / static_cast<double>(n));
    s1[k] *= ramp;
    s2[k] *= ramp;
  }
  return {dft_inverse(s1), dft_inverse(s2)};
}

// Alignment over reflect x k0 (k0 in {0, N/2} in shg_mode) with a closed-form joint
// delay tau in place of the integer shift grid. Only meaningful where the data
// cannot pin the linear spectral phase, e.g. SHG with both spectra inside a
// half band, where fractional delays leave the trace unchanged. Falls back to
// the discrete result when that is better.
inline ContinuousAlignment align_with_continuous_shift(const Pulse &cand1, const Pulse &cand2, const Pulse &ref1,
                                                       const Pulse &ref2, bool shg_mode) {
  ContinuousAlignment out;
  out.discrete = align_up_to_ambiguities(cand1, cand2, ref1, ref2, shg_mode);
  out.residual = out.discrete.residual;
  const auto n = ref1.size();
  const double ref_energy = ref1.energy() + ref2.energy();
  const auto ra = dft_forward(ref1), rb = dft_forward(ref2);

  // Band origin: first bin after the longest circular run of empty bins.
  std::vector<double> power(n);
  double peak = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    power[k] = std::norm(ra[k]) + std::norm(rb[k]);
    peak = std::max(peak, power[k]);
  }
  std::size_t origin = 0, best_run = 0;
  for (std::size_t start = 0; start < n; ++start) {
    std::size_t run = 0;
    while (run < n && power[(start + run) % n] <= 1e-24 * peak) ++run;
    if (run > best_run && run < n) {
      best_run = run;
      origin = (start + run) % n;
    }
  }

  std::vector<std::size_t> k0_values;
  if (shg_mode) {
    k0_values.push_back(0);
    if (n % 2 == 0) k0_values.push_back(n / 2);
  } else {
    for (std::size_t k0 = 0; k0 < n; ++k0) k0_values.push_back(k0);
  }
  for (int r = 0; r < 2; ++r)
    for (const auto k0 : k0_values) {
      AmbiguityTransform t;
      t.reflect = r == 1;
      t.k0 = static_cast<long long>(k0);
      const auto [a1, a2] = apply_transform(cand1, cand2, t, false);
      const auto ca = dft_forward(a1), cb = dft_forward(a2);

      // Slope of the residual spectral phase from consecutive-bin products.
      cplx slope{};
      for (std::size_t j = 0; j + 1 < n; ++j) {
        const auto k = (origin + j) % n, k1 = (origin + j + 1) % n;
        slope += ra[k1] * std::conj(ca[k1]) * std::conj(ra[k] * std::conj(ca[k]));
        slope += rb[k1] * std::conj(cb[k1]) * std::conj(rb[k] * std::conj(cb[k]));
      }
      const double tau = std::abs(slope) > 0.0 ? -std::arg(slope) * static_cast<double>(n) / kTwoPi : 0.0;
      const auto [s1, s2] = fractional_shift(a1, a2, tau, origin);

      cplx ip1{}, ip2{};
      for (std::size_t i = 0; i < n; ++i) {
        ip1 += std::conj(s1[i]) * ref1[i];
        ip2 += std::conj(s2[i]) * ref2[i];
      }
      double psi1 = std::arg(ip1), psi2 = std::arg(ip2);
      if (shg_mode) psi1 = psi2 = std::arg(std::polar(1.0, psi1) + std::polar(1.0, psi2));
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        err += std::norm(ref1[i] - s1[i] * std::polar(1.0, psi1)) + std::norm(ref2[i] - s2[i] * std::polar(1.0, psi2));
      const double residual = std::sqrt(err / ref_energy);
      if (residual < out.residual) {
        out.residual = residual;
        out.fractional_shift = tau;
        out.discrete.transform = {psi1, psi2, 0, t.reflect, t.k0};
        out.discrete.residual = residual;
      }
    }
  return out;
}

enum class CheckStatus { Pass, Fail, Skipped };

inline std::string_view to_string(CheckStatus s) {
  switch (s) {
  case CheckStatus::Pass: return "PASS";
  case CheckStatus::Fail: return "FAIL";
  case CheckStatus::Skipped: return "SKIPPED";
  }
  return "?";
}

struct InvarianceLine {
  std::string name;
  CheckStatus status = CheckStatus::Skipped;
  double max_deviation = 0.0;
  std::string note;
};

struct InvarianceReport {
  std::array<InvarianceLine, 4> lines;
  bool passed = true;
};

struct InvarianceOptions {
  std::uint64_t seed = 0;
  int draws = 4;
  double tolerance = 1e-10;
  // Negative control: the shift is applied to x1 only.
  bool corrupt_shift = false;
};

namespace detail {

// Trace of a pair that may no longer satisfy x1 == x2 (negative controls on
// SHG input): fall back to the identical blind formula.
inline FrogTrace trace_of(const Pulse &x1, const Pulse &x2, TraceGeometry g) {
  if (g.kind == GateKind::Shg && !(x1 == x2)) g.kind = GateKind::BlindShg;
  return synthesize_trace(x1, x2, g);
}

} // namespace detail

// Applies each trivial ambiguity with random parameters and measures the
// relative trace deviation. Transforms that are not ambiguities of the
// chosen gate are reported as skipped.
inline InvarianceReport check_trace_invariance(const Pulse &x1, const Pulse &x2, const TraceGeometry &g,
                                               const InvarianceOptions &opts = {}) {
  const auto reference = synthesize_trace(x1, x2, g);
  const auto n = static_cast<long long>(g.n);
  const bool single = g.kind != GateKind::BlindShg && g.kind != GateKind::Crab;
  Rng rng(opts.seed);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  std::uniform_int_distribution<long long> index(1, n - 1);

  InvarianceReport report;
  const char *names[] = {"global-phase", "shift", "conjugate-reflection", "modulation"};
  for (std::size_t i = 0; i < report.lines.size(); ++i) report.lines[i].name = names[i];

  const bool reflect_applies = is_shg_family(g.kind);
  const bool modulation_applies = g.kind == GateKind::BlindShg;
  if (!reflect_applies) report.lines[2].note = "skipped (not an ambiguity of this gate)";
  if (!modulation_applies)
    report.lines[3].note = g.kind == GateKind::Crab ? "skipped (not an ambiguity of this gate)"
                                                    : "skipped (bivariate-only)";

  for (std::size_t which = 0; which < 4; ++which) {
    auto &line = report.lines[which];
    if ((which == 2 && !reflect_applies) || (which == 3 && !modulation_applies)) continue;
    for (int d = 0; d < opts.draws; ++d) {
      AmbiguityTransform t;
      std::pair<Pulse, Pulse> moved{x1, x2};
      switch (which) {
      case 0:
        t.psi1 = phase(rng);
        t.psi2 = single ? t.psi1 : (g.kind == GateKind::Crab ? 0.0 : phase(rng));
        moved = apply_transform(x1, x2, t);
        break;
      case 1:
        t.n0 = index(rng);
        if (opts.corrupt_shift)
          moved = {circular_shift(x1, t.n0), x2};
        else
          moved = apply_transform(x1, x2, t);
        break;
      case 2:
        t.reflect = true;
        moved = apply_transform(x1, x2, t);
        break;
      default:
        t.k0 = index(rng);
        moved = apply_transform(x1, x2, t);
        break;
      }
      const auto dev = relative_difference(reference, detail::trace_of(moved.first, moved.second, g));
      line.max_deviation = std::max(line.max_deviation, dev);
    }
    line.status = line.max_deviation < opts.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
    if (line.status == CheckStatus::Fail) report.passed = false;
  }
  return report;
}

} // namespace froglab
