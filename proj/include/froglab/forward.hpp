#pragma once

// Gate products and FROG / blind-FROG trace synthesis.
//
//   BlindShg, Shg : y_m[n] = x1[n] * x2[n + d]              d = delay_sign * m * L
//   Thg           : y_m[n] = x1[n]^2 * x1[n - mL]
//   Pg            : y_m[n] = x1[n] * |x1[n - mL]|
//   Crab          : y_m[n] = x1[n] * exp(j * Re x2[n - mL])
//
//   Z[k, m] = |DFT(y_m)[k]|^2

#include <random>

#include "core.hpp"
#include "signals.hpp"

namespace froglab {

namespace detail {

inline void check_pair(const Pulse &x1, const Pulse &x2, const TraceGeometry &g) {
  g.validate();
  require(x1.size() == g.n && x2.size() == g.n, "pulse length does not match trace geometry");
  if (g.kind == GateKind::Shg) require(x1 == x2, "SHG FROG requires x2 == x1");
}

} // namespace detail

inline Pulse gate_product(const Pulse &x1, const Pulse &x2, std::size_t m, const TraceGeometry &g) {
  detail::check_pair(x1, x2, g);
  require(m < g.m_count, "delay index out of range");
  const auto d = g.delay_offset(m);
  std::vector<cplx> y(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const auto n = static_cast<long long>(i);
    switch (g.kind) {
    case GateKind::BlindShg:
    case GateKind::Shg: y[i] = x1[i] * x2.at(n + d); break;
    case GateKind::Thg: y[i] = x1[i] * x1[i] * x1.at(n + d); break;
    case GateKind::Pg: y[i] = x1[i] * std::abs(x1.at(n + d)); break;
    case GateKind::Crab: y[i] = x1[i] * std::polar(1.0, x2.at(n + d).real()); break;
    }
  }
  return Pulse(std::move(y));
}

inline std::vector<double> power_spectrum(const Pulse &x) {
  const auto s = dft_forward(x);
  std::vector<double> p(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) p[k] = std::norm(s[k]);
  return p;
}

inline FrogTrace synthesize_trace(const Pulse &x1, const Pulse &x2, const TraceGeometry &g) {
  detail::check_pair(x1, x2, g);
  FrogTrace z(g);
  for (std::size_t m = 0; m < g.m_count; ++m) {
    const auto col = detail::fft(gate_product(x1, x2, m, g).values());
    for (std::size_t k = 0; k < g.n; ++k) z(k, m) = std::norm(col[k]);
  }
  return z;
}

// Same trace from the spectra alone, using
//   Y[k, m] = (1/N) sum_l x1^[k - l] x2^[l] exp(2 pi j s m l / N),   s = delay_sign,
// which for each k is an inverse DFT over l of u_k[l] = x1^[k - l] x2^[l].
inline FrogTrace synthesize_trace_spectral(const Pulse &x1, const Pulse &x2, const TraceGeometry &g) {
  detail::check_pair(x1, x2, g);
  require(g.l == 1, "spectral synthesis requires L = 1");
  require(is_shg_family(g.kind), "spectral synthesis supports only SHG and blind SHG gates");
  const auto n = g.n;
  const auto s1 = dft_forward(x1);
  const auto s2 = dft_forward(x2);
  FrogTrace z(g);
  std::vector<cplx> u(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l)
      u[l] = s1.at(static_cast<long long>(k) - static_cast<long long>(l)) * s2[l];
    const auto y = detail::ifft(u);
    for (std::size_t m = 0; m < n; ++m) {
      const auto idx = g.delay_sign > 0 ? m : wrap_index(-static_cast<long long>(m), n);
      z(k, m) = std::norm(y[idx]);
    }
  }
  return z;
}

enum class NoiseModel { None, AdditiveGaussian, Poisson };

inline std::string_view to_string(NoiseModel model) {
  switch (model) {
  case NoiseModel::None: return "none";
  case NoiseModel::AdditiveGaussian: return "gaussian";
  case NoiseModel::Poisson: return "poisson";
  }
  return "unknown";
}

inline NoiseModel parse_noise_model(std::string_view name) {
  for (auto model : {NoiseModel::None, NoiseModel::AdditiveGaussian, NoiseModel::Poisson})
    if (to_string(model) == name) return model;
  throw ValidationError("unknown noise model '" + std::string(name) + "'");
}

// Gaussian: level is the standard deviation relative to the trace peak.
// Poisson: level is the expected photon count at the trace peak.
struct NoiseSpec {
  NoiseModel model = NoiseModel::None;
  double level = 0.0;
  std::uint64_t seed = 0;
};

// Noise is drawn column by column from derive_seed(seed, m), so the result
// is independent of evaluation order. Entries are clamped at zero.
inline FrogTrace add_noise(const FrogTrace &t, const NoiseSpec &spec) {
  require(spec.level >= 0.0 && std::isfinite(spec.level), "noise level must be finite and nonnegative");
  if (spec.model == NoiseModel::None) return t;
  if (spec.model == NoiseModel::AdditiveGaussian && spec.level == 0.0) return t;
  const double peak = t.max_value();
  if (peak <= 0.0) return t;

  FrogTrace out = t;
  if (spec.model == NoiseModel::Poisson && spec.level == 0.0) {
    std::fill(out.mutable_values().begin(), out.mutable_values().end(), 0.0);
    return out;
  }
  for (std::size_t m = 0; m < t.cols(); ++m) {
    Rng rng(derive_seed(spec.seed, m));
    for (std::size_t k = 0; k < t.rows(); ++k) {
      double v = t(k, m);
      if (spec.model == NoiseModel::AdditiveGaussian) {
        std::normal_distribution<double> noise(0.0, spec.level * peak);
        v += noise(rng);
      } else {
        const double scale = spec.level / peak;
        const double mean = v * scale;
        if (mean > 0.0) {
          std::poisson_distribution<long long> counts(mean);
          v = static_cast<double>(counts(rng)) / scale;
        } else {
          v = 0.0;
        }
      }
      out(k, m) = std::max(v, 0.0);
    }
  }
  return out;
}

} // namespace froglab
