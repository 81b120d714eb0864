#pragma once

// Seeded signal generators used by the CLI, the test suites and the
// reconstruction initializers.

#include <cstdint>
#include <random>

#include "core.hpp"

namespace froglab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (seed, stream index); used for per-row,
// per-column, per-restart and per-trial generators.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

using Rng = std::mt19937_64;

inline cplx complex_normal(Rng &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

inline Pulse random_pulse(std::size_t n, Rng &rng) {
  std::vector<cplx> v(n);
  for (auto &s : v) s = complex_normal(rng);
  return Pulse(std::move(v));
}

// Circular block of spectral bins forced to zero.
struct ZeroRun {
  std::size_t start = 0;
  std::size_t length = 0;

  bool contains(std::size_t k, std::size_t n) const {
    return length > 0 && wrap_index(static_cast<long long>(k) - static_cast<long long>(start), n) < length;
  }
};

// Zero run over [ceil(N/2), N), which always meets the ceil((N-1)/2) requirement.
inline ZeroRun default_zero_run(std::size_t n) { return {(n + 1) / 2, n - (n + 1) / 2}; }

inline std::size_t required_zero_run(std::size_t n) { return n / 2; } // == ceil((N-1)/2)

// IID complex Gaussian spectrum outside the zero run, then inverse DFT.
inline Pulse random_bandlimited_pulse(std::size_t n, Rng &rng, ZeroRun run) {
  require(run.length < n, "zero run must leave at least one spectral bin");
  std::vector<cplx> spec(n);
  for (std::size_t k = 0; k < n; ++k)
    if (!run.contains(k, n)) spec[k] = complex_normal(rng);
  return dft_inverse(Spectrum(std::move(spec)));
}

inline Pulse random_bandlimited_pulse(std::size_t n, Rng &rng) {
  return random_bandlimited_pulse(n, rng, default_zero_run(n));
}

// Gaussian envelope centred in the window with independent uniform phases.
inline Pulse gaussian_random_phase_pulse(std::size_t n, Rng &rng, double fwhm_fraction = 0.25) {
  const double sigma = std::max(1.0, fwhm_fraction * static_cast<double>(n) / 2.3548200450309493);
  const double centre = static_cast<double>(n) / 2.0;
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  std::vector<cplx> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - centre;
    v[i] = std::polar(std::exp(-0.5 * t * t / (sigma * sigma)), phase(rng));
  }
  return Pulse(std::move(v));
}

} // namespace froglab
