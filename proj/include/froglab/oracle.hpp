#pragma once

// Brute-force reference implementations. Nothing here calls the fast paths
// it certifies: gate products, transforms and index arithmetic are written
// out again as literal sums.

#include <Eigen/Dense>

#include "core.hpp"

namespace froglab::oracle {

// Z[k, m] = |sum_n y_m[n] exp(-2 pi j k n / N)|^2 by explicit summation.
inline FrogTrace direct_trace(const Pulse &x1, const Pulse &x2, const TraceGeometry &g) {
  g.validate();
  require(x1.size() == g.n && x2.size() == g.n, "pulse length does not match trace geometry");
  if (g.kind == GateKind::Shg) require(x1 == x2, "SHG FROG requires x2 == x1");
  const long long n = static_cast<long long>(g.n);
  auto mod = [n](long long i) { return static_cast<std::size_t>(((i % n) + n) % n); };

  // Kernel values e^{-2 pi j r / N} for r = (k n) mod N.
  std::vector<double> cos_table(g.n), sin_table(g.n);
  for (long long r = 0; r < n; ++r) {
    const double angle = -kTwoPi * static_cast<double>(r) / static_cast<double>(n);
    cos_table[static_cast<std::size_t>(r)] = std::cos(angle);
    sin_table[static_cast<std::size_t>(r)] = std::sin(angle);
  }

  FrogTrace z(g);
  std::vector<cplx> y(g.n);
  for (std::size_t m = 0; m < g.m_count; ++m) {
    const long long step = static_cast<long long>(m) * static_cast<long long>(g.l);
    for (long long i = 0; i < n; ++i) {
      const cplx a = x1[static_cast<std::size_t>(i)];
      switch (g.kind) {
      case GateKind::BlindShg:
      case GateKind::Shg: y[i] = a * x2[mod(i + g.delay_sign * step)]; break;
      case GateKind::Thg: y[i] = a * a * x1[mod(i - step)]; break;
      case GateKind::Pg: y[i] = a * std::abs(x1[mod(i - step)]); break;
      case GateKind::Crab: {
        const double theta = x2[mod(i - step)].real();
        y[i] = a * cplx(std::cos(theta), std::sin(theta));
        break;
      }
      }
    }
    for (long long k = 0; k < n; ++k) {
      double re = 0.0, im = 0.0;
      for (long long i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>((k * i) % n);
        const double c = cos_table[r], s = sin_table[r];
        re += y[i].real() * c - y[i].imag() * s;
        im += y[i].real() * s + y[i].imag() * c;
      }
      z(static_cast<std::size_t>(k), m) = re * re + im * im;
    }
  }
  return z;
}

// Every grid phase assignment {2 pi i / q} on the support of row_magnitudes
// whose Fourier magnitudes match sqrt(row_spectrum) to within
// tol * max sqrt(row_spectrum). Entries off the support carry phase 0.
inline std::vector<std::vector<double>> exhaustive_row_search(std::span<const double> row_magnitudes,
                                                              std::span<const double> row_spectrum, std::size_t q,
                                                              double tol) {
  const std::size_t n = row_magnitudes.size();
  require(n == row_spectrum.size(), "row magnitude / spectrum length mismatch");
  require(n >= 1 && n <= 6, "exhaustive search is limited to N <= 6");
  require(q >= 1 && q <= 16, "exhaustive search is limited to q <= 16");
  require(tol >= 0.0, "tolerance must be nonnegative");

  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < n; ++i)
    if (row_magnitudes[i] > 0.0) support.push_back(i);

  std::vector<double> target(n);
  double scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    target[k] = std::sqrt(std::max(row_spectrum[k], 0.0));
    scale = std::max(scale, target[k]);
  }

  std::vector<std::vector<double>> matches;
  std::vector<std::size_t> digits(support.size(), 0);
  std::vector<double> phases(n, 0.0);
  while (true) {
    for (std::size_t s = 0; s < support.size(); ++s)
      phases[support[s]] = kTwoPi * static_cast<double>(digits[s]) / static_cast<double>(q);
    double worst = 0.0;
    for (std::size_t k = 0; k < n && worst <= tol * scale; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t i : support) {
        const double angle = phases[i] - kTwoPi * static_cast<double>((k * i) % n) / static_cast<double>(n);
        re += row_magnitudes[i] * std::cos(angle);
        im += row_magnitudes[i] * std::sin(angle);
      }
      worst = std::max(worst, std::abs(std::hypot(re, im) - target[k]));
    }
    if (worst <= tol * scale) matches.push_back(phases);

    std::size_t pos = 0;
    while (pos < digits.size() && ++digits[pos] == q) digits[pos++] = 0;
    if (pos == digits.size()) break;
  }
  return matches;
}

// True if the two rows (same temporal magnitudes) agree up to a global phase,
// or up to a global phase after conjugate reflection u[n] -> conj(u[-n]).
inline bool rows_equivalent(std::span<const double> magnitudes, std::span<const double> phase_a,
                            std::span<const double> phase_b, double tol = 1e-9) {
  const std::size_t n = magnitudes.size();
  std::vector<cplx> a(n), b(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = magnitudes[i] * cplx(std::cos(phase_a[i]), std::sin(phase_a[i]));
    b[i] = magnitudes[i] * cplx(std::cos(phase_b[i]), std::sin(phase_b[i]));
  }
  for (std::size_t i = 0; i < n; ++i) r[i] = std::conj(a[(n - i) % n]);
  auto same_up_to_phase = [&](const std::vector<cplx> &u, const std::vector<cplx> &v) {
    cplx inner{};
    double eu = 0.0, ev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      inner += std::conj(u[i]) * v[i];
      eu += std::norm(u[i]);
      ev += std::norm(v[i]);
    }
    if (eu == 0.0 && ev == 0.0) return true;
    const double dist2 = eu + ev - 2.0 * std::abs(inner);
    return dist2 <= tol * std::max(eu, ev);
  };
  return same_up_to_phase(a, b) || same_up_to_phase(r, b);
}

struct NullspaceResult {
  std::size_t dimension = 0;
  Eigen::MatrixXd basis; // columns, orthonormal
  double sigma_max = 0.0;
};

// Right singular vectors with sigma <= threshold * sigma_max, plus any
// directions beyond the row count.
inline NullspaceResult numeric_nullspace(const Eigen::MatrixXd &matrix, double threshold) {
  require(matrix.rows() > 0 && matrix.cols() > 0, "numeric_nullspace needs a nonempty matrix");
  require(matrix.allFinite(), "numeric_nullspace needs a finite matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeFullV);
  const auto &sv = svd.singularValues();
  NullspaceResult out;
  out.sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const auto cols = matrix.cols();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < cols; ++i) {
    const double s = i < sv.size() ? sv(i) : 0.0;
    if (s <= threshold * out.sigma_max) keep.push_back(i);
  }
  out.dimension = keep.size();
  out.basis.resize(cols, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) out.basis.col(static_cast<Eigen::Index>(j)) = svd.matrixV().col(keep[j]);
  return out;
}

} // namespace froglab::oracle
