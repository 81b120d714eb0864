#pragma once

// Domain types shared by every froglab module: circular sample sequences,
// trace geometry, the FROG trace container, and the DFT convention.
//
// DFT convention: forward is unnormalized with kernel exp(-2*pi*j*k*n/N),
// inverse carries the 1/N factor. Everything else in the library relies on
// exactly this pairing.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace froglab {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Raised for precondition violations on user-supplied data. The CLI maps it
// to exit code 2; anything else escaping a command is an internal error.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string &message) {
  if (!condition) throw ValidationError(message);
}

// ((i mod n) + n) mod n for any signed i.
inline std::size_t wrap_index(long long i, std::size_t n) {
  const auto nn = static_cast<long long>(n);
  return static_cast<std::size_t>(((i % nn) + nn) % nn);
}

struct TimeDomain {};
struct FrequencyDomain {};

// Length-N complex sequence with periodic indexing. The tag keeps time
// samples and spectral coefficients from being mixed up.
template <class Domain>
class CircularSequence {
public:
  CircularSequence() = default;

  explicit CircularSequence(std::vector<cplx> values) : values_(std::move(values)) {
    require(values_.size() >= 2, "sequence length must be at least 2");
    for (const auto &v : values_)
      require(std::isfinite(v.real()) && std::isfinite(v.imag()), "sequence contains non-finite samples");
  }

  CircularSequence(std::initializer_list<cplx> values) : CircularSequence(std::vector<cplx>(values)) {}

  static CircularSequence zeros(std::size_t n) { return CircularSequence(std::vector<cplx>(n, cplx{})); }

  std::size_t size() const noexcept { return values_.size(); }

  cplx &operator[](std::size_t i) { return values_[i]; }
  const cplx &operator[](std::size_t i) const { return values_[i]; }

  // Periodic access: at(i) == (*this)[i mod N] for any integer i.
  const cplx &at(long long i) const { return values_[wrap_index(i, values_.size())]; }

  std::span<const cplx> values() const noexcept { return values_; }
  std::vector<cplx> &mutable_values() noexcept { return values_; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  double energy() const {
    double e = 0.0;
    for (const auto &v : values_) e += std::norm(v);
    return e;
  }

  friend bool operator==(const CircularSequence &, const CircularSequence &) = default;

private:
  std::vector<cplx> values_;
};

using Pulse = CircularSequence<TimeDomain>;
using Spectrum = CircularSequence<FrequencyDomain>;

enum class GateKind { BlindShg, Shg, Thg, Pg, Crab };

inline std::string_view to_string(GateKind kind) {
  switch (kind) {
  case GateKind::BlindShg: return "blind-shg";
  case GateKind::Shg: return "shg";
  case GateKind::Thg: return "thg";
  case GateKind::Pg: return "pg";
  case GateKind::Crab: return "crab";
  }
  return "unknown";
}

inline GateKind parse_gate_kind(std::string_view name) {
  for (auto kind : {GateKind::BlindShg, GateKind::Shg, GateKind::Thg, GateKind::Pg, GateKind::Crab})
    if (to_string(kind) == name) return kind;
  if (name == "blind" || name == "blindshg") return GateKind::BlindShg;
  throw ValidationError("unknown gate kind '" + std::string(name) + "'");
}

// SHG-type gates follow x1[n] x2[n + m L]; the higher-order gates are written
// with the delay on the other side, x[n - m L].
inline int default_delay_sign(GateKind kind) {
  return (kind == GateKind::BlindShg || kind == GateKind::Shg) ? +1 : -1;
}

inline bool is_shg_family(GateKind kind) { return kind == GateKind::BlindShg || kind == GateKind::Shg; }

struct TraceGeometry {
  std::size_t n = 0;
  std::size_t l = 1;
  std::size_t m_count = 0;
  GateKind kind = GateKind::BlindShg;
  int delay_sign = +1;

  // Delays are {0, L, 2L, ...} with ceil(N/L) entries, wrapping modulo N.
  static TraceGeometry make(std::size_t n, std::size_t l, GateKind kind) {
    require(n >= 2, "signal length must be at least 2");
    require(l >= 1 && l <= n, "delay stride must satisfy 1 <= L <= N");
    TraceGeometry g{n, l, (n + l - 1) / l, kind, default_delay_sign(kind)};
    return g;
  }

  static TraceGeometry make(std::size_t n, std::size_t l, GateKind kind, int delay_sign) {
    auto g = make(n, l, kind);
    g.delay_sign = delay_sign;
    g.validate();
    return g;
  }

  void validate() const {
    require(n >= 2, "signal length must be at least 2");
    require(l >= 1 && l <= n, "delay stride must satisfy 1 <= L <= N");
    require(m_count * l >= n && m_count == (n + l - 1) / l, "delay count must equal ceil(N/L)");
    require(delay_sign == 1 || delay_sign == -1, "delay sign must be +1 or -1");
  }

  // Signed sample offset of delay column m. Higher-order gates always use -mL.
  long long delay_offset(std::size_t m) const {
    const auto d = static_cast<long long>(m * l);
    return is_shg_family(kind) ? delay_sign * d : -d;
  }

  friend bool operator==(const TraceGeometry &, const TraceGeometry &) = default;
};

// Z[k, m]: N frequency rows by m_count delay columns, stored row-major.
class FrogTrace {
public:
  FrogTrace() = default;

  explicit FrogTrace(TraceGeometry geometry)
      : geometry_(geometry), values_(geometry.n * geometry.m_count, 0.0) {
    geometry_.validate();
  }

  FrogTrace(TraceGeometry geometry, std::vector<double> values) : geometry_(geometry), values_(std::move(values)) {
    geometry_.validate();
    require(values_.size() == geometry_.n * geometry_.m_count, "trace value count does not match geometry");
    for (double v : values_) require(std::isfinite(v) && v >= 0.0, "trace entries must be finite and nonnegative");
  }

  const TraceGeometry &geometry() const noexcept { return geometry_; }
  std::size_t rows() const noexcept { return geometry_.n; }
  std::size_t cols() const noexcept { return geometry_.m_count; }

  double &operator()(std::size_t k, std::size_t m) { return values_[k * geometry_.m_count + m]; }
  double operator()(std::size_t k, std::size_t m) const { return values_[k * geometry_.m_count + m]; }

  std::span<const double> values() const noexcept { return values_; }
  std::vector<double> &mutable_values() noexcept { return values_; }

  double max_value() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

private:
  TraceGeometry geometry_{};
  std::vector<double> values_;
};

namespace detail {

inline Eigen::FFT<double> &fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

inline std::vector<cplx> fft(std::span<const cplx> in) {
  std::vector<cplx> src(in.begin(), in.end());
  std::vector<cplx> out;
  fft_engine().fwd(out, src);
  return out;
}

// Includes the 1/N factor.
inline std::vector<cplx> ifft(std::span<const cplx> in) {
  std::vector<cplx> src(in.begin(), in.end());
  std::vector<cplx> out;
  fft_engine().inv(out, src);
  return out;
}

} // namespace detail

inline Spectrum dft_forward(const Pulse &x) { return Spectrum(detail::fft(x.values())); }

inline Pulse dft_inverse(const Spectrum &s) { return Pulse(detail::ifft(s.values())); }

// out[n] = x[n - n0]
inline Pulse circular_shift(const Pulse &x, long long n0) {
  const auto n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x.at(static_cast<long long>(i) - n0);
  return Pulse(std::move(out));
}

inline double relative_difference(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "size mismatch in relative_difference");
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return scale > 0.0 ? diff / scale : diff;
}

// Max entrywise deviation relative to the larger trace's peak.
inline double relative_difference(const FrogTrace &a, const FrogTrace &b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "trace dimension mismatch");
  return relative_difference(a.values(), b.values());
}

} // namespace froglab
