#pragma once

#include <froglab/core.hpp>
#include <froglab/signals.hpp>

#include <initializer_list>

namespace froglab::testing {

inline Pulse pulse(std::initializer_list<cplx> v) { return Pulse(std::vector<cplx>(v)); }

inline Pulse delta(std::size_t n, std::size_t at = 0) {
  std::vector<cplx> v(n);
  v[at] = 1.0;
  return Pulse(std::move(v));
}

template <class A, class B> double max_abs_diff(const A &a, const B &b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

template <class A> double max_abs(const A &a) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i]));
  return worst;
}

} // namespace froglab::testing
