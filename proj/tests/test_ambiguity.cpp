#include <gtest/gtest.h>

#include <froglab/ambiguity.hpp>

#include "helpers.hpp"

using namespace froglab;
using froglab::testing::delta;

namespace {

AmbiguityTransform random_transform(Rng &rng, std::size_t n, bool shg) {
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  std::uniform_int_distribution<long long> index(0, static_cast<long long>(n) - 1);
  AmbiguityTransform t;
  t.psi1 = phase(rng);
  t.psi2 = shg ? t.psi1 : phase(rng);
  t.n0 = index(rng);
  t.reflect = rng() % 2 == 1;
  t.k0 = shg ? 0 : index(rng);
  return t;
}

} // namespace

TEST(ApplyTransform, IdentityLeavesPairUnchanged) {
  Rng rng(1);
  const auto x1 = random_pulse(8, rng), x2 = random_pulse(8, rng);
  const auto [a, b] = apply_transform(x1, x2, AmbiguityTransform{});
  EXPECT_EQ(a, x1);
  EXPECT_EQ(b, x2);
}

TEST(ApplyTransform, ShiftedDeltaKeepsTrace) {
  const auto d = delta(6);
  AmbiguityTransform t;
  t.n0 = 1;
  const auto [a, b] = apply_transform(d, d, t, true);
  EXPECT_EQ(a, delta(6, 1));
  EXPECT_EQ(b, delta(6, 1));
  const auto g = TraceGeometry::make(6, 1, GateKind::Shg);
  EXPECT_EQ(relative_difference(synthesize_trace(a, b, g), synthesize_trace(d, d, g)), 0.0);
}

TEST(ApplyTransform, EachTransformAloneKeepsBlindTrace) {
  Rng rng(2);
  const auto x1 = random_pulse(16, rng), x2 = random_pulse(16, rng);
  const auto g = TraceGeometry::make(16, 1, GateKind::BlindShg);
  const auto z = synthesize_trace(x1, x2, g);
  std::vector<AmbiguityTransform> ts(4);
  ts[0].psi1 = 0.7;
  ts[0].psi2 = -2.1;
  ts[1].n0 = 5;
  ts[2].reflect = true;
  ts[3].k0 = 3;
  for (const auto &t : ts) {
    const auto [a, b] = apply_transform(x1, x2, t);
    EXPECT_LT(relative_difference(synthesize_trace(a, b, g), z), 1e-10);
  }
}

TEST(ApplyTransform, ShgModeRestrictions) {
  const auto d = delta(8);
  AmbiguityTransform t;
  t.psi1 = 0.1;
  EXPECT_THROW(apply_transform(d, d, t, true), ValidationError);
  t = {};
  t.k0 = 1;
  EXPECT_THROW(apply_transform(d, d, t, true), ValidationError);
  t.k0 = 4; // N/2: both copies pick up (-1)^n
  EXPECT_NO_THROW(apply_transform(d, d, t, true));
}

TEST(ApplyTransform, HalfBandModulationIsShgAmbiguity) {
  Rng rng(3);
  const auto x = random_pulse(12, rng);
  AmbiguityTransform t;
  t.k0 = 6;
  const auto [a, b] = apply_transform(x, x, t, true);
  EXPECT_EQ(a, b);
  const auto g = TraceGeometry::make(12, 1, GateKind::Shg);
  EXPECT_LT(relative_difference(synthesize_trace(a, b, g), synthesize_trace(x, x, g)), 1e-12);
}

TEST(Align, RecoversRandomGroupElements) {
  Rng rng(4);
  for (std::size_t n : {4u, 8u, 16u})
    for (int trial = 0; trial < 100; ++trial) {
      const bool shg = trial % 4 == 0;
      const auto x1 = random_pulse(n, rng);
      const auto x2 = shg ? x1 : random_pulse(n, rng);
      const auto t = random_transform(rng, n, shg);
      const auto [c1, c2] = apply_transform(x1, x2, t, shg);
      const auto r = align_up_to_ambiguities(c1, c2, x1, x2, shg);
      EXPECT_LT(r.residual, 1e-10) << "N=" << n << " trial " << trial;
      const auto [b1, b2] = apply_transform(c1, c2, r.transform);
      EXPECT_LT(froglab::testing::max_abs_diff(b1, x1), 1e-9);
      EXPECT_LT(froglab::testing::max_abs_diff(b2, x2), 1e-9);
    }
}

TEST(Align, GlobalPhaseRecovered) {
  Rng rng(5);
  const auto x1 = random_pulse(8, rng), x2 = random_pulse(8, rng);
  std::vector<cplx> a(x1.values().begin(), x1.values().end()), b(x2.values().begin(), x2.values().end());
  for (auto &v : a) v *= std::polar(1.0, kPi / 3);
  for (auto &v : b) v *= std::polar(1.0, kPi / 3);
  const auto r = align_up_to_ambiguities(Pulse(a), Pulse(b), x1, x2, false);
  EXPECT_LT(r.residual, 1e-12);
  EXPECT_FALSE(r.transform.reflect);
  EXPECT_EQ(r.transform.n0, 0);
  EXPECT_EQ(r.transform.k0, 0);
  // The search maps the candidate back onto the reference, so the phase is -pi/3.
  EXPECT_LT(std::abs(std::remainder(r.transform.psi1 + kPi / 3, kTwoPi)), 1e-12);
  EXPECT_LT(std::abs(std::remainder(r.transform.psi2 + kPi / 3, kTwoPi)), 1e-12);
}

TEST(Align, SmallPerturbationGivesProportionalResidual) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x1 = random_pulse(16, rng), x2 = random_pulse(16, rng);
    const double scale = std::sqrt((x1.energy() + x2.energy()) / 32.0);
    std::vector<cplx> a(x1.values().begin(), x1.values().end()), b(x2.values().begin(), x2.values().end());
    std::vector<cplx> e(32);
    double en = 0.0;
    for (auto &v : e) {
      v = complex_normal(rng);
      en += std::norm(v);
    }
    const double k = 1e-3 * scale * std::sqrt(32.0 / en);
    for (std::size_t i = 0; i < 16; ++i) {
      a[i] += k * e[i];
      b[i] += k * e[16 + i];
    }
    const double r = align_up_to_ambiguities(Pulse(a), Pulse(b), x1, x2, false).residual;
    EXPECT_GE(r, 1e-4);
    EXPECT_LE(r, 1e-2);
  }
}

TEST(Align, ResidualSymmetricUnderSwap) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x1 = random_pulse(8, rng), x2 = random_pulse(8, rng);
    const auto y1 = random_pulse(8, rng), y2 = random_pulse(8, rng);
    // Equal total energy makes the relative residual a symmetric distance.
    const double s = std::sqrt((x1.energy() + x2.energy()) / (y1.energy() + y2.energy()));
    std::vector<cplx> a(y1.values().begin(), y1.values().end()), b(y2.values().begin(), y2.values().end());
    for (auto &v : a) v *= s;
    for (auto &v : b) v *= s;
    const Pulse c1(a), c2(b);
    const double fwd = align_up_to_ambiguities(c1, c2, x1, x2, false).residual;
    const double bwd = align_up_to_ambiguities(x1, x2, c1, c2, false).residual;
    EXPECT_NEAR(fwd, bwd, 1e-10);
  }
}

TEST(Align, ZeroReferenceRejected) {
  const Pulse z(std::vector<cplx>(4));
  EXPECT_THROW(align_up_to_ambiguities(delta(4), delta(4), z, z, false), ValidationError);
}

TEST(Align, ContinuousShiftRecoversFractionalDelay) {
  Rng rng(8);
  const std::size_t n = 16;
  const auto x = random_bandlimited_pulse(n, rng);
  const auto run = default_zero_run(n);
  const auto moved = fractional_shift(x, x, 0.37, (run.start + run.length) % n);
  const auto g = TraceGeometry::make(n, 1, GateKind::Shg);
  EXPECT_LT(relative_difference(synthesize_trace(moved.first, moved.second, g), synthesize_trace(x, x, g)), 1e-12);
  const auto discrete = align_up_to_ambiguities(moved.first, moved.second, x, x, true);
  const auto cont = align_with_continuous_shift(moved.first, moved.second, x, x, true);
  EXPECT_GT(discrete.residual, 1e-3);
  EXPECT_LT(cont.residual, 1e-10);
}

TEST(Invariance, RandomPairsPassAllKinds) {
  Rng rng(9);
  for (std::size_t l : {1u, 2u})
    for (auto kind : {GateKind::BlindShg, GateKind::Shg, GateKind::Thg, GateKind::Pg, GateKind::Crab}) {
      const auto x1 = random_pulse(12, rng);
      const auto x2 = kind == GateKind::Shg ? x1 : random_pulse(12, rng);
      InvarianceOptions opts;
      opts.seed = rng();
      const auto rep = check_trace_invariance(x1, x2, TraceGeometry::make(12, l, kind), opts);
      EXPECT_TRUE(rep.passed) << to_string(kind) << " L=" << l;
      for (const auto &line : rep.lines)
        if (line.status == CheckStatus::Pass) EXPECT_LT(line.max_deviation, 1e-10);
    }
}

TEST(Invariance, CorruptedShiftFails) {
  Rng rng(10);
  const auto x1 = random_pulse(8, rng), x2 = random_pulse(8, rng);
  InvarianceOptions opts;
  opts.corrupt_shift = true;
  opts.seed = 3;
  const auto rep = check_trace_invariance(x1, x2, TraceGeometry::make(8, 1, GateKind::BlindShg), opts);
  EXPECT_FALSE(rep.passed);
  EXPECT_EQ(rep.lines[1].status, CheckStatus::Fail);
}

TEST(Invariance, ShgSkipsModulation) {
  Rng rng(11);
  const auto x = random_pulse(8, rng);
  const auto rep = check_trace_invariance(x, x, TraceGeometry::make(8, 1, GateKind::Shg));
  EXPECT_EQ(rep.lines[3].status, CheckStatus::Skipped);
  EXPECT_EQ(rep.lines[3].note, "skipped (bivariate-only)");
  EXPECT_TRUE(rep.passed);
}
