#include <gtest/gtest.h>

#include <froglab/forward.hpp>
#include <froglab/oracle.hpp>

#include "helpers.hpp"

using namespace froglab;
using froglab::testing::delta;
using froglab::testing::pulse;

TEST(DirectTrace, DeltaSingleColumn) {
  const auto d = delta(5);
  const auto z = oracle::direct_trace(d, d, TraceGeometry::make(5, 1, GateKind::Shg));
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t m = 0; m < 5; ++m) EXPECT_NEAR(z(k, m), m == 0 ? 1.0 : 0.0, 1e-14);
}

TEST(DirectTrace, ConstantSingleRow) {
  const auto c = pulse({1, 1, 1});
  const auto z = oracle::direct_trace(c, c, TraceGeometry::make(3, 1, GateKind::Shg));
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t m = 0; m < 3; ++m) EXPECT_NEAR(z(k, m), k == 0 ? 9.0 : 0.0, 1e-12);
}

namespace {

// Row magnitudes and spectrum from phases on the 2 pi / q grid.
std::pair<std::vector<double>, std::vector<double>> grid_row(const std::vector<double> &mags,
                                                             const std::vector<int> &digits, int q) {
  const auto n = mags.size();
  std::vector<cplx> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = std::polar(mags[i], kTwoPi * digits[i] / q);
  const auto s = dft_forward(Pulse(u));
  std::vector<double> spec(n);
  for (std::size_t k = 0; k < n; ++k) spec[k] = std::norm(s[k]);
  return {mags, spec};
}

} // namespace

TEST(ExhaustiveRowSearch, SingleSupportPointGivesQMatches) {
  const auto [mags, spec] = grid_row({0.0, 2.0, 0.0, 0.0}, {0, 3, 0, 0}, 8);
  const auto matches = oracle::exhaustive_row_search(mags, spec, 8, 1e-9);
  ASSERT_EQ(matches.size(), 8u);
  for (const auto &m : matches) EXPECT_TRUE(oracle::rows_equivalent(mags, matches.front(), m));
}

TEST(ExhaustiveRowSearch, TruthAmongEquivalentMatches) {
  const std::vector<int> digits = {1, 6, 3, 0};
  const auto [mags, spec] = grid_row({1.0, 0.7, 1.3, 0.0}, digits, 8);
  const auto matches = oracle::exhaustive_row_search(mags, spec, 8, 1e-9);
  std::vector<double> truth(4);
  for (std::size_t i = 0; i < 4; ++i) truth[i] = mags[i] > 0 ? kTwoPi * digits[i] / 8 : 0.0;
  bool found = false;
  for (const auto &m : matches) {
    found |= oracle::rows_equivalent(mags, truth, m, 1e-12);
    EXPECT_TRUE(oracle::rows_equivalent(mags, truth, m));
  }
  EXPECT_TRUE(found);
}

TEST(ExhaustiveRowSearch, OffGridTruthWithZeroTolerance) {
  std::vector<double> mags = {1.0, 0.5, 0.8, 0.0};
  std::vector<cplx> u = {std::polar(1.0, 0.1), std::polar(0.5, 1.234), std::polar(0.8, -2.0), 0.0};
  const auto s = dft_forward(Pulse(u));
  std::vector<double> spec(4);
  for (std::size_t k = 0; k < 4; ++k) spec[k] = std::norm(s[k]);
  EXPECT_TRUE(oracle::exhaustive_row_search(mags, spec, 8, 0.0).empty());
}

TEST(ExhaustiveRowSearch, BudgetLimits) {
  std::vector<double> seven(7, 1.0), four(4, 1.0);
  EXPECT_THROW(oracle::exhaustive_row_search(seven, seven, 4, 1e-9), ValidationError);
  EXPECT_THROW(oracle::exhaustive_row_search(four, four, 17, 1e-9), ValidationError);
}

TEST(NumericNullspace, Identity) {
  EXPECT_EQ(oracle::numeric_nullspace(Eigen::MatrixXd::Identity(5, 5), 1e-10).dimension, 0u);
}

TEST(NumericNullspace, DuplicatedColumn) {
  Eigen::MatrixXd a(3, 3);
  a << 1, 1, 0, 2, 2, 1, 3, 3, 5;
  const auto ns = oracle::numeric_nullspace(a, 1e-10);
  ASSERT_EQ(ns.dimension, 1u);
  const Eigen::Vector3d v = ns.basis.col(0);
  EXPECT_NEAR(std::abs(v(0) + v(1)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(v(2)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(v(0)), std::sqrt(0.5), 1e-12);
}

TEST(NumericNullspace, BasisOrthonormalAndAnnihilated) {
  Rng rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(6, 9);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  const auto ns = oracle::numeric_nullspace(a, 1e-10);
  EXPECT_EQ(ns.dimension, 3u);
  const Eigen::MatrixXd gram = ns.basis.transpose() * ns.basis;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((a * ns.basis).colwise().norm().maxCoeff(), 1e-10 * ns.sigma_max * (1 + 1e-10));
}

TEST(NumericNullspace, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(oracle::numeric_nullspace(Eigen::MatrixXd(0, 3), 1e-10), ValidationError);
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(2, 2);
  a(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(oracle::numeric_nullspace(a, 1e-10), ValidationError);
}
