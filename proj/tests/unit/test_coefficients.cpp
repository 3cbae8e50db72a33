#include <gtest/gtest.h>

#include <cmath>

#include "cmv/coefficients.hpp"
#include "cmv/errors.hpp"
#include "generators.hpp"

namespace cmv {
namespace {

const TimeGrid kGrid(1.0, 4);

PathArgs args_at(std::size_t node, const std::vector<double>& x, const std::vector<double>& y, const MeasurePath& mu) {
  return PathArgs{node, kGrid.time(node), std::span<const double>(x).first(node + 1),
                  std::span<const double>(y).first(node + 1), &mu};
}

TEST(EvalH, ZeroFactor) {
  const auto cs = builtin("no-observation");
  const std::vector<double> y{0.0, 0.3, -1.2};
  for (double x : {-3.0, 0.0, 2.0}) EXPECT_EQ(eval_h(cs, kGrid, 2, x, y), 0.0);
}

TEST(EvalH, TanhAtOrigin) {
  const auto cs = builtin("constant");
  const std::vector<double> y{0.0};
  EXPECT_EQ(eval_h(cs, kGrid, 0, 0.0, y), 0.0);
}

TEST(EvalH, TwoFactorsSum) {
  CoefficientSet cs = testing::constant_h(0.0);
  cs.h_factors.clear();
  cs.h_factors.push_back(HFactor{[](double, double x) { return std::tanh(x); },
                                 [](double, std::span<const double>) { return 2.0; }, 1, 1, 1, 2});
  cs.h_factors.push_back(HFactor{[](double, double) { return 0.5; },
                                 [](double, std::span<const double>) { return 1.0; }, 0.5, 0, 0, 1});
  const std::vector<double> y{0.0};
  EXPECT_NEAR(eval_h(cs, kGrid, 0, 1.0, y), 2.0 * std::tanh(1.0) + 0.5, 1e-15);
  EXPECT_NEAR(eval_h(cs, kGrid, 0, 1.0, y), 2.0232, 1e-4);
}

TEST(EvalH, PrefixLengthChecked) {
  const auto cs = builtin("constant");
  const std::vector<double> y{0.0, 1.0};
  EXPECT_THROW(eval_h(cs, kGrid, 0, 0.0, y), InvalidArgument);
}

TEST(Validate, ConstantSigmaPasses) {
  const auto r = validate(testing::constant_h(0.3, 1.0), 500, 1);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.probes, 500u);
  EXPECT_NO_THROW(r.throw_if_failed());
}

TEST(Validate, LinearSigmaFailsWithWitness) {
  CoefficientSet cs = testing::constant_h(0.3, 1.0);
  cs.sigma = [](const PathArgs& a) { return a.x(); };
  const auto r = validate(cs, 500, 2);
  ASSERT_FALSE(r.passed);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_GT(std::abs(r.witness->x), 1.0);
  EXPECT_GT(r.witness->observed, r.witness->declared);
  EXPECT_THROW(r.throw_if_failed(), ValidationFailure);
}

TEST(Validate, UndeclaredMeasureDependenceIsCaught) {
  CoefficientSet cs = testing::constant_h(0.3, 1.0);
  cs.sigma = [](const PathArgs& a) { return 0.5 + 0.1 * std::tanh(a.mu_now().mean()); };
  cs.measure_dependent = false;
  EXPECT_FALSE(validate(cs, 500, 3).passed);
  cs.measure_dependent = true;
  EXPECT_TRUE(validate(cs, 500, 3).passed);
}

TEST(Validate, WrongDerivativeBoundIsCaught) {
  CoefficientSet cs = builtin("constant");
  cs.h_factors[0].f_dx_bound = 0.5;
  EXPECT_FALSE(validate(cs, 500, 4).passed);
}

TEST(Validate, MeanfieldTanhLipschitzRatioBelowOne) {
  const auto r = validate(builtin("meanfield-tanh"), 2000, 5);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.max_lipschitz_ratio, 1.0);
  EXPECT_GT(r.max_lipschitz_ratio, 0.0);
}

TEST(Validate, ZeroBudgetRejected) { EXPECT_THROW(validate(builtin("constant"), 0, 0), InvalidArgument); }

TEST(BuiltinProperty, EveryBuiltinValidatesWithLargeBudget) {
  for (const auto& name : builtin_names()) {
    const auto r = validate(builtin(name), 10000, 6);
    EXPECT_TRUE(r.passed) << name << ": " << (r.witness ? r.witness->check : "");
  }
}

TEST(Builtin, NoObservationHasZeroH) {
  const auto cs = builtin("no-observation");
  testing::Gen gen(7);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> y{gen.normal(), gen.normal()};
    EXPECT_EQ(eval_h(cs, kGrid, 1, gen.uniform(-10, 10), y), 0.0);
  }
}

TEST(Builtin, ConstantSigmaFromParams) {
  const auto cs = builtin("constant", {{"s0", 0.5}});
  testing::Gen gen(8);
  const auto mu = gen.measure_path(kGrid);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x{gen.normal(), gen.normal(), gen.normal()};
    const std::vector<double> y{gen.normal(), gen.normal(), gen.normal()};
    EXPECT_EQ(cs.sigma(args_at(2, x, y, mu)), 0.5);
  }
}

TEST(Builtin, MeanfieldSigmaAtDiracZero) {
  const auto cs = builtin("meanfield-tanh", {{"s0", 1.0}, {"s1", 0.5}});
  const auto mu = constant_path(kGrid, DiscreteMeasure::dirac(0.0));
  const std::vector<double> x{0.7}, y{0.2};
  EXPECT_EQ(cs.sigma(args_at(0, x, y, mu)), 1.0);
  EXPECT_TRUE(cs.measure_dependent);
  EXPECT_FALSE(builtin("meanfield-tanh", {{"s1", 0.0}}).measure_dependent);
}

TEST(Builtin, LinearClippedSaturates) {
  const auto cs = builtin("linear-clipped", {{"c", 0.5}, {"R", 8.0}});
  const std::vector<double> y{0.0};
  EXPECT_EQ(eval_h(cs, kGrid, 0, 3.0, y), 1.5);
  EXPECT_EQ(eval_h(cs, kGrid, 0, 100.0, y), 4.0);
  EXPECT_EQ(eval_h(cs, kGrid, 0, -100.0, y), -4.0);
}

TEST(Builtin, UnknownNameAndBadParams) {
  EXPECT_THROW(builtin("heston"), UnknownScenario);
  EXPECT_THROW(builtin("constant", {{"c", "big"}}), InvalidArgument);
  EXPECT_THROW(builtin("linear-clipped", {{"R", -1.0}}), InvalidArgument);
}

}  // namespace
}  // namespace cmv
