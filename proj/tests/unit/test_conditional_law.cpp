#include <gtest/gtest.h>

#include <cmath>

#include "cmv/conditional_law.hpp"
#include "cmv/errors.hpp"
#include "generators.hpp"

namespace cmv {
namespace {

TMapContext context(CoefficientSet cs, const TimeGrid& g, std::size_t n, std::uint64_t seed = 0) {
  SimConfig s;
  s.n_particles = n;
  s.master_seed = seed;
  return TMapContext{std::move(cs), draw_observation(g, IncrementLaw::gaussian, seed), s};
}

TEST(KsLaw, UnitKernelIsEmpirical) {
  const std::vector<double> x{0.3, -1.0, 2.0, 0.3};
  const std::vector<double> l(4, 0.0);
  EXPECT_EQ(ks_law(x, l), empirical(x));
}

TEST(KsLaw, TwoParticleWeights) {
  const std::vector<double> x{0.0, 1.0};
  const std::vector<double> l{std::log(1.0), std::log(3.0)};
  const auto mu = ks_law(x, l);
  ASSERT_EQ(mu.size(), 2u);
  EXPECT_NEAR(mu.weights()[0], 0.25, 1e-15);
  EXPECT_NEAR(mu.weights()[1], 0.75, 1e-15);
}

TEST(KsLaw, SingleParticleIsDirac) {
  const std::vector<double> x{4.2}, l{37.0};
  EXPECT_EQ(ks_law(x, l), DiscreteMeasure::dirac(4.2));
}

TEST(KsLaw, HugeLogKernelsStayFinite) {
  const std::vector<double> x{0.0, 1.0}, l{690.0, 690.0 + std::log(3.0)};
  EXPECT_NEAR(ks_law(x, l).weights()[1], 0.75, 1e-12);
}

TEST(ApplyT, MeasureIndependentSigmaIgnoresInput) {
  const TimeGrid g(0.5, 10);
  const auto ctx = context(builtin("constant"), g, 200, 1);
  testing::Gen gen(1);
  const auto a = apply_t(ctx, gen.measure_path(g));
  const auto b = apply_t(ctx, gen.measure_path(g));
  for (std::size_t k = 0; k <= 10; ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(ApplyT, ZeroSigmaIsDiracPath) {
  const TimeGrid g(0.5, 10);
  const auto ctx = context(testing::constant_h(0.7, 0.0, 0.4), g, 50);
  const auto out = apply_t(ctx, constant_path(g, DiscreteMeasure::dirac(0.0)));
  for (const auto& m : out.measures) EXPECT_EQ(m, DiscreteMeasure::dirac(0.4));
}

TEST(ApplyT, TwoParticlesOneStepByHand) {
  const TimeGrid g(1.0, 1);
  const auto ctx = context(testing::constant_h(1.0), g, 2, 3);
  const auto mu = constant_path(g, DiscreteMeasure::dirac(0.0));
  const auto out = apply_t(ctx, mu);
  const auto e = simulate_ensemble(ctx.coeffs, mu, ctx.y_path, ctx.sim);
  // h is x-free, so both particles share L and the law is unweighted.
  const std::vector<double> atoms{e.x(0, 1), e.x(1, 1)};
  EXPECT_EQ(out[1], empirical(atoms));
  EXPECT_EQ(out[0], DiscreteMeasure::dirac(0.0));
}

TEST(ApplyTLocalized, FullTauMatchesApplyT) {
  const TimeGrid g(0.5, 12);
  const auto ctx = context(builtin("meanfield-tanh"), g, 100, 4);
  const auto mu = constant_path(g, DiscreteMeasure::dirac(0.5));
  const auto a = apply_t(ctx, mu);
  const auto b = apply_t_localized(ctx, mu, 12);
  for (std::size_t k = 0; k <= 12; ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(ApplyTLocalized, ZeroTauIsStartPath) {
  const TimeGrid g(0.5, 12);
  const auto ctx = context(builtin("meanfield-tanh"), g, 100, 5);
  const auto out = apply_t_localized(ctx, constant_path(g, DiscreteMeasure::dirac(0.5)), 0);
  for (const auto& m : out.measures) EXPECT_EQ(m, DiscreteMeasure::dirac(0.5));
}

TEST(ApplyTLocalized, FreezesAfterTau) {
  const TimeGrid g(0.5, 2);
  const auto ctx = context(builtin("meanfield-tanh"), g, 100, 6);
  const auto mu = constant_path(g, DiscreteMeasure::dirac(0.5));
  const auto full = apply_t(ctx, mu);
  const auto loc = apply_t_localized(ctx, mu, 1);
  EXPECT_EQ(loc[1], full[1]);
  EXPECT_EQ(loc[2], full[1]);
  EXPECT_THROW(apply_t_localized(ctx, mu, 3), InvalidArgument);
}

TEST(ApplyTProperty, WeightsNormalizedAndAtomsFinite) {
  testing::Gen gen(7);
  for (const auto& name : builtin_names()) {
    const TimeGrid g(0.5, 16);
    const auto ctx = context(builtin(name), g, 150, 7);
    const auto out = apply_t(ctx, gen.measure_path(g));
    for (const auto& m : out.measures) {
      double total = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        EXPECT_TRUE(std::isfinite(m.atoms()[i]));
        total += m.weights()[i];
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(ApplyTProperty, LocalizedAgreesWithApplyTUpToTau) {
  testing::Gen gen(8);
  const TimeGrid g(0.5, 20);
  const auto ctx = context(builtin("meanfield-tanh"), g, 80, 8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto mu = gen.measure_path(g);
    const std::size_t tau = gen.index(0, 20);
    const auto full = apply_t(ctx, mu);
    const auto loc = apply_t_localized(ctx, mu, tau);
    for (std::size_t k = 0; k <= 20; ++k) EXPECT_EQ(loc[k], full[std::min(k, tau)]);
  }
}

TEST(EffectiveSampleSize, UnitKernelIsN) {
  const TimeGrid g(0.5, 5);
  const auto ctx = context(builtin("no-observation"), g, 64);
  const auto e = simulate_ensemble(ctx.coeffs, constant_path(g, DiscreteMeasure::dirac(0.0)), ctx.y_path, ctx.sim);
  EXPECT_NEAR(effective_sample_size(e, 5), 64.0, 1e-9);
}

}  // namespace
}  // namespace cmv
