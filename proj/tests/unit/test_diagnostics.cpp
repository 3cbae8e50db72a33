#include <gtest/gtest.h>

#include <cmath>

#include "cmv/conditional_law.hpp"
#include "cmv/diagnostics.hpp"
#include "cmv/errors.hpp"
#include "cmv/fixed_point.hpp"
#include "cmv/rng.hpp"
#include "generators.hpp"

namespace cmv {
namespace {

std::vector<ParticleEnsemble> pooled(const CoefficientSet& cs, const TimeGrid& g, std::size_t draws,
                                     std::size_t particles, std::uint64_t seed) {
  std::vector<ParticleEnsemble> out;
  const auto mu = constant_path(g, DiscreteMeasure::dirac(cs.x0));
  for (std::size_t d = 0; d < draws; ++d) {
    SimConfig s;
    s.n_particles = particles;
    s.master_seed = stream_seed(seed, d);
    out.push_back(simulate_ensemble(cs, mu, draw_observation(g, IncrementLaw::gaussian, seed, d), s));
  }
  return out;
}

const std::vector<std::size_t> kNodes{5, 10, 15, 20};

TEST(Martingale, ZeroObservationIsExact) {
  const TimeGrid g(1.0, 20);
  const auto es = pooled(builtin("no-observation"), g, 3, 50, 1);
  const auto r = martingale_check(es, kNodes);
  EXPECT_TRUE(r.passed());
  for (const auto& s : r.stats) {
    EXPECT_EQ(s.value, 1.0);
    EXPECT_EQ(s.se, 0.0);
  }
}

TEST(Martingale, BuiltinsPassPooledOverDraws) {
  const TimeGrid g(1.0, 20);
  for (const auto& name : builtin_names()) {
    const auto es = pooled(builtin(name), g, 400, 20, 2);
    EXPECT_TRUE(martingale_check(es, kNodes).passed()) << name;
  }
}

TEST(Martingale, MissingCompensatorFails) {
  const TimeGrid g(1.0, 20);
  const double c = 1.0;
  auto es = pooled(testing::constant_h(c), g, 400, 20, 3);
  for (auto& e : es) {
    for (std::size_t i = 0; i < e.n_particles(); ++i) {
      auto l = e.log_kernel_path_mut(i);
      for (std::size_t k = 0; k < l.size(); ++k) l[k] += 0.5 * c * c * g.time(k);
    }
  }
  const auto r = martingale_check(es, kNodes);
  EXPECT_FALSE(r.passed());
  EXPECT_GT(r.stats.back().value, 1.3);
}

TEST(Martingale, StoppedKernelStillPasses) {
  const TimeGrid g(1.0, 20);
  auto es = pooled(builtin("constant"), g, 400, 20, 4);
  for (auto& e : es) {
    for (std::size_t i = 0; i < e.n_particles(); ++i) {
      auto l = e.log_kernel_path_mut(i);
      for (std::size_t k = 8; k < l.size(); ++k) l[k] = l[7];
    }
  }
  EXPECT_TRUE(martingale_check(es, kNodes).passed());
}

TEST(Martingale, TooFewParticles) {
  const TimeGrid g(1.0, 20);
  const auto es = pooled(builtin("constant"), g, 2, 10, 5);
  EXPECT_THROW(martingale_check(es, kNodes), InvalidArgument);
}

TEST(Zeta, NodeZeroIsFour) {
  const TimeGrid g(1.0, 20);
  for (const auto& name : builtin_names()) {
    const auto es = pooled(builtin(name), g, 2, 50, 6);
    const auto y = es[0].y_path();
    SimConfig s;
    s.n_particles = 50;
    const auto cs = builtin(name);
    const auto a = simulate_ensemble(cs, constant_path(g, DiscreteMeasure::dirac(cs.x0)), y, s);
    const auto b = simulate_ensemble(cs, constant_path(g, DiscreteMeasure::dirac(cs.x0 + 1.0)), y, s);
    EXPECT_EQ(zeta_estimate(a, b, 0), 4.0) << name;
    EXPECT_THROW(zeta_estimate(a, es[1], 0), InvalidArgument);
  }
}

TEST(Zeta, ZeroObservationIsFourEverywhere) {
  const TimeGrid g(1.0, 20);
  const auto es = pooled(builtin("no-observation"), g, 1, 50, 7);
  for (double z : zeta_path(es[0], es[0])) EXPECT_EQ(z, 4.0);
}

TEST(ZetaBound, MonitorVerdicts) {
  const TimeGrid g(1.0, 20);
  const auto es = pooled(builtin("no-observation"), g, 1, 50, 8);
  const auto zeta = zeta_path(es[0], es[0]);
  LocalizationConfig loc;
  const auto z = z_envelope(builtin("no-observation"), es[0].y_path());
  const auto pass = zeta_bound_check(zeta, a_process(z, loc));
  EXPECT_TRUE(pass.passed());
  loc.c1 = 0.1;
  EXPECT_FALSE(zeta_bound_check(zeta, a_process(z, loc)).passed());
}

TEST(ZetaBound, CalibratedMonitorDominatesBuiltins) {
  const TimeGrid g(1.0, 50);
  for (const auto& name : builtin_names()) {
    const auto cs = builtin(name);
    const auto loc = calibrated_localization(cs, 1.0);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto y = draw_observation(g, IncrementLaw::gaussian, seed);
      SimConfig s;
      s.n_particles = 500;
      s.master_seed = seed;
      const auto a = simulate_ensemble(cs, constant_path(g, DiscreteMeasure::dirac(cs.x0)), y, s);
      const auto b = simulate_ensemble(cs, constant_path(g, DiscreteMeasure::dirac(cs.x0 + 1.0)), y, s);
      EXPECT_TRUE(zeta_bound_check(zeta_path(a, b), a_process(z_envelope(cs, y), loc)).passed()) << name;
    }
  }
}

TEST(Prop41, EqualMeasuresSameNodeIsZero) {
  const TimeGrid g(0.25, 10);
  SimConfig s;
  s.n_particles = 200;
  const TMapContext ctx{builtin("meanfield-tanh"), draw_observation(g, IncrementLaw::gaussian, 9), s};
  const auto mu = constant_path(g, DiscreteMeasure::dirac(0.5));
  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{5, 5}, {10, 10}};
  const auto r = prop41_ratio_probe(mu, mu, ctx, pairs);
  EXPECT_TRUE(r.passed());
  for (const auto& st : r.stats) EXPECT_EQ(st.value, 0.0);
}

TEST(Prop41, BuiltinRatiosBelowCap) {
  const TimeGrid g(0.25, 20);
  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{5, 5}, {5, 10}, {5, 20}, {10, 20}, {20, 20}};
  for (const auto& name : builtin_names()) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      SimConfig s;
      s.n_particles = 300;
      s.master_seed = seed;
      const auto cs = builtin(name);
      const TMapContext ctx{cs, draw_observation(g, IncrementLaw::gaussian, seed), s};
      const std::vector<double> atoms{cs.x0 - 1.0, cs.x0 + 1.0};
      const auto r = prop41_ratio_probe(constant_path(g, DiscreteMeasure::dirac(cs.x0)),
                                        constant_path(g, empirical(atoms)), ctx, pairs, 10.0);
      EXPECT_TRUE(r.passed()) << name;
    }
  }
}

TEST(Innovation, ZeroObservationIsTheObservation) {
  const TimeGrid g(1.0, 20);
  const auto es = pooled(builtin("no-observation"), g, 3000, 1, 10);
  const auto r = innovation_check(es, builtin("no-observation"), kNodes, {.bootstrap = 100, .seed = 1});
  double mean_y = 0.0;
  for (const auto& e : es) mean_y += e.y_path()[20];
  mean_y /= 3000.0;
  EXPECT_NEAR(r.stats[12].value, mean_y, 1e-12);
  EXPECT_TRUE(r.passed());
}

TEST(Innovation, ReweightedIsBrownian) {
  const TimeGrid g(0.5, 20);
  const auto cs = builtin("constant");
  const auto es = pooled(cs, g, 20000, 2, 11);
  EXPECT_TRUE(innovation_check(es, cs, kNodes, {.bootstrap = 100, .seed = 2}).passed());
}

TEST(Innovation, SkippingReweightingFails) {
  const TimeGrid g(0.5, 20);
  const auto cs = builtin("constant", {{"c", 2.0}});
  const auto es = pooled(cs, g, 4000, 5, 11);
  EXPECT_FALSE(
      innovation_check(es, cs, kNodes, {.bootstrap = 100, .seed = 2, .use_kernel_weights = false}).passed());
}

TEST(Continuity, ZeroSigmaIsDegenerate) {
  const TimeGrid g(1.0, 32);
  SimConfig s;
  s.n_particles = 50;
  const auto r = continuity_exponent(testing::constant_h(0.5, 0.0), g, s, {.lags = {1, 2, 4}, .replications = 30});
  EXPECT_EQ(r.verdict, Verdict::degenerate);
}

TEST(Continuity, SingleReplicationRejected) {
  const TimeGrid g(1.0, 32);
  SimConfig s;
  s.n_particles = 50;
  EXPECT_THROW(continuity_exponent(builtin("constant"), g, s, {.replications = 1}), InsufficientReplications);
}

TEST(Continuity, ConstantScenarioSlope) {
  const TimeGrid g(1.0, 32);
  SimConfig s;
  s.n_particles = 300;
  const auto r = continuity_exponent(builtin("constant"), g, s, {.lags = {1, 2, 4, 8}, .replications = 40});
  EXPECT_TRUE(r.passed());
  EXPECT_GE(r.stats.back().value, 1.8);
}

TEST(OlsSlope, Line) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  EXPECT_DOUBLE_EQ(ols_slope(x, y), 2.0);
}

TEST(DiagnosticsProperty, VerdictsAreReproducible) {
  const TimeGrid g(0.5, 20);
  const auto cs = builtin("meanfield-tanh");
  const auto a = innovation_check(pooled(cs, g, 200, 5, 12), cs, kNodes, {.bootstrap = 50, .seed = 3});
  const auto b = innovation_check(pooled(cs, g, 200, 5, 12), cs, kNodes, {.bootstrap = 50, .seed = 3});
  ASSERT_EQ(a.stats.size(), b.stats.size());
  for (std::size_t j = 0; j < a.stats.size(); ++j) {
    EXPECT_EQ(a.stats[j].value, b.stats[j].value);
    EXPECT_EQ(a.stats[j].se, b.stats[j].se);
    EXPECT_EQ(a.stats[j].verdict, b.stats[j].verdict);
  }
}

}  // namespace
}  // namespace cmv
