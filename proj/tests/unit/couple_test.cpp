#include <gtest/gtest.h>

#include "mshape/couple.hpp"

#include <cmath>

using namespace mshape;

namespace {

const TimeGrid kG = TimeGrid::uniform(0.0, 1.0, 50);

CrossScan scan(const ProcessSpec& spec, std::size_t n) {
  const auto y = generate_paths(spec, kG, n, 101);
  const auto z = generate_paths(spec, kG, n, 202);
  return cross_without_touch_scan(y, z, 0.0, 1.0);
}

}  // namespace

TEST(CrossScan, AlmostContinuousProcessesNeverCross) {
  for (const auto& spec : {brownian_motion(), bounded_vol_diffusion(), compensated_poisson()}) {
    const auto s = scan(spec, 2000);
    EXPECT_EQ(s.violating_pairs, 0u) << spec.name;
    EXPECT_TRUE(s.events.empty());
  }
}

TEST(CrossScan, JumpDiffusionCrossesWithoutTouching) {
  const auto s = scan(jump_diffusion(), 2000);
  EXPECT_GT(s.violation_fraction(), 0.01);
  for (const auto& e : s.events) EXPECT_LT(e.pre_gap * e.post_gap, 0.0);
}

TEST(CrossScan, SymmetricInTheTwoBundles) {
  const auto y = generate_paths(jump_diffusion(), kG, 1000, 1);
  const auto z = generate_paths(jump_diffusion(), kG, 1000, 2);
  const auto a = cross_without_touch_scan(y, z, 0.0, 1.0);
  const auto b = cross_without_touch_scan(z, y, 0.0, 1.0);
  EXPECT_EQ(a.violating_pairs, b.violating_pairs);
  EXPECT_EQ(a.touching_pairs, b.touching_pairs);
}

TEST(CrossScan, HandBuiltJumpOverAndTouch) {
  const auto grid = TimeGrid::uniform(0.0, 1.0, 2);
  std::vector<SamplePath> ys{{{0.0, 2.0, 2.0}, {{0.25, 0.0, 2.0}}}, {{0.0, 2.0, 2.0}, {}}};
  std::vector<SamplePath> zs{{{1.0, 1.0, 1.0}, {}}, {{1.0, 1.0, 1.0}, {}}};
  const PathBundle y(brownian_motion(), grid, 0, 0.0, ys);
  const PathBundle z(brownian_motion(), grid, 0, 1.0, zs);
  const auto s = cross_without_touch_scan(y, z, 0.0, 1.0);
  EXPECT_EQ(s.violating_pairs, 1u);
  EXPECT_EQ(s.touching_pairs, 1u);
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_EQ(s.events[0].time, 0.25);
  EXPECT_EQ(s.events[0].pre_gap, -1.0);
  EXPECT_EQ(s.events[0].post_gap, 1.0);
  EXPECT_THROW(cross_without_touch_scan(y, z, 1.0, 1.0), InvalidArgument);
}

TEST(TwoCopy, IdentityMeanIsTheStartGap) {
  TwoCopyConfig cfg;
  cfg.n_pairs = 5000;
  cfg.seed = 3;
  const auto o = two_copy_monotone_coupling(brownian_motion(), Payoff::identity(), cfg);
  EXPECT_TRUE(o.pass());
  EXPECT_LE(std::abs(o.mean - 0.5), 3.0 * o.se);
  EXPECT_GT(o.touched, 0u);
  EXPECT_EQ(o.touch_fraction(), 1.0);
  for (const auto& r : o.records)
    if (r.tau != kNever) {
      EXPECT_LE(std::abs(r.at_tau), 1e-9);
    }
}

TEST(TwoCopy, PoissonTouchesAtJumpsWithZeroGap) {
  TwoCopyConfig cfg;
  cfg.n_pairs = 2000;
  cfg.x_high = 1.0;
  const auto o = two_copy_monotone_coupling(compensated_poisson(), Payoff::call(0.0), cfg);
  EXPECT_TRUE(o.pass());
  EXPECT_GT(o.touched, 100u);
  EXPECT_EQ(o.touch_ok, o.touched);
}

TEST(TwoCopy, DecreasingPayoffFails) {
  TwoCopyConfig cfg;
  cfg.n_pairs = 5000;
  const auto o = two_copy_monotone_coupling(brownian_motion(), Payoff::call(0.0).negated(), cfg);
  EXPECT_FALSE(o.mean_ok());
  EXPECT_FALSE(o.pass());
}

TEST(TwoCopy, UnorderedStartsAreVacuous) {
  TwoCopyConfig cfg;
  cfg.x_low = 1.0;
  cfg.x_high = 0.0;
  const auto o = two_copy_monotone_coupling(brownian_motion(), Payoff::identity(), cfg);
  EXPECT_EQ(o.conditioned, 0u);
  EXPECT_TRUE(o.records.empty());
  cfg.s = 1.0;
  EXPECT_THROW(two_copy_monotone_coupling(brownian_motion(), Payoff::identity(), cfg), InvalidArgument);
}

TEST(ThreeCopy, AffineSurfaceGivesZeroMartingale) {
  const auto h = GridFunction::sample(TimeGrid::uniform(0.0, 1.0, 10), SpaceGrid::from_bounds(-8.0, 8.0, 16),
                                      [](double, double x) { return 2.0 * x + 1.0; }, Slopes{2.0, 2.0});
  ThreeCopyConfig cfg;
  cfg.n_triples = 1000;
  const auto o = three_copy_convexity_coupling(brownian_motion(), h, cfg);
  for (const auto& r : o.records) EXPECT_NEAR(r.terminal, 0.0, 1e-12);
  EXPECT_TRUE(o.pass());
}

TEST(ThreeCopy, ConvexPassesConcaveFails) {
  const auto tg = TimeGrid::uniform(0.0, 1.0, 100);
  const auto xg = SpaceGrid::from_bounds(-8.0, 8.0, 400);
  const auto convex = solve_pde(brownian_motion(), Payoff::call(0.0), tg, xg);
  const auto concave = solve_pde(brownian_motion(), Payoff::call(0.0).negated(), tg, xg);
  ThreeCopyConfig cfg;
  cfg.n_triples = 10000;
  cfg.steps = 100;
  const auto good = three_copy_convexity_coupling(brownian_motion(), convex, cfg);
  EXPECT_TRUE(good.pass()) << good.mean << " " << good.se;
  EXPECT_GE(good.touch_fraction(), 0.99);
  const auto bad = three_copy_convexity_coupling(brownian_motion(), concave, cfg);
  EXPECT_FALSE(bad.pass());
  EXPECT_LT(bad.mean, -3.0 * bad.se);
}

TEST(ThreeCopy, RejectsBadConfigurations) {
  const auto h = GridFunction::sample(TimeGrid::uniform(0.0, 1.0, 4), SpaceGrid::from_bounds(-1.0, 1.0, 4),
                                      [](double, double x) { return x; });
  ThreeCopyConfig cfg;
  cfg.x2 = -1.0;
  EXPECT_THROW(three_copy_convexity_coupling(brownian_motion(), h, cfg), InvalidArgument);
  cfg = {};
  cfg.T = 2.0;
  EXPECT_THROW(three_copy_convexity_coupling(brownian_motion(), h, cfg), InvalidArgument);
}

TEST(ConvexityMartingale, Formula) {
  const auto h = GridFunction::sample(TimeGrid::uniform(0.0, 1.0, 2), SpaceGrid::from_bounds(-2.0, 2.0, 400),
                                      [](double, double x) { return x * x; });
  EXPECT_NEAR(convexity_martingale(0.0, -1.0, 0.0, 1.0, h), 2.0, 1e-9);
}

TEST(ApproachTimes, LinearGapClosesAtOne) {
  const auto grid = TimeGrid::uniform(0.0, 1.0, 10);
  std::vector<double> y(grid.size(), 0.0), z(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) z[i] = 1.0 - grid[i];
  const PathView vy{&grid, y, {}}, vz{&grid, z, {}};
  const auto a = epsilon_approach_times(vy, vz, 0, {10, 2, 5});
  EXPECT_EQ(a.n, (std::vector<std::size_t>{2, 5, 10}));
  EXPECT_EQ(a.t_n[0], 0.5);
  EXPECT_EQ(a.t_n[1], 0.8);
  EXPECT_EQ(a.t_n[2], 0.9);
  EXPECT_EQ(a.t, 1.0);
  EXPECT_TRUE(a.monotone);
  EXPECT_TRUE(a.bounded);
  EXPECT_FALSE(a.jump_at_t);
  EXPECT_TRUE(a.strict);
  EXPECT_THROW(epsilon_approach_times(vy, vz, 0, {0}), InvalidArgument);
}

TEST(ApproachTimes, JumpReachesTWithoutAnnouncement) {
  const auto grid = TimeGrid::uniform(0.0, 1.0, 10);
  std::vector<double> y(grid.size()), z(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    y[i] = grid[i] > 0.55 ? 1.0 : 0.0;
    z[i] = 1.0 - 0.5 * grid[i];
  }
  const std::vector<JumpEvent> jumps{{0.55, 0.0, 1.0}};
  const PathView vy{&grid, y, jumps}, vz{&grid, z, {}};
  const auto a = epsilon_approach_times(vy, vz, 0, {1, 2, 100});
  EXPECT_EQ(a.t, 0.55);
  EXPECT_EQ(a.t_n[0], 0.0);
  EXPECT_EQ(a.t_n[2], 0.55);
  EXPECT_TRUE(a.jump_at_t);
  EXPECT_FALSE(a.strict);
  EXPECT_TRUE(a.monotone);
  EXPECT_TRUE(a.bounded);
}

TEST(ApproachTimes, PoissonPairsAreMonotoneAndBounded) {
  const auto grid = TimeGrid::uniform(0.0, 3.0, 60);
  const auto y = generate_paths(compensated_poisson(), grid, 300, 1, {}, 0.0);
  const auto z = generate_paths(compensated_poisson(), grid, 300, 2, {}, 1.0);
  std::size_t met = 0;
  for (std::size_t p = 0; p < 300; ++p) {
    const auto a = epsilon_approach_times(y.path(p), z.path(p), 0, {1, 2, 4, 8, 16});
    EXPECT_TRUE(a.monotone);
    EXPECT_TRUE(a.bounded);
    if (a.t != kNever) ++met;
  }
  EXPECT_GT(met, 100u);
}
