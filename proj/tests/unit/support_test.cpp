#include <gtest/gtest.h>

#include "mshape/support.hpp"

#include <cmath>

using namespace mshape;

namespace {

/// Bundle whose value at every grid time is the given constant per path.
PathBundle constant_bundle(const std::vector<double>& xs) {
  const auto grid = TimeGrid::uniform(0.0, 1.0, 2);
  std::vector<SamplePath> paths;
  for (double x : xs) paths.push_back({{x, x, x}, {}});
  return PathBundle(brownian_motion(), grid, 0, 0.0, std::move(paths));
}

}  // namespace

TEST(Bins, CenteredOnMultiplesOfWidth) {
  EXPECT_EQ(bin_of(0.024, 0.05), 0);
  EXPECT_EQ(bin_of(0.025, 0.05), 1);
  EXPECT_EQ(bin_of(-0.025, 0.05), 0);
  EXPECT_EQ(bin_of(-0.026, 0.05), -1);
  EXPECT_EQ(bin_of(1.0, 0.05), 20);
}

TEST(EstimateSupport, KeepsBinsWithEnoughSamples) {
  std::vector<double> xs(5, 0.0);
  xs.insert(xs.end(), 5, 1.0);
  xs.push_back(3.0);
  const auto b = constant_bundle(xs);
  const auto s = estimate_support(b, 1.0, 0.1);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0].lo, -0.15, 1e-12);
  EXPECT_NEAR(s[0].hi, 0.15, 1e-12);
  EXPECT_NEAR(s[1].lo, 0.85, 1e-12);
  EXPECT_NEAR(s[1].hi, 1.15, 1e-12);
}

TEST(EstimateSupport, NearbyRunsMerge) {
  std::vector<double> xs(5, 0.0);
  xs.insert(xs.end(), 5, 0.3);
  const auto s = estimate_support(constant_bundle(xs), 0.5, 0.1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s[0].lo, -0.15, 1e-12);
  EXPECT_NEAR(s[0].hi, 0.45, 1e-12);
}

TEST(EstimateSupport, Errors) {
  const auto b = constant_bundle({0.0, 0.0, 0.0});
  EXPECT_THROW(estimate_support(b, 0.0, 0.0), InvalidArgument);
  EXPECT_THROW(estimate_support(b, 0.0, 0.1, 0), InvalidArgument);
  EXPECT_THROW(estimate_support(b, 0.0, 0.1, 5), InsufficientData);
  EXPECT_THROW(estimate_support(constant_bundle(std::vector<double>(5, 0.0)), 0.3, 0.1), InvalidArgument);
}

TEST(EstimateSupport, CounterexampleAtOneIsTwoPoints) {
  const auto b = generate_paths(counterexample_process(), TimeGrid::uniform(0.0, 2.0, 4), 10000, 1);
  const auto s = estimate_support(b, 1.0, 0.05);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0].lo, -1.075, 1e-12);
  EXPECT_NEAR(s[0].hi, -0.925, 1e-12);
  EXPECT_NEAR(s[1].lo, 0.925, 1e-12);
  EXPECT_NEAR(s[1].hi, 1.075, 1e-12);
  const auto mid = estimate_support(b, 0.5, 0.05);
  ASSERT_EQ(mid.size(), 1u);
  EXPECT_LE(mid[0].lo, -0.9);
  EXPECT_GE(mid[0].lo, -1.075 - 1e-12);
  EXPECT_GE(mid[0].hi, 0.9);
  EXPECT_LE(mid[0].hi, 1.075 + 1e-12);
}

TEST(EstimateSupport, PoissonIsALatticeOfPoints) {
  const auto b = generate_paths(compensated_poisson(), TimeGrid::uniform(0.0, 1.0, 2), 100000, 2);
  const auto s = estimate_support(b, 0.5, 0.05);
  EXPECT_GE(s.size(), 5u);
  EXPECT_LE(s.size(), 7u);
  for (std::size_t m = 0; m < s.size(); ++m) {
    EXPECT_TRUE(s[m].contains(static_cast<double>(m) - 0.5)) << m;
    EXPECT_NEAR(s[m].hi - s[m].lo, 0.15, 1e-12);
  }
}

TEST(EstimateSupport, BrownianCoversCentralQuantiles) {
  const auto b = generate_paths(brownian_motion(), TimeGrid::uniform(0.0, 1.0, 4), 100000, 3);
  const auto sup = marginal_support(b, 0.05);
  EXPECT_DOUBLE_EQ(sup.threshold(), 5.0 / 100000.0);
  const std::size_t i = b.grid().require_index(1.0);
  const double z = 3.2905;
  for (double x = -z; x <= z; x += 0.01) EXPECT_TRUE(sup.contains(i, x)) << x;
  const std::size_t h = b.grid().require_index(0.25);
  for (double x = -z * 0.5; x <= z * 0.5; x += 0.01) EXPECT_TRUE(sup.contains(h, x)) << x;
  EXPECT_FALSE(sup.contains(i, 6.0));
}

TEST(EstimateSupport, GrowsWithData) {
  const auto grid = TimeGrid::uniform(0.0, 1.0, 4);
  for (const auto& spec : catalog()) {
    const auto small = marginal_support(generate_paths(spec, grid, 1000, 4), 0.05);
    const auto large = marginal_support(generate_paths(spec, grid, 10000, 4), 0.05);
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (const auto& iv : small.slice(i)) {
        EXPECT_TRUE(large.contains(i, iv.lo)) << spec.name;
        EXPECT_TRUE(large.contains(i, iv.hi)) << spec.name;
      }
  }
}

TEST(SabSet, CounterexampleExitsTheIntervalAtOne) {
  const auto b = generate_paths(counterexample_process(), TimeGrid::uniform(0.0, 2.0, 8), 2000, 5);
  const auto s = s_ab_set(b, -1.0, 1.0);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], 1.0);
  const auto stat = s_ab_statistic(b, -1.0, 1.0);
  EXPECT_EQ(stat.front().statistic, 1.0);
  EXPECT_THROW(s_ab_statistic(b, 1.0, 1.0), InvalidArgument);
}

TEST(Containment, FreshPathsStayInside) {
  const auto grid = TimeGrid::uniform(0.0, 1.0, 20);
  for (const auto& spec : {brownian_motion(), compensated_poisson(), counterexample_process()}) {
    const auto ref = generate_paths(spec, grid, 100000, 6);
    const auto sup = marginal_support(ref, 0.05);
    const auto test = generate_paths(spec, grid, 2000, 7);
    const auto r = paths_in_support_check(test, sup, 2);
    EXPECT_LE(r.fraction(), 2e-3) << spec.name;
    EXPECT_EQ(r.left_limit_samples, test.total_jumps());
  }
}

TEST(Containment, ShiftedPathsAreOutside) {
  const auto grid = TimeGrid::uniform(0.0, 1.0, 20);
  const auto sup = marginal_support(generate_paths(brownian_motion(), grid, 20000, 6), 0.05);
  const auto shifted = generate_paths(brownian_motion(), grid, 500, 8, {}, 10.0);
  EXPECT_GE(paths_in_support_check(shifted, sup, 2).fraction(), 0.99);
  const auto other = generate_paths(brownian_motion(), TimeGrid::uniform(0.0, 1.0, 10), 10, 8);
  EXPECT_THROW(paths_in_support_check(other, sup, 2), InvalidArgument);
}

TEST(JumpPastSupport, PoissonJumpsLandOnNeighbouringAtoms) {
  const auto grid = TimeGrid::uniform(0.0, 1.0, 50);
  const auto spec = compensated_poisson();
  const auto sup = marginal_support(generate_paths(spec, grid, 20000, 9), 0.05);
  const auto test = generate_paths(spec, grid, 2000, 10);
  EXPECT_GT(test.total_jumps(), 1000u);
  EXPECT_TRUE(jump_past_support_scan(test, sup).empty());
}

TEST(JumpPastSupport, JumpDiffusionJumpsOverItsSupport) {
  const auto grid = TimeGrid::uniform(0.0, 1.0, 50);
  const auto spec = jump_diffusion();
  const auto sup = marginal_support(generate_paths(spec, grid, 20000, 9), 0.05);
  const auto test = generate_paths(spec, grid, 2000, 10);
  const auto v = jump_past_support_scan(test, sup);
  EXPECT_GT(static_cast<double>(v.size()), 0.5 * static_cast<double>(test.total_jumps()));
}
