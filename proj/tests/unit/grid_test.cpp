#include <gtest/gtest.h>

#include "mshape/grid.hpp"
#include "mshape/tridiagonal.hpp"

#include <random>

using namespace mshape;

TEST(TimeGrid, UniformEndpointsAreExact) {
  const auto g = TimeGrid::uniform(0.0, 1.2, 6);
  EXPECT_EQ(g.size(), 7u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 1.2);
  EXPECT_EQ(g[5], 1.0);
  EXPECT_EQ(TimeGrid::uniform(0.0, 1.0, 400)[120], 0.3);
}

TEST(TimeGrid, RejectsBadTimes) {
  EXPECT_THROW(TimeGrid({0.0}), InvalidArgument);
  EXPECT_THROW(TimeGrid({0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(TimeGrid({0.0, 1.0, 0.5}), InvalidArgument);
  EXPECT_THROW(TimeGrid({-0.1, 1.0}), InvalidArgument);
  EXPECT_THROW(TimeGrid({0.0, std::numeric_limits<double>::infinity()}), InvalidArgument);
  EXPECT_THROW(TimeGrid::uniform(0.0, 1.0, 0), InvalidArgument);
  EXPECT_THROW(TimeGrid::uniform(1.0, 1.0, 4), InvalidArgument);
}

TEST(TimeGrid, IndexLookups) {
  const auto g = TimeGrid::uniform(0.0, 2.0, 200);
  EXPECT_EQ(g.index_of(1.0), std::optional<std::size_t>(100));
  EXPECT_FALSE(g.index_of(1.005).has_value());
  EXPECT_EQ(g.require_index(0.5), 50u);
  EXPECT_THROW(g.require_index(0.505), InvalidArgument);
  EXPECT_EQ(g.interval_of(0.505), 50u);
  EXPECT_EQ(g.interval_of(2.0), 199u);
  EXPECT_EQ(g.nearest(0.506), 51u);
}

TEST(SpaceGrid, PointsAndBounds) {
  const auto x = SpaceGrid::from_bounds(-3.0, 3.0, 600);
  EXPECT_EQ(x.size(), 601u);
  EXPECT_DOUBLE_EQ(x.h(), 0.01);
  EXPECT_EQ(x[0], -3.0);
  EXPECT_NEAR(x.x_max(), 3.0, 1e-12);
  EXPECT_EQ(x.points().size(), 601u);
}

TEST(SpaceGrid, RejectsDegenerateGrids) {
  EXPECT_THROW(SpaceGrid(0.0, 0.0, 10), InvalidArgument);
  EXPECT_THROW(SpaceGrid(0.0, -1.0, 10), InvalidArgument);
  EXPECT_THROW(SpaceGrid(0.0, 0.1, 1), InvalidArgument);
  EXPECT_THROW(SpaceGrid::from_bounds(1.0, 1.0, 10), InvalidArgument);
}

TEST(Tridiagonal, MatchesDenseElimination) {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 12;
  std::vector<double> sub(n), diag(n), sup(n), rhs(n);
  for (std::size_t j = 0; j < n; ++j) {
    sub[j] = j ? u(eng) : 0.0;
    sup[j] = j + 1 < n ? u(eng) : 0.0;
    diag[j] = 3.0 + u(eng);
    rhs[j] = u(eng);
  }
  // Dense Gaussian elimination with partial pivoting as the oracle.
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    if (j) a[j][j - 1] = sub[j];
    a[j][j] = diag[j];
    if (j + 1 < n) a[j][j + 1] = sup[j];
    a[j][n] = rhs[j];
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> dense(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = a[r][n];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * dense[k];
    dense[r] = s / a[r][r];
  }
  const auto x = solve_tridiagonal(sub, diag, sup, rhs);
  for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(x[j], dense[j], 1e-13);
}

TEST(Tridiagonal, ZeroPivotAndSizeErrors) {
  std::vector<double> z{0.0, 0.0}, d{0.0, 1.0}, r{1.0, 1.0};
  EXPECT_THROW(solve_tridiagonal(z, d, z, r), InvalidArgument);
  std::vector<double> d3{1.0, 1.0, 1.0};
  EXPECT_THROW(solve_tridiagonal(z, d3, z, r), InvalidArgument);
}
