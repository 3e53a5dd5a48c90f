#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "osn/experiment.hpp"
#include "osn/monolithic.hpp"

using osn::ControlBound;

TEST(Monolithic, ResidualOfZeroIsMinusData) {
  const auto spec = osn::make_benchmark_spec(9, 10.0, 0.0, 0.0, 1e-3, ControlBound::unbounded());
  const osn::MonolithicSystem sys(spec);
  EXPECT_EQ(sys.unknowns(), 162u);
  const auto r = osn::monolithic_residual(sys, osn::PairField(81));
  for (std::size_t k = 0; k < 81; ++k) {
    EXPECT_EQ(r[2 * k], 0.0);
    EXPECT_EQ(r[2 * k + 1], spec.y_d[k]);
  }
}

TEST(Monolithic, JacobianMatchesFiniteDifferences) {
  const auto spec = osn::make_benchmark_spec(7, 10.0, 10.0, 0.0, 1e-2, ControlBound::unbounded());
  const osn::MonolithicSystem sys(spec);
  osn::PairField v(49), d(49);
  for (std::size_t k = 0; k < 49; ++k) {
    v.y[k] = 0.3 * std::sin(static_cast<double>(k));
    v.p[k] = 0.2 * std::cos(static_cast<double>(k));
    d.y[k] = std::cos(3.0 * static_cast<double>(k));
    d.p[k] = std::sin(5.0 * static_cast<double>(k));
  }
  const auto jd = osn::monolithic_jacobian(sys, v).multiply(osn::interleave(d));
  const double eps = 1e-6;
  auto at = [&](double t) {
    osn::PairField w = v;
    for (std::size_t k = 0; k < 49; ++k) {
      w.y[k] += t * d.y[k];
      w.p[k] += t * d.p[k];
    }
    return osn::monolithic_residual(sys, w);
  };
  const auto rp = at(eps), rm = at(-eps);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < jd.size(); ++i) {
    err = std::max(err, std::fabs((rp[i] - rm[i]) / (2 * eps) - jd[i]));
    scale = std::max(scale, std::fabs(jd[i]));
  }
  EXPECT_LE(err, 1e-6 * scale);
}

TEST(DampedSsn, IsInvariantUnderQ) {
  const auto s1 = osn::make_benchmark_spec(15, 1.0, 10.0, 0.01, 1e-5, ControlBound(1e3));
  const auto s2 = osn::make_benchmark_spec(15, 100.0, 10.0, 0.01, 1e-5, ControlBound(1e3));
  const osn::Grid grid(15, 15, 1.0, 1.0);
  const auto a = osn::damped_ssn(osn::MonolithicSystem(s1), osn::random_pair(grid, 1), {});
  const auto b = osn::damped_ssn(osn::MonolithicSystem(s2), osn::random_pair(grid, 1), {});
  EXPECT_TRUE(a.report.converged);
  EXPECT_EQ(a.solution.y, b.solution.y);
  EXPECT_EQ(a.solution.p, b.solution.p);
  EXPECT_EQ(a.report.residual_history, b.report.residual_history);
}

TEST(DampedSsn, LinearProblemInOneStep) {
  const auto spec = osn::make_benchmark_spec(15, 10.0, 0.0, 0.0, 1e-3, ControlBound::unbounded());
  const osn::Grid grid(15, 15, 1.0, 1.0);
  const auto r = osn::damped_ssn(osn::MonolithicSystem(spec), osn::random_pair(grid, 2), {});
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.report.outer_iterations, 1);
}

TEST(DampedSsn, SolutionSatisfiesOptimalityPointwise) {
  const auto spec = osn::make_benchmark_spec(15, 10.0, 10.0, 0.01, 1e-5, ControlBound(1e3));
  const osn::MonolithicSystem sys(spec);
  osn::BaselineConfig cfg;
  cfg.tolerance = 1e-11;
  const auto r = osn::damped_ssn(sys, osn::random_pair(sys.grid(), 3), cfg);
  ASSERT_TRUE(r.report.converged);
  EXPECT_LE(sys.grid().scaled_norm(osn::monolithic_residual(sys, r.solution)), 1e-11);
  const osn::ControlLaw law(spec);
  for (double p : r.solution.p) {
    const double u = osn::mu(law, p);
    if (std::fabs(p) <= spec.beta) EXPECT_EQ(u, 0.0);
    EXPECT_LE(std::fabs(u), 1e3);
  }
}

TEST(DampedSsn, ReportsIterationLimit) {
  const auto spec = osn::make_benchmark_spec(9, 10.0, 10.0, 0.0, 1e-7, ControlBound(1e3));
  const osn::MonolithicSystem sys(spec);
  osn::BaselineConfig cfg;
  cfg.max_iterations = 1;
  const auto r = osn::damped_ssn(sys, osn::random_pair(sys.grid(), 1), cfg);
  EXPECT_FALSE(r.report.converged);
  EXPECT_FALSE(r.report.failure.empty());
  cfg.tolerance = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(RandomPair, SeededUniformUnitInterval) {
  const osn::Grid grid(5, 5, 1.0, 1.0);
  const auto a = osn::random_pair(grid, 7);
  EXPECT_EQ(a.y, osn::random_pair(grid, 7).y);
  for (double v : a.y) EXPECT_TRUE(v >= 0.0 && v < 1.0);
}
