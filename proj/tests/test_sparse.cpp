#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "osn/sparse.hpp"

using osn::SparseMatrix;

namespace {

// Random banded matrix, not diagonally dominant, so pivoting matters.
SparseMatrix random_banded(std::size_t n, std::size_t kl, std::size_t ku, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  SparseMatrix::Builder b(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t lo = r >= kl ? r - kl : 0;
    const std::size_t hi = std::min(n - 1, r + ku);
    for (std::size_t c = lo; c <= hi; ++c) b.add(r, c, dist(rng));
  }
  return std::move(b).build();
}

}  // namespace

TEST(SparseMatrix, AssemblySumsDuplicates) {
  SparseMatrix::Builder b(3);
  b.add(0, 0, 1.0);
  b.add(0, 0, 2.5);
  b.add(2, 1, -1.0);
  const auto m = std::move(b).build();
  EXPECT_EQ(m.nonzeros(), 2u);
  EXPECT_EQ(m.coefficient(0, 0), 3.5);
  EXPECT_EQ(m.coefficient(2, 1), -1.0);
  EXPECT_EQ(m.coefficient(1, 1), 0.0);
  EXPECT_EQ(m.lower_bandwidth(), 1u);
  EXPECT_EQ(m.upper_bandwidth(), 0u);
  EXPECT_EQ(m.max_abs(), 3.5);
  EXPECT_THROW(SparseMatrix::Builder(2).add(2, 0, 1.0), std::out_of_range);
}

TEST(SparseMatrix, Multiply) {
  SparseMatrix::Builder b(2);
  b.add(0, 0, 2.0);
  b.add(0, 1, 1.0);
  b.add(1, 0, -1.0);
  const auto m = std::move(b).build();
  EXPECT_EQ(m.multiply(std::vector<double>{3.0, 4.0}), (std::vector<double>{10.0, -3.0}));
}

TEST(BandedLU, NeedsPivoting) {
  SparseMatrix::Builder b(2);
  b.add(0, 1, 1.0);
  b.add(1, 0, 1.0);
  const auto x = osn::direct_solve(std::move(b).build(), std::vector<double>{2.0, 5.0});
  EXPECT_EQ(x, (std::vector<double>{5.0, 2.0}));
}

TEST(BandedLU, RecoversManufacturedSolution) {
  for (auto [n, kl, ku] : {std::tuple{1ul, 0ul, 0ul}, std::tuple{50ul, 3ul, 2ul}, std::tuple{300ul, 12ul, 12ul},
                           std::tuple{200ul, 0ul, 5ul}}) {
    const auto a = random_banded(n, kl, ku, static_cast<unsigned>(n + kl));
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(1.0 + static_cast<double>(i));
    const auto rhs = a.multiply(x);
    const osn::BandedLU lu(a);
    EXPECT_EQ(lu.lower_bandwidth(), kl);
    EXPECT_EQ(lu.upper_bandwidth(), ku);
    const auto got = lu.solve(rhs);
    const auto back = a.multiply(got);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::fabs(back[i] - rhs[i]));
    EXPECT_LE(res, 1e-10 * a.max_abs() * osn::norm2(got) + 1e-14);
  }
}

TEST(BandedLU, SolveManyRightHandSides) {
  const auto a = random_banded(40, 4, 4, 9);
  const osn::BandedLU lu(a);
  for (int k = 0; k < 3; ++k) {
    std::vector<double> e(40, 0.0);
    e[static_cast<std::size_t>(k)] = 1.0;
    const auto col = lu.solve(e);
    const auto back = a.multiply(col);
    for (std::size_t i = 0; i < 40; ++i) EXPECT_NEAR(back[i], e[i], 1e-10);
  }
}

TEST(BandedLU, DetectsSingularMatrix) {
  SparseMatrix::Builder b(3);
  b.add(0, 0, 1.0);
  b.add(0, 1, 2.0);
  b.add(1, 0, 2.0);
  b.add(1, 1, 4.0);
  b.add(2, 2, 1.0);
  EXPECT_THROW(osn::BandedLU(std::move(b).build()), osn::SingularMatrixError);
  SparseMatrix::Builder z(2);
  z.add(0, 0, 1.0);
  EXPECT_THROW(osn::BandedLU(std::move(z).build()), osn::SingularMatrixError);
}

TEST(BandedLU, RejectsWrongRhsSize) {
  SparseMatrix::Builder b(2);
  b.add(0, 0, 1.0);
  b.add(1, 1, 1.0);
  const osn::BandedLU lu(std::move(b).build());
  EXPECT_THROW(lu.solve(std::vector<double>(3)), std::invalid_argument);
}

TEST(VectorOps, DotAndNorm) {
  const std::vector<double> a{3.0, 4.0};
  const std::vector<double> b{1.0, -2.0};
  EXPECT_EQ(osn::dot(a, b), -5.0);
  EXPECT_EQ(osn::norm2(a), 5.0);
}
