#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "relugd/linalg.hpp"

using namespace relugd;

namespace {

SymMatrix to_sym(const oracle::Mat& a) {
  const std::size_t n = a.size();
  RectMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(i, j) = a[i][j];
  return SymMatrix::from_square(r);
}

RectMatrix to_rect(const oracle::Mat& a) {
  RectMatrix r(a.size(), a[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) r(i, j) = a[i][j];
  return r;
}

std::vector<double> unit_vector(oracle::Draw& draw, std::size_t n) {
  auto v = draw.normals(n);
  const double s = oracle::norm(v);
  for (auto& x : v) x /= s;
  return v;
}

}  // namespace

TEST(EuclideanNorm, PythagoreanTriple) { EXPECT_EQ(euclidean_norm(RealVector{3.0, 4.0}), 5.0); }

TEST(EuclideanNorm, ZeroVector) { EXPECT_EQ(euclidean_norm(RealVector{0.0, 0.0, 0.0}), 0.0); }

TEST(EuclideanNorm, MatchesSumOfSquaresLoop) {
  oracle::Draw draw(11);
  for (int rep = 0; rep < 50; ++rep) {
    const auto v = draw.normals(5);
    double s = 0.0;
    for (double x : v) s += x * x;
    EXPECT_NEAR(euclidean_norm(v), std::sqrt(s), 1e-14 * std::sqrt(s));
  }
}

TEST(EuclideanNorm, RejectsNonFinite) {
  const std::vector<double> v = {1.0, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_THROW(euclidean_norm(v), DomainError);
  EXPECT_THROW(RealVector({1.0, INFINITY}), DomainError);
}

TEST(ScalarProduct, OrthogonalBasis) { EXPECT_EQ(scalar_product(RealVector{1, 0}, RealVector{0, 1}), 0.0); }

TEST(ScalarProduct, SelfProductIsSquaredNorm) {
  const RealVector x{0.3, -1.7, 2.25};
  EXPECT_NEAR(scalar_product(x, x), std::pow(euclidean_norm(x), 2), 1e-14);
}

TEST(ScalarProduct, MatchesIndexOrderLoopExactly) {
  oracle::Draw draw(12);
  for (int rep = 0; rep < 50; ++rep) {
    const auto u = draw.normals(7), v = draw.normals(7);
    EXPECT_EQ(scalar_product(u, v), oracle::dot(u, v));
  }
}

TEST(ScalarProduct, LengthMismatch) {
  EXPECT_THROW(scalar_product(RealVector{1, 2}, RealVector{1, 2, 3}), DimensionError);
}

TEST(SpectralNorm, DiagonalMatrix) { EXPECT_NEAR(spectral_norm(RectMatrix{{1, 0}, {0, -3}}), 3.0, 1e-14); }

TEST(SpectralNorm, NilpotentMatrix) { EXPECT_NEAR(spectral_norm(RectMatrix{{0, 1}, {0, 0}}), 1.0, 1e-14); }

TEST(SpectralNorm, MatchesCharacteristicPolynomialOn4x4) {
  oracle::Draw draw(13);
  for (int rep = 0; rep < 100; ++rep) {
    oracle::Mat a(4, std::vector<double>(4));
    for (auto& row : a)
      for (auto& v : row) v = draw.normal();
    const double expected = std::sqrt(oracle::largest_real_root(oracle::char_poly(oracle::transpose_times(a))));
    EXPECT_NEAR(spectral_norm(to_rect(a)), expected, 1e-10);
  }
}

TEST(SpectralNorm, RectangularAgainstSupremumDefinition) {
  // ||A x|| / ||x|| never exceeds the spectral norm and reaches it on the top singular vector.
  oracle::Draw draw(14);
  oracle::Mat a(3, std::vector<double>(5));
  for (auto& row : a)
    for (auto& v : row) v = draw.normal();
  const RectMatrix r = to_rect(a);
  const double s = spectral_norm(r);
  double best = 0.0;
  for (int rep = 0; rep < 20000; ++rep) {
    const auto x = unit_vector(draw, 5);
    best = std::max(best, euclidean_norm(multiply(r, x)));
  }
  EXPECT_LE(best, s + 1e-12);
  EXPECT_GT(best, 0.95 * s);
}

TEST(LambdaMin, Identity) { EXPECT_EQ(lambda_min(SymMatrix{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), 1.0); }

TEST(LambdaMin, TwoByTwo) { EXPECT_NEAR(lambda_min(SymMatrix{{2, 1}, {1, 2}}), 1.0, 1e-15); }

TEST(LambdaMin, RejectsAsymmetricInput) {
  EXPECT_THROW((SymMatrix{{1.0, 2.0}, {2.0 + 1e-9, 1.0}}), ContractError);
  EXPECT_NO_THROW((SymMatrix{{1.0, 2.0}, {2.0 + 1e-13, 1.0}}));
}

TEST(LambdaMin, MatchesCubicRootsOn3x3) {
  oracle::Draw draw(15);
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = draw.symmetric(3);
    const auto expected = oracle::sym3_eigenvalues(a);
    const auto got = symmetric_eigenvalues(to_sym(a));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], expected[i], 1e-10);
  }
}

TEST(LambdaMin, RepeatedEigenvalues) {
  // Q diag(2,2,5) Q^T for a Householder Q.
  const std::vector<double> v = {1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
  const double d[3] = {2, 2, 5};
  oracle::Mat q(3, std::vector<double>(3)), a(3, std::vector<double>(3, 0.0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q[i][j] = (i == j ? 1.0 : 0.0) - 2.0 * v[i] * v[j];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) a[i][j] += q[i][k] * d[k] * q[j][k];
  const auto e = symmetric_eigenvalues(to_sym(a));
  EXPECT_NEAR(e[0], 2.0, 1e-13);
  EXPECT_NEAR(e[1], 2.0, 1e-13);
  EXPECT_NEAR(e[2], 5.0, 1e-13);
}

TEST(NormInequalities, EuclideanBelowL1BelowSqrtNTimesEuclidean) {
  oracle::Draw draw(16);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = draw.index(1, 10);
    const auto x = draw.normals(n);
    double l1 = 0.0;
    for (double v : x) l1 += std::abs(v);
    const double l2 = euclidean_norm(x);
    EXPECT_LE(l2, l1 * (1 + 1e-15));
    EXPECT_LE(l1, std::sqrt(static_cast<double>(n)) * l2 * (1 + 1e-15));
  }
}

TEST(NormInequalities, SpectralBelowFrobeniusBelowEntrywiseSum) {
  oracle::Draw draw(17);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t r = draw.index(1, 8), c = draw.index(1, 8);
    oracle::Mat a(r, std::vector<double>(c));
    for (auto& row : a)
      for (auto& v : row) v = draw.normal();
    const RectMatrix m = to_rect(a);
    EXPECT_LE(spectral_norm(m), frobenius_norm(m) + 1e-9);
    EXPECT_LE(frobenius_norm(m), entrywise_abs_sum(m) + 1e-9);
  }
}

TEST(RayleighQuotient, BoundedBelowByLambdaMin) {
  oracle::Draw draw(18);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = draw.index(1, 8);
    const SymMatrix a = to_sym(draw.symmetric(n));
    const double lmin = lambda_min(a);
    const auto x = draw.normals(n);
    EXPECT_GE(quadratic_form(a, x), lmin * oracle::dot(x, x) - 1e-9);
  }
}

TEST(RayleighQuotient, SampledMinimumNeverBelowLambdaMin) {
  oracle::Draw draw(19);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = draw.index(2, 6);
    const SymMatrix a = to_sym(draw.symmetric(n));
    const double lmin = lambda_min(a);
    double sampled = INFINITY;
    for (int s = 0; s < 10000; ++s) sampled = std::min(sampled, quadratic_form(a, unit_vector(draw, n)));
    EXPECT_GE(sampled, lmin - 1e-9);
  }
}

TEST(EigenvaluePerturbation, WeylLowerBound) {
  oracle::Draw draw(20);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = draw.index(1, 8);
    const SymMatrix a = to_sym(draw.symmetric(n));
    const SymMatrix b = to_sym(draw.symmetric(n));
    EXPECT_GE(lambda_min(a), lambda_min(b) - spectral_norm(difference(a, b)) - 1e-9);
  }
}

TEST(GramianOfVectors, PositiveSemidefinite) {
  oracle::Draw draw(21);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = draw.index(1, 8), k = draw.index(1, 8);
    std::vector<std::vector<double>> v(n);
    for (auto& vi : v) vi = draw.normals(k);
    SymMatrix g(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) g.set(i, j, oracle::dot(v[i], v[j]));
    const double lmin = lambda_min(g);
    EXPECT_GE(lmin, -1e-10);
    if (n <= k) {
      EXPECT_GT(lmin, 0.0);
    }
  }
}

TEST(Jacobi, DiagonalInputIsReturnedSorted) {
  SymMatrix a(3);
  a.set(0, 0, 3.0);
  a.set(1, 1, -1.0);
  a.set(2, 2, 2.0);
  EXPECT_EQ(symmetric_eigenvalues(a), (std::vector<double>{-1.0, 2.0, 3.0}));
}

TEST(Jacobi, ZeroMatrix) { EXPECT_EQ(lambda_min(SymMatrix(4)), 0.0); }
