#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "spiked/auxiliary.hpp"

using namespace spiked;

namespace {

const GammaParams kP3{3, TimeConvention::BSquaredXiPrime, 101};

}  // namespace

TEST(Gamma, VanishesAtZeroOverlapAndZeroSnr) {
  for (const Prior& prior : {make_rademacher(), make_sparse_rademacher(0.3)}) {
    const AuxiliaryFunctions aux(prior, kP3);
    for (double b : {0.0, 0.5, 3.0}) EXPECT_EQ(aux.gamma(b, 0.0), 0.0);
    for (double s : {0.1, 0.5, 1.0}) EXPECT_EQ(aux.gamma(0.0, s), 0.0);
  }
}

TEST(Gamma, RademacherMatchesTrapezoidOracle) {
  // p = 3, b = 1, s = 0.5: t = b^2 p s^2 = 0.75.
  const AuxiliaryFunctions aux(make_rademacher(), kP3);
  EXPECT_NEAR(aux.gamma(1.0, 0.5), oracle::literal_gamma(make_rademacher(), 0.75), 1e-9);
}

TEST(Gamma, SparseMatchesTrapezoidOracleAcrossTimes) {
  for (double rho : {0.1, 0.3, 0.7}) {
    const Prior prior = make_sparse_rademacher(rho);
    const AuxiliaryFunctions aux(prior, kP3);
    for (double t : {0.05, 0.75, 3.0, 12.0, 27.0}) {
      EXPECT_NEAR(aux.gamma_at_time(t), oracle::literal_gamma(prior, t), 1e-9) << "rho=" << rho << " t=" << t;
    }
  }
}

TEST(Gamma, TiltedAndDirectFormsAgree) {
  const AuxiliaryFunctions aux(make_sparse_rademacher(0.2), GammaParams{3, TimeConvention::BSquaredXiPrime, 201});
  for (double t : {0.1, 1.0, 2.0, 5.0}) EXPECT_NEAR(aux.gamma_at_time(t), aux.gamma_at_time_direct(t), 1e-6) << t;
}

TEST(Gamma, EffectiveTimeConventions) {
  const GammaParams b2{3, TimeConvention::BSquaredXiPrime, 101};
  const GammaParams b1{3, TimeConvention::BXiPrime, 101};
  EXPECT_DOUBLE_EQ(effective_time(b2, 2.0, 0.5), 4.0 * 3.0 * 0.25);
  EXPECT_DOUBLE_EQ(effective_time(b1, 2.0, 0.5), 2.0 * 3.0 * 0.25 / 2.0);
}

TEST(Gamma, RejectsBadInputs) {
  EXPECT_THROW(AuxiliaryFunctions(Prior({{0.5, 0.5}, {0.6, 0.5}}), kP3), CenteringError);
  EXPECT_THROW(AuxiliaryFunctions(make_rademacher(), GammaParams{1, TimeConvention::BSquaredXiPrime, 101}), DomainError);
  EXPECT_THROW(AuxiliaryFunctions(make_rademacher(), GammaParams{3, TimeConvention::BSquaredXiPrime, 20}), DomainError);
  const AuxiliaryFunctions aux(make_rademacher(), kP3);
  EXPECT_THROW(aux.gamma(-1.0, 0.5), DomainError);
  EXPECT_THROW(aux.gamma(1.0, -0.5), DomainError);
}

TEST(GammaProperty, RangeBetweenZeroAndSecondMoment) {
  for (double rho : {0.1, 0.5, 1.0}) {
    const AuxiliaryFunctions aux(make_sparse_rademacher(rho), kP3);
    for (double b = 0.25; b <= 4.0; b += 0.25)
      for (double s = 0.1; s <= 1.0 + 1e-12; s += 0.1) {
        const double g = aux.gamma(b, s);
        EXPECT_GE(g, 0.0);
        EXPECT_LE(g, aux.v_star() + 1e-12);
      }
  }
}

TEST(GammaProperty, StrictlyIncreasingInB) {
  for (const Prior& prior : {make_rademacher(), make_sparse_rademacher(0.3)}) {
    const AuxiliaryFunctions aux(prior, kP3);
    for (int j = 1; j <= 10; ++j) {
      const double s = 0.1 * j;
      double prev = aux.gamma(0.2, s);
      for (int i = 2; i <= 15; ++i) {
        const double cur = aux.gamma(0.2 * i, s);
        EXPECT_GT(cur - prev, 1e-8) << "b=" << 0.2 * i << " s=" << s;
        prev = cur;
      }
    }
  }
}

TEST(GammaProperty, NondecreasingInS) {
  const AuxiliaryFunctions aux(make_sparse_rademacher(0.4), kP3);
  for (double b : {0.5, 1.0, 2.0}) {
    double prev = 0.0;
    for (int j = 1; j <= 50; ++j) {
      const double cur = aux.gamma(b, 0.02 * j);
      EXPECT_GE(cur, prev - 1e-14);
      prev = cur;
    }
  }
}

TEST(GammaProperty, QuadratureOrderConvergence) {
  for (const Prior& prior : {make_rademacher(), make_sparse_rademacher(0.3)}) {
    const AuxiliaryFunctions lo(prior, kP3), hi(prior, GammaParams{3, TimeConvention::BSquaredXiPrime, 201});
    for (int i = 1; i <= 15; ++i)
      for (int j = 1; j <= 10; ++j) EXPECT_NEAR(lo.gamma(0.2 * i, 0.1 * j), hi.gamma(0.2 * i, 0.1 * j), 1e-10);
  }
}

TEST(BigGamma, EmptyIntegralAndZeroSnr) {
  const AuxiliaryFunctions aux(make_rademacher(), kP3);
  EXPECT_EQ(aux.big_gamma(1.3, 0.0), 0.0);
  EXPECT_NEAR(aux.big_gamma(0.0, 1.0), -2.0, 1e-12);
  EXPECT_THROW(aux.big_gamma(1.0, 1.5), DomainError);
  EXPECT_THROW(aux.big_gamma(1.0, -0.1), DomainError);
}

TEST(BigGamma, ZeroSnrClosedFormMatchesQuadrature) {
  // Gamma_0(v) = -int_0^v p (p-1) s^(p-1) ds, by a midpoint sum.
  const AuxiliaryFunctions aux(make_rademacher(), GammaParams{4, TimeConvention::BSquaredXiPrime, 101});
  const int m = 200000;
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    const double s = 0.7 * (k + 0.5) / m;
    sum -= 12.0 * s * s * s;
  }
  EXPECT_NEAR(aux.big_gamma(0.0, 0.7), sum * 0.7 / m, 1e-10);
}

TEST(BigGamma, MatchesCompositeSimpsonOfGamma) {
  const AuxiliaryFunctions aux(make_sparse_rademacher(0.5), kP3);
  const double b = 1.3, v = 0.8;
  const int m = 4000;
  double sum = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double s = v * k / m;
    const double f = 6.0 * s * (aux.gamma(b, s) - s);
    sum += (k == 0 || k == m) ? f : (k % 2 ? 4.0 * f : 2.0 * f);
  }
  EXPECT_NEAR(aux.big_gamma(b, v), sum * v / (3.0 * m), 1e-10);
}

TEST(BigGamma, IncreasingInB) {
  const AuxiliaryFunctions aux(make_rademacher(), kP3);
  for (double v : {0.2, 0.6, 1.0}) {
    double prev = aux.big_gamma(0.0, v);
    for (double b = 0.25; b <= 3.0; b += 0.25) {
      const double cur = aux.big_gamma(b, v);
      EXPECT_GT(cur, prev);
      prev = cur;
    }
  }
}

TEST(SupBigGamma, ZeroSnrMaxAtFirstGridPoint) {
  const AuxiliaryFunctions aux(make_rademacher(), kP3);
  const auto r = aux.sup_big_gamma(0.0, 0.001);
  EXPECT_LT(r.sup, 0.0);
  EXPECT_DOUBLE_EQ(r.argmax_v, 0.001);
}

TEST(SupBigGamma, NondecreasingInBAndPositiveAtFive) {
  const AuxiliaryFunctions aux(make_rademacher(), kP3);
  double prev = -INFINITY;
  for (double b = 0.0; b <= 3.0; b += 0.3) {
    const double cur = aux.sup_big_gamma(b, 0.01).sup;
    EXPECT_GE(cur, prev);
    prev = cur;
  }
  EXPECT_GT(aux.sup_big_gamma(5.0, 0.001).sup, 0.0);
}

TEST(SupBigGamma, GridIncludesSecondMomentAndExcludesZero) {
  const AuxiliaryFunctions aux(make_sparse_rademacher(0.3), kP3);
  const auto grid = aux.v_grid(0.03);
  EXPECT_GT(grid.front(), 0.0);
  EXPECT_DOUBLE_EQ(grid.back(), aux.v_star());
  EXPECT_THROW(aux.sup_big_gamma(1.0, 0.2), DomainError);
  EXPECT_THROW(aux.sup_big_gamma(1.0, 0.0), DomainError);
}
