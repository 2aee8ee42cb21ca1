#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qcsmooth/errors.hpp"
#include "qcsmooth/fluorescence.hpp"
#include "qcsmooth/generators.hpp"
#include "qcsmooth/hybrid.hpp"

using namespace qcsmooth;

namespace {

HybridOperator random_operator(Stream& rng, int nc, int d) {
  std::vector<CMatrix> blocks;
  for (int r = 0; r < nc; ++r) blocks.push_back(oracle::random_matrix(rng, d, d));
  return HybridOperator(blocks);
}

HybridOperator random_hermitian(Stream& rng, int nc, int d) {
  HybridOperator h = random_operator(rng, nc, d);
  return hermitize(h);
}

}  // namespace

TEST(Vectorize, IdentityColumnStacked) {
  const CVector v = vectorize(HybridOperator::identity(1, 2));
  ASSERT_EQ(v.size(), 4);
  EXPECT_EQ(v(0), Complex(1.0));
  EXPECT_EQ(v(1), Complex(0.0));
  EXPECT_EQ(v(2), Complex(0.0));
  EXPECT_EQ(v(3), Complex(1.0));
}

TEST(Vectorize, GroundStateInDetectedBlock) {
  // Basis (|+>, |->): |-><-| is entry (1,1), the last slot of block d.
  HybridOperator h = HybridOperator::zero(2, 2);
  h.block(0) = fluor::ground_state();
  const CVector v = vectorize(h);
  CVector expected = CVector::Zero(8);
  expected(3) = 1.0;
  EXPECT_EQ(v, expected);
}

TEST(Vectorize, ColumnStackingLayout) {
  Stream rng(1);
  const HybridOperator h = random_operator(rng, 3, 2);
  const CVector v = vectorize(h);
  for (int r = 0; r < 3; ++r) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) EXPECT_EQ(v(oracle::vec_index(r, i, j, 2)), h.block(r)(i, j));
    }
  }
}

TEST(Vectorize, RoundTripExact) {
  Stream rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const HybridOperator h = random_operator(rng, 1 + trial % 3, 1 + trial % 4);
    const HybridOperator back = devectorize(vectorize(h), h.n_classical(), h.dim());
    EXPECT_EQ((back - h).max_abs(), 0.0);
  }
}

TEST(Vectorize, DevectorizeRejectsWrongLength) {
  EXPECT_THROW(devectorize(CVector::Zero(7), 2, 2), DimensionMismatch);
}

TEST(HybridOperatorTest, RejectsRaggedBlocks) {
  EXPECT_THROW(HybridOperator({CMatrix::Zero(2, 2), CMatrix::Zero(3, 3)}), DimensionMismatch);
}

TEST(HybridOperatorTest, StateFlag) {
  Stream rng(3);
  HybridOperator rho = HybridOperator::zero(2, 2);
  rho.block(0) = 0.3 * oracle::random_density(rng, 2);
  rho.block(1) = 0.7 * oracle::random_density(rng, 2);
  EXPECT_TRUE(rho.is_state());
  rho.block(1)(0, 1) += 0.1;
  EXPECT_FALSE(rho.is_state());
}

TEST(Apply, ZeroAndIdentity) {
  Stream rng(4);
  const HybridOperator h = random_operator(rng, 2, 2);
  EXPECT_EQ(apply(HybridSuperop::zero(2, 2), h).max_abs(), 0.0);
  EXPECT_EQ((apply(HybridSuperop::identity(2, 2), h) - h).max_abs(), 0.0);
}

TEST(Apply, DetectorJumpOnMaximallyMixedBlocks) {
  const fluor::FluorParams p{.omega = 1.0, .gamma = 1.0, .eta = 0.8};
  const ModelGenerators g = build(fluor::build_hybrid(p));
  HybridOperator rho = HybridOperator::zero(2, 2);
  rho.block(0) = CMatrix::Identity(2, 2) / 4.0;
  rho.block(1) = CMatrix::Identity(2, 2) / 4.0;
  const HybridOperator out = apply(g.J, rho);
  const CMatrix expected = (p.gamma * p.eta / 2.0) * fluor::ground_state();
  EXPECT_LT((out.block(0) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(out.block(1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Apply, RejectsMismatchedSpace) {
  EXPECT_THROW(apply(HybridSuperop::identity(2, 2), HybridOperator::zero(1, 2)), DimensionMismatch);
}

TEST(Expm, ZeroTimeIsIdentity) {
  Stream rng(5);
  const HybridSuperop s(2, 2, oracle::random_matrix(rng, 8, 8));
  EXPECT_EQ((expm(s, 0.0).matrix() - CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Expm, Diagonal) {
  CMatrix m = CMatrix::Zero(4, 4);
  const double lambda[4] = {-1.0, 0.5, -3.0, 0.0};
  for (int i = 0; i < 4; ++i) m(i, i) = lambda[i];
  const CMatrix e = expm(HybridSuperop(1, 2, m), 0.7).matrix();
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(std::abs(e(i, i) - std::exp(lambda[i] * 0.7)), 0.0, 1e-14);
    for (int j = 0; j < 4; ++j) {
      if (i != j) EXPECT_EQ(std::abs(e(i, j)), 0.0);
    }
  }
}

TEST(Expm, MatchesTaylorOracle) {
  Stream rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const CMatrix m = oracle::random_matrix(rng, 8, 8);
    const CMatrix e = expm(HybridSuperop(2, 2, m), 0.3).matrix();
    EXPECT_LT((e - oracle::taylor_expm(m, 0.3)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Expm, NonNormalGeneratorMatchesTaylorOracle) {
  const ModelGenerators g = build(fluor::build_hybrid({.omega = 2.0, .gamma = 1.0, .eta = 0.3}));
  for (double t : {0.05, 1.0, 7.5}) {
    EXPECT_LT((expm(g.D, t).matrix() - oracle::taylor_expm(g.D.matrix(), t)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Expm, Semigroup) {
  Stream rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const HybridSuperop s(2, 2, oracle::random_matrix(rng, 8, 8));
    const double t1 = rng.uniform();
    const double t2 = rng.uniform();
    const CMatrix lhs = expm(s, t1 + t2).matrix();
    const CMatrix rhs = (expm(s, t1) * expm(s, t2)).matrix();
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Expm, RejectsNegativeTimeAndNonFinite) {
  const HybridSuperop s = HybridSuperop::identity(1, 2);
  EXPECT_THROW(expm(s, -1.0), Error);
  CMatrix bad = CMatrix::Identity(4, 4);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(expm(HybridSuperop(1, 2, bad), 1.0), NonFiniteValue);
}

TEST(Pairing, StateWithItself) {
  Stream rng(8);
  HybridOperator rho = HybridOperator::zero(2, 2);
  rho.block(0) = 0.4 * oracle::random_density(rng, 2);
  rho.block(1) = 0.6 * oracle::random_density(rng, 2);
  const Complex v = hs_pairing(rho, rho);
  EXPECT_LT(std::abs(v.imag()), 1e-15);
  EXPECT_GT(v.real(), 0.0);
  EXPECT_LE(v.real(), 1.0);
  EXPECT_NEAR(v.real(), purity(rho.block(0)) + purity(rho.block(1)), 1e-15);
}

TEST(Pairing, IdentityGivesTotalTrace) {
  Stream rng(9);
  const HybridOperator a = random_operator(rng, 3, 2);
  EXPECT_LT(std::abs(hs_pairing(a, HybridOperator::identity(3, 2)) - a.total_trace()), 1e-15);
}

TEST(Pairing, MatchesBruteForce) {
  Stream rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const HybridOperator a = random_hermitian(rng, 2, 2);
    const HybridOperator b = random_hermitian(rng, 2, 2);
    const Complex v = hs_pairing(a, b);
    EXPECT_LT(std::abs(v - oracle::pairing(a.blocks(), b.blocks())), 1e-14);
    EXPECT_LT(std::abs(v.imag()), 1e-10);
  }
}

TEST(Dual, IdentityAndInvolution) {
  Stream rng(11);
  EXPECT_EQ((dual(HybridSuperop::identity(2, 3)).matrix() - CMatrix::Identity(18, 18)).cwiseAbs().maxCoeff(), 0.0);
  const HybridSuperop s(2, 3, oracle::random_matrix(rng, 18, 18));
  EXPECT_EQ((dual(dual(s)).matrix() - s.matrix()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dual, PairingIdentityRandom) {
  Stream rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const HybridSuperop s(2, 2, oracle::random_matrix(rng, 8, 8));
    const HybridOperator a = random_operator(rng, 2, 2);
    const HybridOperator rho = random_operator(rng, 2, 2);
    const Complex lhs = oracle::pairing(a.blocks(), apply(s, rho).blocks());
    const Complex rhs = oracle::pairing(rho.blocks(), apply(dual(s), a).blocks());
    EXPECT_LT(std::abs(lhs - rhs), 1e-10);
  }
}

TEST(Dual, PairingIdentityDetectorJump) {
  const ModelGenerators g = build(fluor::build_hybrid({.omega = 1.0, .gamma = 1.0, .eta = 0.8}));
  const HybridSuperop jd = dual(g.J);
  Stream rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const HybridOperator a = random_operator(rng, 2, 2);
    const HybridOperator rho = random_operator(rng, 2, 2);
    EXPECT_LT(std::abs(hs_pairing(a, apply(g.J, rho)) - hs_pairing(rho, apply(jd, a))), 1e-10);
  }
}

TEST(Dual, ReversesComposition) {
  Stream rng(14);
  const HybridSuperop u(2, 2, oracle::random_matrix(rng, 8, 8));
  const HybridSuperop v(2, 2, oracle::random_matrix(rng, 8, 8));
  EXPECT_LT((dual(u * v).matrix() - (dual(v) * dual(u)).matrix()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Purity, PureAndMixed) {
  EXPECT_NEAR(purity(fluor::ground_state()), 1.0, 1e-15);
  EXPECT_NEAR(purity(CMatrix::Identity(2, 2) / 2.0), 0.5, 1e-15);
}
