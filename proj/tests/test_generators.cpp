#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qcsmooth/errors.hpp"
#include "qcsmooth/fluorescence.hpp"
#include "qcsmooth/generators.hpp"

using namespace qcsmooth;

namespace {

const fluor::FluorParams kParams{.omega = 1.0, .gamma = 1.0, .eta = 0.8};

HybridOperator random_state(Stream& rng, int nc, int d) {
  HybridOperator rho(nc, d);
  double total = 0.0;
  std::vector<double> w(static_cast<std::size_t>(nc));
  for (auto& x : w) total += (x = rng.uniform());
  for (int r = 0; r < nc; ++r) rho.block(r) = (w[r] / total) * oracle::random_density(rng, d);
  return rho;
}

double max_entry(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Build, EmptySpecGivesZeroGenerators) {
  ModelSpec spec;
  spec.n_classical = 2;
  spec.dim = 3;
  const ModelGenerators g = build(spec);
  EXPECT_EQ(max_entry(g.L.matrix()), 0.0);
  EXPECT_EQ(max_entry(g.D.matrix()), 0.0);
  EXPECT_EQ(max_entry(g.J.matrix()), 0.0);
  EXPECT_EQ(g.labels, (std::vector<std::string>{"0", "1"}));
}

TEST(Build, HybridFluorescenceMatchesRateEquation) {
  for (const auto& p : {kParams, fluor::FluorParams{.omega = 0.7, .gamma = 1.3, .eta = 0.35}}) {
    const ModelGenerators g = build(fluor::build_hybrid(p));
    Stream rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      const HybridOperator rho = random_state(rng, 2, 2);
      const auto expected = oracle::fluor_rhs(rho.blocks(), p.omega, p.gamma, p.eta);
      const HybridOperator out = apply(g.L, rho);
      for (int r = 0; r < 2; ++r) EXPECT_LT(max_entry(out.block(r) - expected[r]), 1e-12);
    }
    const CMatrix l_oracle = oracle::matrix_of(
        [&](const std::vector<CMatrix>& b) { return oracle::fluor_rhs(b, p.omega, p.gamma, p.eta); }, 2, 2);
    EXPECT_LT(max_entry(g.L.matrix() - l_oracle), 1e-12);
    const CMatrix j_oracle =
        oracle::matrix_of([&](const std::vector<CMatrix>& b) { return oracle::fluor_jump(b, p.gamma, p.eta); }, 2, 2);
    EXPECT_LT(max_entry(g.J.matrix() - j_oracle), 1e-12);
  }
}

TEST(Build, PlainObservedChannel) {
  const ModelGenerators g = build(fluor::build_plain(kParams));
  Stream rng(22);
  const CMatrix s = oracle::sigma();
  for (int trial = 0; trial < 5; ++trial) {
    HybridOperator rho(1, 2);
    rho.block(0) = oracle::random_density(rng, 2);
    const CMatrix expected = kParams.gamma * kParams.eta * s * rho.block(0) * s.adjoint();
    EXPECT_LT(max_entry(apply(g.J, rho).block(0) - expected), 1e-15);
  }
}

TEST(Build, PerfectDetectorJumpIsFullGain) {
  const fluor::FluorParams p{.omega = 1.0, .gamma = 1.0, .eta = 1.0};
  const ModelGenerators g = build(fluor::build_plain(p));
  HybridOperator rho(1, 2);
  Stream rng(23);
  rho.block(0) = oracle::random_density(rng, 2);
  const CMatrix s = oracle::sigma();
  EXPECT_LT(max_entry(apply(g.J, rho).block(0) - s * rho.block(0) * s.adjoint()), 1e-15);
}

TEST(Build, SplitAndTraceConservation) {
  Stream rng(24);
  for (const ModelSpec& spec : {fluor::build_hybrid(kParams), fluor::build_plain(kParams)}) {
    const ModelGenerators g = build(spec);
    EXPECT_LT(max_entry(g.L.matrix() - g.D.matrix() - g.J.matrix()), 1e-12);
    for (int trial = 0; trial < 10; ++trial) {
      const HybridOperator rho = random_state(rng, g.n_classical, g.dim);
      EXPECT_LT(std::abs(hs_pairing(HybridOperator::identity(g.n_classical, g.dim), apply(g.L, rho))), 1e-10);
      EXPECT_EQ((apply(g.L, rho) - apply(g.D, rho) - apply(g.J, rho)).max_abs() < 1e-15, true);
    }
  }
}

TEST(Build, RejectsInvalidSpecs) {
  ModelSpec spec = fluor::build_hybrid(kParams);
  spec.jumps[0].rate = -0.1;
  EXPECT_THROW(build(spec), InvalidModel);
  spec = fluor::build_hybrid(kParams);
  spec.jumps[0].target = 5;
  EXPECT_THROW(build(spec), InvalidModel);
  spec = fluor::build_hybrid(kParams);
  for (auto& j : spec.jumps) j.observed = false;
  EXPECT_NO_THROW(spec.validate());
  EXPECT_THROW(spec.validate(true), InvalidModel);
}

TEST(MeasurementMap, HybridResetsToGroundInDetected) {
  const ModelGenerators g = build(fluor::build_hybrid(kParams));
  Stream rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    const HybridOperator out = measurement_map(g, random_state(rng, 2, 2));
    EXPECT_LT(max_entry(out.block(0) - fluor::ground_state()), 1e-15);
    EXPECT_EQ(max_entry(out.block(1)), 0.0);
  }
}

TEST(MeasurementMap, PlainResetsToGround) {
  const ModelGenerators g = build(fluor::build_plain(kParams));
  Stream rng(26);
  HybridOperator rho(1, 2);
  rho.block(0) = oracle::random_density(rng, 2);
  EXPECT_LT(max_entry(measurement_map(g, rho).block(0) - fluor::ground_state()), 1e-15);
}

TEST(MeasurementMap, DarkStateCannotEmit) {
  const ModelGenerators g = build(fluor::build_hybrid(kParams));
  EXPECT_THROW(measurement_map(g, g.initial), NullJump);
}

TEST(ConditionalPropagate, ZeroStepIsIdentity) {
  const ModelGenerators g = build(fluor::build_hybrid(kParams));
  Stream rng(27);
  const HybridOperator rho = random_state(rng, 2, 2);
  EXPECT_EQ((conditional_propagate(g, rho, 0.0) - rho).max_abs(), 0.0);
}

TEST(ConditionalPropagate, UnmonitoredEqualsMasterSolution) {
  ModelSpec spec = fluor::build_hybrid(kParams);
  for (auto& j : spec.jumps) j.observed = false;
  const ModelGenerators g = build(spec);
  const HybridOperator a = conditional_propagate(g, g.initial, 2.5);
  const HybridOperator b = master_solve(g, g.initial, {2.5}).back();
  EXPECT_LT((a - b).max_abs(), 1e-12);
}

TEST(ConditionalPropagate, MatchesTaylorOracle) {
  const ModelGenerators g = build(fluor::build_hybrid(kParams));
  const CVector v = oracle::taylor_expm(g.D.matrix(), 1.0) * vectorize(g.initial);
  HybridOperator expected = devectorize(v, 2, 2);
  expected *= 1.0 / expected.total_trace();
  EXPECT_LT((conditional_propagate(g, g.initial, 1.0) - expected).max_abs(), 1e-12);
}

TEST(ConditionalPropagate, ExtinctBelowFloor) {
  ModelSpec spec;
  spec.n_classical = 1;
  spec.dim = 1;
  spec.jumps.push_back({.source = 0, .target = 0, .op = CMatrix::Identity(1, 1), .rate = 1.0, .observed = true});
  const ModelGenerators g = build(spec);
  HybridOperator rho(1, 1);
  rho.block(0)(0, 0) = 1.0;
  EXPECT_NO_THROW(conditional_propagate(g, rho, 30.0));
  EXPECT_THROW(conditional_propagate(g, rho, 40.0), Extinct);
}

TEST(MasterSolve, InitialTimeAndTraceConservation) {
  const ModelGenerators g = build(fluor::build_hybrid(kParams));
  const auto times = uniform_grid(30.0, 0.05);
  const auto states = master_solve(g, g.initial, times);
  EXPECT_EQ((states.front() - g.initial).max_abs(), 0.0);
  for (const auto& s : states) {
    EXPECT_NEAR(s.total_trace().real(), 1.0, 1e-9);
    EXPECT_TRUE(s.is_state(1e-10, 1e-8, 1e-9));
  }
}

TEST(MasterSolve, SteadyStateClosedForm) {
  const ModelGenerators g = build(fluor::build_hybrid(kParams));
  const HybridOperator s = master_solve(g, g.initial, {30.0}).back();
  // Closed form written out independently for Omega = gamma = 1.
  CMatrix rho_inf(2, 2);
  rho_inf << 1.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 2.0;
  rho_inf /= 3.0;
  EXPECT_LT(max_entry(reduce_quantum(s) - rho_inf), 1e-9);
  EXPECT_LT(max_entry(fluor::steady_state(kParams) - rho_inf), 1e-15);
  const ClassicalDist c = reduce_classical(master_solve(g, g.initial, {80.0}).back());
  EXPECT_NEAR(c.probs[0], 0.8, 1e-9);
  EXPECT_NEAR(c.probs[1], 0.2, 1e-9);
}

TEST(MasterSolve, HybridReducesToPlain) {
  const ModelGenerators h = build(fluor::build_hybrid(kParams));
  const ModelGenerators p = build(fluor::build_plain(kParams));
  const auto times = uniform_grid(30.0, 0.1);
  const auto hs = master_solve(h, h.initial, times);
  const auto ps = master_solve(p, p.initial, times);
  for (std::size_t k = 0; k < times.size(); ++k) EXPECT_LT(max_entry(reduce_quantum(hs[k]) - ps[k].block(0)), 1e-9);
}

TEST(MasterSolve, PerfectDetectorStaysDetected) {
  const ModelGenerators g = build(fluor::build_hybrid({.omega = 1.0, .gamma = 1.0, .eta = 1.0}));
  for (const auto& s : master_solve(g, g.initial, uniform_grid(20.0, 0.5))) {
    EXPECT_LT(max_entry(s.block(1)), 1e-15);
  }
}

TEST(MasterSolve, FreeDecayWithoutDrive) {
  const ModelGenerators g = build(fluor::build_plain({.omega = 0.0, .gamma = 1.0, .eta = 0.5}));
  HybridOperator rho(1, 2);
  rho.block(0)(0, 0) = 1.0;
  const auto times = uniform_grid(5.0, 0.5);
  const auto states = master_solve(g, rho, times);
  for (std::size_t k = 0; k < times.size(); ++k) EXPECT_NEAR(states[k].block(0)(0, 0).real(), std::exp(-times[k]), 1e-13);
}

TEST(MasterSolve, RejectsDecreasingTimes) {
  const ModelGenerators g = build(fluor::build_plain(kParams));
  EXPECT_THROW(master_solve(g, g.initial, {1.0, 0.5}), ConfigError);
}

TEST(Reduce, SeparableState) {
  const std::vector<double> probs = {1.0, 0.0};
  const HybridOperator rho = HybridOperator::separable(fluor::ground_state(), probs);
  EXPECT_EQ(max_entry(reduce_quantum(rho) - fluor::ground_state()), 0.0);
  EXPECT_EQ(reduce_classical(rho).probs, probs);
  HybridOperator single(1, 2);
  single.block(0) = fluor::ground_state();
  EXPECT_EQ(reduce_classical(single).probs, std::vector<double>{1.0});
}

TEST(Grid, Divisibility) {
  EXPECT_EQ(grid_steps(60.0, 0.05), 1200);
  EXPECT_EQ(uniform_grid(60.0, 0.05).back(), 60.0);
  EXPECT_THROW(grid_steps(1.0, 0.3), ConfigError);
  EXPECT_THROW(grid_steps(1.0, 0.0), ConfigError);
  EXPECT_EQ(uniform_grid(0.0, 0.1).size(), 1u);
}
