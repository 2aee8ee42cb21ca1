#include "qcsmooth/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>

#include "qcsmooth/ensemble.hpp"
#include "qcsmooth/fluorescence.hpp"
#include "qcsmooth/generators.hpp"
#include "qcsmooth/jump_engine.hpp"
#include "qcsmooth/smoother.hpp"
#include "qcsmooth/stats.hpp"

namespace qcsmooth {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

CMatrix random_matrix(Stream& rng, int n) {
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
  }
  return m;
}

HybridOperator random_operator(Stream& rng, int nc, int d) {
  std::vector<CMatrix> blocks;
  for (int r = 0; r < nc; ++r) blocks.push_back(random_matrix(rng, d));
  return HybridOperator(std::move(blocks));
}

HybridOperator random_state(Stream& rng, int nc, int d) {
  std::vector<CMatrix> blocks;
  double total = 0.0;
  for (int r = 0; r < nc; ++r) {
    const CMatrix a = random_matrix(rng, d);
    CMatrix rho = a * a.adjoint();
    total += rho.trace().real();
    blocks.push_back(std::move(rho));
  }
  for (auto& b : blocks) b /= total;
  return HybridOperator(std::move(blocks));
}

double max_diff(const HybridOperator& a, const HybridOperator& b) { return (a - b).max_abs(); }

double min_block_eigenvalue(const HybridOperator& h) {
  double lo = 1.0;
  for (const auto& b : h.blocks()) {
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(CMatrix(0.5 * (b + b.adjoint())));
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

class Suite {
 public:
  explicit Suite(std::function<void(const CheckResult&)> sink) : sink_(std::move(sink)) {}

  template <class F>
  void check(std::string name, F&& body) {
    CheckResult r{std::move(name), false, {}};
    try {
      std::ostringstream detail;
      r.passed = body(detail);
      r.detail = detail.str();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    if (sink_) sink_(r);
    results_.push_back(std::move(r));
  }

  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  std::function<void(const CheckResult&)> sink_;
  std::vector<CheckResult> results_;
};

void algebra_checks(Suite& suite, std::uint64_t seed) {
  suite.check("vectorize round trip is exact", [&](std::ostream& out) {
    Stream rng(seed, 1);
    const HybridOperator h = random_operator(rng, 3, 3);
    const double err = max_diff(devectorize(vectorize(h), 3, 3), h);
    out << "max error " << err;
    return err == 0.0;
  });
  suite.check("expm semigroup", [&](std::ostream& out) {
    Stream rng(seed, 2);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const HybridSuperop s(2, 2, random_matrix(rng, 8));
      const double t1 = rng.uniform();
      const double t2 = rng.uniform();
      const CMatrix lhs = expm(s, t1 + t2).matrix();
      const CMatrix rhs = (expm(s, t1) * expm(s, t2)).matrix();
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    out << fmt("max error %.3g", worst);
    return worst <= 1e-9;
  });
  suite.check("dual pairing identity", [&](std::ostream& out) {
    Stream rng(seed, 3);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const HybridSuperop s(2, 2, random_matrix(rng, 8));
      const HybridOperator a = random_operator(rng, 2, 2);
      const HybridOperator rho = random_operator(rng, 2, 2);
      worst = std::max(worst, std::abs(hs_pairing(a, apply(s, rho)) - hs_pairing(rho, apply(dual(s), a))));
    }
    out << fmt("max error %.3g", worst);
    return worst <= 1e-10;
  });
}

void generator_checks(Suite& suite, std::uint64_t seed) {
  const fluor::FluorParams p{.omega = 1.0, .gamma = 1.0, .eta = 0.8};
  const ModelGenerators hybrid = build(fluor::build_hybrid(p));
  const ModelGenerators plain = build(fluor::build_plain(p));

  suite.check("generators conserve total trace", [&](std::ostream& out) {
    Stream rng(seed, 4);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const HybridOperator rho = random_state(rng, 2, 2);
      worst = std::max(worst, std::abs(hs_pairing(HybridOperator::identity(2, 2), apply(hybrid.L, rho))));
      const HybridOperator rp = random_state(rng, 1, 2);
      worst = std::max(worst, std::abs(hs_pairing(HybridOperator::identity(1, 2), apply(plain.L, rp))));
    }
    out << fmt("max |Tr L rho| %.3g", worst);
    return worst <= 1e-10;
  });
  suite.check("L equals D plus J", [&](std::ostream& out) {
    Stream rng(seed, 5);
    double worst = (hybrid.L.matrix() - hybrid.D.matrix() - hybrid.J.matrix()).cwiseAbs().maxCoeff();
    const HybridOperator rho = random_state(rng, 2, 2);
    worst = std::max(worst, max_diff(apply(hybrid.L, rho), apply(hybrid.D, rho) + apply(hybrid.J, rho)));
    out << fmt("max error %.3g", worst);
    return worst <= 1e-12;
  });
  suite.check("master solution keeps trace and positivity", [&](std::ostream& out) {
    const auto times = uniform_grid(30.0, 0.05);
    const auto states = master_solve(hybrid, hybrid.initial, times);
    double trace_err = 0.0;
    double min_eig = 1.0;
    for (const auto& s : states) {
      trace_err = std::max(trace_err, std::abs(s.total_trace() - 1.0));
      min_eig = std::min(min_eig, min_block_eigenvalue(s));
    }
    out << fmt("trace error %.3g, min eigenvalue %.3g", trace_err, min_eig);
    return trace_err <= 1e-9 && min_eig >= -1e-8;
  });
  suite.check("hybrid master solution reduces to plain model", [&](std::ostream& out) {
    const auto times = uniform_grid(30.0, 0.05);
    const auto h = master_solve(hybrid, hybrid.initial, times);
    const auto q = master_solve(plain, plain.initial, times);
    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      worst = std::max(worst, (reduce_quantum(h[k]) - q[k].block(0)).cwiseAbs().maxCoeff());
    }
    out << fmt("max error %.3g", worst);
    return worst <= 1e-9;
  });
  suite.check("steady state matches closed form", [&](std::ostream& out) {
    const auto s = master_solve(hybrid, hybrid.initial, {30.0}).back();
    const double err = (reduce_quantum(s) - fluor::steady_state(p)).cwiseAbs().maxCoeff();
    const double perr = std::abs(reduce_classical(s).probs[0] - p.eta);
    out << fmt("rho error %.3g, p_d error %.3g", err, perr);
    return err <= 1e-9 && perr <= 1e-6;
  });
  suite.check("measurement map resets to ground state in d", [&](std::ostream& out) {
    Stream rng(seed, 6);
    double worst = 0.0;
    HybridOperator reset = HybridOperator::zero(2, 2);
    reset.block(0) = fluor::ground_state();
    for (int trial = 0; trial < 10; ++trial) {
      worst = std::max(worst, max_diff(measurement_map(hybrid, random_state(rng, 2, 2)), reset));
    }
    out << fmt("max error %.3g", worst);
    return worst <= 1e-12;
  });
}

void fluorescence_checks(Suite& suite) {
  const fluor::FluorParams p{.omega = 1.0, .gamma = 1.0, .eta = 0.8};
  suite.check("waiting-time Laplace thinning identity", [&](std::ostream& out) {
    const fluor::FluorParams p1{.omega = p.omega, .gamma = p.gamma, .eta = 1.0};
    double worst = 0.0;
    for (int k = 0; k <= 50; ++k) {
      const std::complex<double> u(0.1 * k, 0.05 * k - 1.0);
      const auto w1 = fluor::waiting_laplace(p1, u);
      const auto lhs = fluor::waiting_laplace(p, u) * (1.0 - (1.0 - p.eta) * w1);
      worst = std::max(worst, std::abs(lhs - p.eta * w1));
    }
    out << fmt("max error %.3g", worst);
    return worst <= 1e-12;
  });
  suite.check("waiting-time density is normalized and non-negative", [&](std::ostream& out) {
    const fluor::WaitingTimeLaw law(p);
    double lo = 0.0;
    for (int k = 0; k <= 6000; ++k) lo = std::min(lo, law.density(0.01 * k));
    const double mass = law.cdf(60.0);
    out << fmt("mass %.12g, min density %.3g", mass, lo);
    return std::abs(mass - 1.0) <= 1e-6 && lo >= -1e-10;
  });
  suite.check("survival matches waiting-time law", [&](std::ostream& out) {
    const ModelGenerators g = build(fluor::build_hybrid(p));
    const fluor::WaitingTimeLaw law(p);
    double worst = 0.0;
    double prev = 1.0;
    bool monotone = true;
    for (int k = 0; k <= 100; ++k) {
      const double s = survival(g, g.initial, 0.2 * k);
      monotone = monotone && s <= prev + 1e-12 && s >= -1e-9 && s <= 1.0 + 1e-9;
      prev = s;
      worst = std::max(worst, std::abs(s - law.survival(0.2 * k)));
    }
    out << fmt("max error %.3g", worst);
    return monotone && worst <= 1e-6;
  });
}

void trajectory_checks(Suite& suite, std::uint64_t seed) {
  const fluor::FluorParams p{.omega = 1.0, .gamma = 1.0, .eta = 0.8};
  const ModelGenerators hybrid = build(fluor::build_hybrid(p));
  const ModelGenerators plain = build(fluor::build_plain(p));
  const GridPropagator hprop(hybrid, 0.05);
  const GridPropagator pprop(plain, 0.05);

  suite.check("filtered states are valid with purity in [1/2, 1]", [&](std::ostream& out) {
    double min_eig = 1.0;
    double pur_lo = 1.0;
    double pur_hi = 0.0;
    bool states = true;
    for (std::uint64_t i = 0; i < 10; ++i) {
      Stream rng(seed + 7, i);
      const FilteredPath path = simulate_trajectory(hprop, hybrid.initial, 30.0, rng);
      for (const auto& s : path.states) {
        states = states && s.is_state(1e-10, 1e-8, 1e-9);
        min_eig = std::min(min_eig, min_block_eigenvalue(s));
        const double pq = purity(reduce_quantum(s));
        pur_lo = std::min(pur_lo, pq);
        pur_hi = std::max(pur_hi, pq);
      }
    }
    out << fmt("purity range [%.6f, ", pur_lo) << fmt("%.6f]", pur_hi);
    return states && min_eig >= -1e-8 && pur_lo >= 0.5 - 1e-9 && pur_hi <= 1.0 + 1e-9;
  });
  suite.check("perfect detector keeps filtered state pure after first jump", [&](std::ostream& out) {
    const ModelGenerators g = build(fluor::build_hybrid({.omega = 1.0, .gamma = 1.0, .eta = 1.0}));
    const GridPropagator prop(g, 0.05);
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 10; ++i) {
      Stream rng(seed + 8, i);
      const FilteredPath path = simulate_trajectory(prop, g.initial, 30.0, rng);
      for (std::size_t k = 0; k < path.times.size(); ++k) {
        worst = std::max(worst, std::abs(1.0 - purity(reduce_quantum(path.states[k]))));
      }
    }
    out << fmt("max 1 - purity %.3g", worst);
    return worst <= 1e-9;
  });
  suite.check("hybrid and plain filtered states agree", [&](std::ostream& out) {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 10; ++i) {
      Stream rng(seed + 9, i);
      const Trajectory traj = sample_trajectory(hybrid, hybrid.initial, 30.0, rng);
      const FilteredPath h = filter_trajectory(hprop, hybrid.initial, traj);
      const FilteredPath q = filter_trajectory(pprop, plain.initial, traj);
      for (std::size_t k = 0; k < h.states.size(); ++k) {
        worst = std::max(worst, (reduce_quantum(h.states[k]) - q.states[k].block(0)).cwiseAbs().maxCoeff());
      }
    }
    out << fmt("max error %.3g", worst);
    return worst <= 1e-9;
  });
  suite.check("renewal: inter-detection intervals identically distributed", [&](std::ostream& out) {
    // Second and third intervals of independent records.
    std::vector<double> second;
    std::vector<double> third;
    const std::size_t n = 2000;
    const HybridOperator reset = measurement_map(hybrid, HybridOperator::identity(2, 2));
    for (std::uint64_t i = 0; i < n; ++i) {
      Stream rng(seed + 10, i);
      const auto first = sample_jump_time(hybrid, hybrid.initial, 1e4, rng);
      const auto a = sample_jump_time(hybrid, reset, 1e4, rng);
      const auto b = sample_jump_time(hybrid, reset, 1e4, rng);
      if (!first || !a || !b) return false;
      second.push_back(*a);
      third.push_back(*b);
    }
    const auto ks = stats::ks_two_sample(second, third);
    out << fmt("D = %.4f, p = %.3g", ks.statistic, ks.p_value);
    return ks.passes(0.01);
  });
}

void smoother_checks(Suite& suite, std::uint64_t seed) {
  const fluor::FluorParams p{.omega = 1.0, .gamma = 1.0, .eta = 0.8};
  const ModelGenerators g = build(fluor::build_hybrid(p));
  const GridPropagator prop(g, 0.05);

  suite.check("effect path ends at identity with Hermitian blocks", [&](std::ostream& out) {
    Stream rng(seed + 11, 0);
    const Trajectory traj = sample_trajectory(g, g.initial, 20.0, rng);
    const EffectPath e = effect_backward(g, traj, 0.0, 20.0, 0.05);
    double herm = 0.0;
    for (const auto& h : e.effects) herm = std::max(herm, max_diff(h, hermitize(h)));
    const bool end_ok = max_diff(e.effects.back(), HybridOperator::identity(2, 2)) == 0.0;
    out << fmt("hermiticity error %.3g", herm);
    return end_ok && herm <= 1e-10;
  });
  suite.check("smoothed records are valid and consistent", [&](std::ostream& out) {
    double partial_err = 0.0;
    bool states = true;
    for (std::uint64_t i = 0; i < 5; ++i) {
      Stream rng(seed + 12, i);
      const FilteredPath path = simulate_trajectory(prop, g.initial, 40.0, rng);
      for (const auto& r : smooth_path(prop, path, 20.0)) {
        states = states && r.smoothed_state.is_state(1e-10, 1e-8, 1e-9);
        partial_err = std::max(partial_err, (r.quantum_partial - reduce_quantum(r.smoothed_state)).cwiseAbs().maxCoeff());
        const auto c = reduce_classical(r.smoothed_state);
        for (std::size_t k = 0; k < c.probs.size(); ++k) {
          partial_err = std::max(partial_err, std::abs(c.probs[k] - r.classical_partial.probs[k]));
          partial_err = std::max(partial_err, std::abs(c.probs[k] - r.classical_dist.probs[k]));
        }
      }
    }
    out << fmt("partial mismatch %.3g", partial_err);
    return states && partial_err <= 1e-10;
  });
  suite.check("zero lag reproduces filtering", [&](std::ostream& out) {
    Stream rng(seed + 13, 0);
    const FilteredPath path = simulate_trajectory(prop, g.initial, 20.0, rng);
    const auto records = smooth_path(prop, path, 0.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < records.size(); ++k) worst = std::max(worst, max_diff(records[k].smoothed_state, path.states[k]));
    out << fmt("max error %.3g", worst);
    return records.size() == path.states.size() && worst <= 1e-12;
  });
}

void ensemble_checks(Suite& suite, const ValidationOptions& opts) {
  suite.check("ensemble is independent of worker count", [&](std::ostream& out) {
    RunConfig cfg;
    cfg.t_total = 10.0;
    cfg.lag = 5.0;
    cfg.n_traj = 40;
    cfg.master_seed = opts.seed;
    cfg.workers = 1;
    std::ostringstream a;
    emit_csv(run_ensemble(cfg), a);
    cfg.workers = 3;
    std::ostringstream b;
    emit_csv(run_ensemble(cfg), b);
    std::ostringstream c;
    emit_csv(run_ensemble(cfg), c);
    out << "compared " << a.str().size() << " bytes";
    return a.str() == b.str() && b.str() == c.str();
  });
  if (!opts.full) return;

  RunConfig cfg;
  cfg.n_traj = 5000;
  cfg.master_seed = opts.seed;
  cfg.workers = opts.workers;
  cfg.batches = 100;
  const fluor::FluorParams p{.omega = cfg.omega_over_gamma, .gamma = 1.0, .eta = cfg.eta};
  const ModelGenerators g = build(fluor::build_hybrid(p));
  EnsembleStats st;
  std::vector<HybridOperator> exact;
  suite.check("ensemble run (5e3 trajectories)", [&](std::ostream& out) {
    st = run_ensemble(cfg);
    exact = master_solve(g, g.initial, st.t);
    out << st.rows() << " rows";
    return true;
  });
  if (st.rows() == 0) return;
  suite.check("filtered and smoothed ensembles close on master solution", [&](std::ostream& out) {
    double wf = 0.0;
    double ws = 0.0;
    for (std::size_t k = 0; k < st.rows(); ++k) {
      const double pop = reduce_quantum(exact[k])(0, 0).real();
      wf = std::max(wf, std::abs(st[Column::pop_f][k] - pop));
      if (k < st.smoothed_rows) ws = std::max(ws, std::abs(st[Column::pop_s][k] - pop));
    }
    out << fmt("filtered %.4f, smoothed %.4f", wf, ws);
    return wf <= 0.03 && ws <= 0.03;
  });
  suite.check("mean smoothed purity dominates filtered beyond transient", [&](std::ostream& out) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < st.smoothed_rows; ++k) {
      if (st.t[k] <= 5.0) continue;
      const double se = std::hypot(st.error(Column::purq_f)[k], st.error(Column::purq_s)[k]);
      worst = std::min(worst, (st[Column::purq_s][k] - st[Column::purq_f][k]) / se);
    }
    out << fmt("min (smoothed - filtered) / SE %.3f", worst);
    return worst >= -1.0;
  });
  suite.check("standard errors agree with batch means", [&](std::ostream& out) {
    double lo = 1e300;
    double hi = 0.0;
    for (std::size_t k = 0; k < st.rows(); ++k) {
      if (st.t[k] < 1.0) continue;
      const double ratio = st.batch_se_pop_f[k] / st.error(Column::pop_f)[k];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    out << fmt("batch/reported SE ratio in [%.3f, %.3f]", lo, hi);
    return lo >= 1.0 / 1.5 && hi <= 1.5;
  });
}

}  // namespace

std::vector<CheckResult> run_property_suite(const ValidationOptions& opts,
                                            const std::function<void(const CheckResult&)>& on_result) {
  Suite suite(on_result);
  algebra_checks(suite, opts.seed);
  generator_checks(suite, opts.seed);
  fluorescence_checks(suite);
  trajectory_checks(suite, opts.seed);
  smoother_checks(suite, opts.seed);
  ensemble_checks(suite, opts);
  return suite.take();
}

}  // namespace qcsmooth
