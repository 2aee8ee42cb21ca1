#include "qcsmooth/generators.hpp"

#include <cmath>
#include <string>

#include "qcsmooth/errors.hpp"

namespace qcsmooth {

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Column stacking: vec(A X B) = (B^T kron A) vec(X).
CMatrix left_mul(const CMatrix& a) {
  return kron(CMatrix::Identity(a.rows(), a.cols()), a);
}

CMatrix right_mul(const CMatrix& b) {
  return kron(b.transpose(), CMatrix::Identity(b.rows(), b.cols()));
}

CMatrix sandwich(const CMatrix& a) {
  // vec(A X A^dagger) = (conj(A) kron A) vec(X)
  return kron(a.conjugate(), a);
}

}  // namespace

double ClassicalDist::purity() const {
  double s = 0.0;
  for (double p : probs) s += p * p;
  return s;
}

bool ModelSpec::has_observed_channel() const {
  if (raw) return raw->J.cwiseAbs().maxCoeff() > 0.0;
  for (const auto& j : jumps) {
    if (j.observed && j.rate > 0.0) return true;
  }
  return false;
}

void ModelSpec::validate(bool require_observed) const {
  if (n_classical < 1 || dim < 1) throw InvalidModel("model needs n_classical >= 1 and dim >= 1");
  if (!labels.empty() && static_cast<int>(labels.size()) != n_classical) {
    throw InvalidModel("expected " + std::to_string(n_classical) + " classical labels, got " +
                       std::to_string(labels.size()));
  }
  if (static_cast<int>(hamiltonians.size()) > n_classical) {
    throw InvalidModel("more Hamiltonian blocks than classical states");
  }
  for (const auto& h : hamiltonians) {
    if (h.size() != 0 && (h.rows() != dim || h.cols() != dim)) {
      throw InvalidModel("Hamiltonian block must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    if (h.size() != 0 && (h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
      throw InvalidModel("Hamiltonian block is not Hermitian");
    }
  }
  for (const auto& j : jumps) {
    if (!(j.rate >= 0.0) || !std::isfinite(j.rate)) {
      throw InvalidModel("jump rate must be finite and >= 0, got " + std::to_string(j.rate));
    }
    if (j.source < 0 || j.source >= n_classical || j.target < 0 || j.target >= n_classical) {
      throw InvalidModel("jump label out of range: " + std::to_string(j.source) + " -> " +
                         std::to_string(j.target));
    }
    if (j.op.rows() != dim || j.op.cols() != dim) {
      throw InvalidModel("jump operator must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
  }
  if (raw) {
    const int n = n_classical * dim * dim;
    if (raw->L.rows() != n || raw->L.cols() != n || raw->J.rows() != n || raw->J.cols() != n) {
      throw InvalidModel("raw generators must be " + std::to_string(n) + "x" + std::to_string(n));
    }
  }
  if (initial && (initial->n_classical() != n_classical || initial->dim() != dim)) {
    throw InvalidModel("initial state does not match the model dimensions");
  }
  if (require_observed && !has_observed_channel()) {
    throw InvalidModel("monitoring requires at least one observed jump channel");
  }
}

ModelGenerators build(const ModelSpec& spec) {
  spec.validate();
  const int nc = spec.n_classical;
  const int d = spec.dim;
  const int d2 = d * d;
  const int n = nc * d2;

  CMatrix L = CMatrix::Zero(n, n);
  CMatrix J = CMatrix::Zero(n, n);

  if (spec.raw) {
    L = spec.raw->L;
    J = spec.raw->J;
  } else {
    const Complex i_unit(0.0, 1.0);
    for (int r = 0; r < static_cast<int>(spec.hamiltonians.size()); ++r) {
      const CMatrix& h = spec.hamiltonians[r];
      if (h.size() == 0) continue;
      L.block(r * d2, r * d2, d2, d2) += -i_unit * (left_mul(h) - right_mul(h));
    }
    for (const auto& term : spec.jumps) {
      if (term.rate == 0.0) continue;
      const CMatrix gain = term.rate * sandwich(term.op);
      const CMatrix ada = term.op.adjoint() * term.op;
      const CMatrix loss = -0.5 * term.rate * (left_mul(ada) + right_mul(ada));
      L.block(term.target * d2, term.source * d2, d2, d2) += gain;
      L.block(term.source * d2, term.source * d2, d2, d2) += loss;
      if (term.observed) J.block(term.target * d2, term.source * d2, d2, d2) += gain;
    }
  }

  ModelGenerators g{
      .L = HybridSuperop(nc, d, L),
      .D = HybridSuperop(nc, d, L - J),
      .J = HybridSuperop(nc, d, J),
      .n_classical = nc,
      .dim = d,
      .labels = spec.labels,
      .initial = HybridOperator(nc, d),
  };
  if (g.labels.empty()) {
    for (int r = 0; r < nc; ++r) g.labels.push_back(std::to_string(r));
  }
  if (spec.initial) {
    g.initial = *spec.initial;
  } else {
    g.initial.block(0) = CMatrix::Identity(d, d) / static_cast<double>(d);
  }
  return g;
}

HybridOperator measurement_map(const ModelGenerators& g, const HybridOperator& rho) {
  HybridOperator jumped = apply(g.J, rho);
  const double norm = jumped.total_trace().real();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw NullJump("state cannot emit: Tr[(1|J|rho)] = " + std::to_string(norm));
  }
  jumped *= 1.0 / norm;
  return hermitize(jumped);
}

HybridOperator conditional_propagate(const HybridSuperop& expD, const HybridOperator& rho) {
  HybridOperator out = apply(expD, rho);
  const double survival = out.total_trace().real();
  if (!(survival >= kExtinctionFloor)) {
    throw Extinct("survival probability " + std::to_string(survival) + " below renormalization floor");
  }
  out *= 1.0 / survival;
  return hermitize(out);
}

HybridOperator conditional_propagate(const ModelGenerators& g, const HybridOperator& rho, double dt) {
  if (dt == 0.0) return rho;
  return conditional_propagate(expm(g.D, dt), rho);
}

std::vector<HybridOperator> master_solve(const ModelGenerators& g, const HybridOperator& rho0,
                                         const std::vector<double>& times) {
  std::vector<HybridOperator> out;
  out.reserve(times.size());
  HybridOperator current = rho0;
  double t_prev = 0.0;
  double cached_step = -1.0;
  HybridSuperop step;
  for (double t : times) {
    if (t < t_prev) throw ConfigError("master_solve needs non-decreasing times >= 0");
    const double delta = t - t_prev;
    if (delta > 0.0) {
      if (delta != cached_step) {
        step = expm(g.L, delta);
        cached_step = delta;
      }
      current = apply(step, current);
    }
    out.push_back(current);
    t_prev = t;
  }
  return out;
}

CMatrix reduce_quantum(const HybridOperator& rho) {
  CMatrix sum = CMatrix::Zero(rho.dim(), rho.dim());
  for (const auto& b : rho.blocks()) sum += b;
  return sum;
}

ClassicalDist reduce_classical(const HybridOperator& rho) {
  ClassicalDist p;
  p.probs.reserve(static_cast<std::size_t>(rho.n_classical()));
  for (const auto& b : rho.blocks()) p.probs.push_back(b.trace().real());
  return p;
}

int grid_steps(double t_total, double dt) {
  if (!(dt > 0.0) || !(t_total >= 0.0) || !std::isfinite(t_total)) {
    throw ConfigError("grid needs dt > 0 and t_total >= 0");
  }
  const double ratio = t_total / dt;
  const long long n = std::llround(ratio);
  if (std::abs(static_cast<double>(n) * dt - t_total) > 1e-9 * std::max(1.0, t_total)) {
    throw ConfigError("dt = " + std::to_string(dt) + " does not divide " + std::to_string(t_total));
  }
  return static_cast<int>(n);
}

std::vector<double> uniform_grid(double t_total, double dt) {
  const int n = grid_steps(t_total, dt);
  std::vector<double> grid(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) grid[k] = k * dt;
  grid[n] = t_total;
  return grid;
}

}  // namespace qcsmooth
