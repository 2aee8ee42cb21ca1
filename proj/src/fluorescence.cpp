#include "qcsmooth/fluorescence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>

#include "qcsmooth/errors.hpp"

namespace qcsmooth::fluor {

namespace {

using cplx = std::complex<double>;

// Denominator of w_eta(u) as 2 u^3 + 3 gamma u^2 + (gamma^2 + 2 Omega^2) u + gamma eta Omega^2.
struct Cubic {
  double c3, c2, c1, c0;

  cplx operator()(cplx s) const { return ((c3 * s + c2) * s + c1) * s + c0; }
  cplx derivative(cplx s) const { return (3.0 * c3 * s + 2.0 * c2) * s + c1; }
  double scale(cplx s) const {
    const double a = std::abs(s);
    return std::abs(c3) * a * a * a + std::abs(c2) * a * a + std::abs(c1) * a + std::abs(c0);
  }
};

Cubic denominator(const FluorParams& p) {
  const double g = p.gamma;
  const double w2 = p.omega * p.omega;
  return {2.0, 3.0 * g, g * g + 2.0 * w2, g * p.eta * w2};
}

std::array<cplx, 3> companion_roots(const Cubic& q) {
  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  companion(0, 0) = -q.c2 / q.c3;
  companion(0, 1) = -q.c1 / q.c3;
  companion(0, 2) = -q.c0 / q.c3;
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  Eigen::EigenSolver<Eigen::Matrix3d> es(companion, false);
  std::array<cplx, 3> roots{};
  for (int i = 0; i < 3; ++i) {
    cplx s = es.eigenvalues()(i);
    for (int it = 0; it < 4; ++it) {
      const cplx dq = q.derivative(s);
      if (std::abs(dq) < 1e-8 * q.scale(s)) break;
      const cplx step = q(s) / dq;
      s -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(s))) break;
    }
    roots[i] = s;
  }
  return roots;
}

// e^{s t} t^k / k! integrated over [0, t].
cplx integrated_term(cplx s, int k, double t) {
  const cplx est = std::exp(s * t);
  cplx acc = (est - 1.0) / s;
  double tk = 1.0;
  for (int j = 1; j <= k; ++j) {
    tk *= t / j;
    acc = (tk * est - acc) / s;
  }
  return acc;
}

}  // namespace

void FluorParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidModel("fluorescence needs gamma > 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidModel("detector efficiency must satisfy 0 < eta <= 1");
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw InvalidModel("Rabi frequency must be >= 0");
}

CMatrix sigma_minus() {
  CMatrix s = CMatrix::Zero(2, 2);
  s(1, 0) = 1.0;
  return s;
}

CMatrix sigma_x() {
  CMatrix s = CMatrix::Zero(2, 2);
  s(0, 1) = 1.0;
  s(1, 0) = 1.0;
  return s;
}

CMatrix ground_state() {
  CMatrix g = CMatrix::Zero(2, 2);
  g(1, 1) = 1.0;
  return g;
}

ModelSpec build_plain(const FluorParams& p) {
  p.validate();
  ModelSpec spec;
  spec.n_classical = 1;
  spec.dim = 2;
  spec.labels = {"s"};
  spec.hamiltonians = {0.5 * p.omega * sigma_x()};
  spec.jumps.push_back({.source = 0, .target = 0, .op = sigma_minus(), .rate = p.gamma * p.eta, .observed = true});
  spec.jumps.push_back(
      {.source = 0, .target = 0, .op = sigma_minus(), .rate = p.gamma * (1.0 - p.eta), .observed = false});
  const double one[] = {1.0};
  spec.initial = HybridOperator::separable(ground_state(), one);
  return spec;
}

ModelSpec build_hybrid(const FluorParams& p) {
  p.validate();
  constexpr int d = 0;
  constexpr int u = 1;
  const double gamma_d = p.gamma * p.eta;
  const double gamma_u = p.gamma * (1.0 - p.eta);
  const CMatrix h = 0.5 * p.omega * sigma_x();

  ModelSpec spec;
  spec.n_classical = 2;
  spec.dim = 2;
  spec.labels = {"d", "u"};
  spec.hamiltonians = {h, h};
  // Detected emissions land in d, missed ones in u, whatever the prior label.
  spec.jumps.push_back({.source = d, .target = d, .op = sigma_minus(), .rate = gamma_d, .observed = true});
  spec.jumps.push_back({.source = u, .target = d, .op = sigma_minus(), .rate = gamma_d, .observed = true});
  spec.jumps.push_back({.source = d, .target = u, .op = sigma_minus(), .rate = gamma_u, .observed = false});
  spec.jumps.push_back({.source = u, .target = u, .op = sigma_minus(), .rate = gamma_u, .observed = false});
  const double start[] = {1.0, 0.0};
  spec.initial = HybridOperator::separable(ground_state(), start);
  return spec;
}

CMatrix steady_state(const FluorParams& p) {
  const double g = p.gamma;
  const double w = p.omega;
  const double norm = g * g + 2.0 * w * w;
  CMatrix rho(2, 2);
  rho(0, 0) = w * w / norm;
  rho(0, 1) = cplx(0.0, -g * w / norm);
  rho(1, 0) = cplx(0.0, g * w / norm);
  rho(1, 1) = (g * g + w * w) / norm;
  return rho;
}

double steady_upper_population(const FluorParams& p) {
  return p.omega * p.omega / (p.gamma * p.gamma + 2.0 * p.omega * p.omega);
}

cplx waiting_laplace(const FluorParams& p, cplx u) {
  const double g = p.gamma;
  const double w2 = p.omega * p.omega;
  return g * p.eta * w2 / (u * (u + g) * (2.0 * u + g) + (2.0 * u + g * p.eta) * w2);
}

double mean_waiting_time(const FluorParams& p) {
  const double w2 = p.omega * p.omega;
  return (p.gamma * p.gamma + 2.0 * w2) / (p.gamma * p.eta * w2);
}

WaitingTimeLaw::WaitingTimeLaw(const FluorParams& p) : params_(p) {
  p.validate();
  const Cubic q = denominator(p);
  const double numerator = q.c0;
  if (numerator == 0.0) {
    // Omega = 0: the emitter never leaves the ground state.
    null_ = true;
    return;
  }
  roots_ = companion_roots(q);

  // Exactly repeated roots are split by the eigen solver at the sqrt(eps)
  // level, so degeneracy is also detected at the critical points of Q.
  const double disc = 4.0 * q.c2 * q.c2 - 12.0 * q.c3 * q.c1;
  const double crit_scale = 4.0 * q.c2 * q.c2;
  bool triple = false;
  std::optional<cplx> double_root;
  if (std::abs(disc) <= 1e-12 * crit_scale) {
    const cplx c = -q.c2 / (3.0 * q.c3);
    if (std::abs(q(c)) <= 1e-12 * q.scale(c)) triple = true;
  }
  if (!triple && disc >= 0.0) {
    const double sq = std::sqrt(disc);
    for (double sign : {-1.0, 1.0}) {
      const cplx c = (-2.0 * q.c2 + sign * sq) / (6.0 * q.c3);
      if (std::abs(q(c)) <= 1e-14 * q.scale(c)) double_root = c;
    }
  }
  if (!triple && !double_root) {
    for (int i = 0; i < 3 && !double_root; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        const double rel = std::abs(roots_[i] - roots_[j]) /
                           std::max(std::abs(roots_[i]), std::abs(roots_[j]));
        if (rel <= 1e-8) {
          double_root = 0.5 * (roots_[i] + roots_[j]);
          break;
        }
      }
    }
  }

  const double lead = q.c3;
  if (triple) {
    degenerate_ = true;
    const cplx s = -q.c2 / (3.0 * q.c3);
    roots_ = {s, s, s};
    Pole pole{.s = s, .multiplicity = 3};
    pole.coeff[2] = numerator / lead;
    poles_.push_back(pole);
  } else if (double_root) {
    degenerate_ = true;
    const cplx a = *double_root;
    const cplx b = -q.c2 / q.c3 - 2.0 * a;
    roots_ = {a, a, b};
    // N / (c3 (s-a)^2 (s-b))
    Pole pa{.s = a, .multiplicity = 2};
    pa.coeff[1] = numerator / (lead * (a - b));
    pa.coeff[0] = -numerator / (lead * (a - b) * (a - b));
    Pole pb{.s = b, .multiplicity = 1};
    pb.coeff[0] = numerator / (lead * (b - a) * (b - a));
    poles_ = {pa, pb};
  } else {
    for (const cplx& s : roots_) {
      Pole pole{.s = s, .multiplicity = 1};
      pole.coeff[0] = numerator / q.derivative(s);
      poles_.push_back(pole);
    }
  }
}

double WaitingTimeLaw::density(double t) const {
  if (null_ || t < 0.0) return 0.0;
  cplx acc = 0.0;
  for (const auto& pole : poles_) {
    const cplx est = std::exp(pole.s * t);
    double tk = 1.0;
    for (int k = 0; k < pole.multiplicity; ++k) {
      if (k > 0) tk *= t / k;
      acc += pole.coeff[k] * tk * est;
    }
  }
  return acc.real();
}

double WaitingTimeLaw::cdf(double t) const {
  if (null_ || t <= 0.0) return 0.0;
  cplx acc = 0.0;
  for (const auto& pole : poles_) {
    for (int k = 0; k < pole.multiplicity; ++k) acc += pole.coeff[k] * integrated_term(pole.s, k, t);
  }
  return std::clamp(acc.real(), 0.0, 1.0);
}

double WaitingTimeLaw::quantile(double q) const {
  if (null_ || q >= 1.0) return std::numeric_limits<double>::infinity();
  if (q <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0 / params_.gamma;
  while (cdf(hi) < q) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12 / params_.gamma) return hi;
  }
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double waiting_density(const FluorParams& p, double t) { return WaitingTimeLaw(p).density(t); }

ThinningSampler::ThinningSampler(const FluorParams& p)
    : eta_(p.eta), perfect_(FluorParams{.omega = p.omega, .gamma = p.gamma, .eta = 1.0}) {
  p.validate();
}

double ThinningSampler::operator()(Stream& rng) const {
  double t = 0.0;
  for (;;) {
    t += perfect_.quantile(rng.uniform());
    if (rng.uniform() < eta_) return t;
  }
}

double thinning_sampler(const FluorParams& p, Stream& rng) { return ThinningSampler(p)(rng); }

}  // namespace qcsmooth::fluor
