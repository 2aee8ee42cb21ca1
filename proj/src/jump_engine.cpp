#include "qcsmooth/jump_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qcsmooth/errors.hpp"

namespace qcsmooth {

void Trajectory::validate() const {
  if (!(window_end >= 0.0) || !std::isfinite(window_end)) throw ConfigError("trajectory window must be >= 0");
  double prev = 0.0;
  for (std::size_t i = 0; i < jump_times.size(); ++i) {
    const double t = jump_times[i];
    if (!(t > prev) || (i == 0 && !(t > 0.0))) {
      throw ConfigError("jump times must be strictly increasing and > 0");
    }
    if (t > window_end) throw ConfigError("jump time " + std::to_string(t) + " beyond window end");
    prev = t;
  }
}

GridPropagator::GridPropagator(const ModelGenerators& g, double dt) : g_(&g), dt_(dt), step_(expm(g.D, dt)) {
  if (!(dt > 0.0)) throw ConfigError("grid step must be > 0");
}

HybridSuperop GridPropagator::interval(double t0, std::span<const double> jumps) const {
  if (jumps.empty()) return step_;
  HybridSuperop acc = HybridSuperop::identity(g_->n_classical, g_->dim);
  double cur = t0;
  for (double tau : jumps) {
    acc = g_->J * (expm(g_->D, std::max(0.0, tau - cur)) * acc);
    cur = tau;
  }
  return expm(g_->D, std::max(0.0, t0 + dt_ - cur)) * acc;
}

double survival(const ModelGenerators& g, const HybridOperator& rho, double tau) {
  if (tau <= 0.0) return 1.0;
  return apply(expm(g.D, tau), rho).total_trace().real();
}

std::optional<double> sample_jump_time(const ModelGenerators& g, const HybridOperator& rho, double t_max,
                                       Stream& rng) {
  if (!(t_max > 0.0)) return std::nullopt;
  const double u = rng.uniform();

  double rate = 0.0;
  for (Eigen::Index i = 0; i < g.D.matrix().rows(); ++i) rate = std::max(rate, std::abs(g.D.matrix()(i, i).real()));
  double hi = rate > 0.0 ? std::min(t_max, 1.0 / rate) : t_max;
  double lo = 0.0;

  // Grow the bracket until the survival drops to u.
  while (survival(g, rho, hi) > u) {
    if (hi >= t_max) return std::nullopt;
    lo = hi;
    hi = std::min(2.0 * hi, t_max);
  }
  const double tol = 1e-10 * t_max;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (survival(g, rho, mid) > u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Trajectory sample_trajectory(const ModelGenerators& g, const HybridOperator& rho0, double t_total, Stream& rng) {
  Trajectory traj{.window_end = t_total, .jump_times = {}};
  HybridOperator rho = rho0;
  double now = 0.0;
  while (now < t_total) {
    const auto delay = sample_jump_time(g, rho, t_total - now, rng);
    if (!delay) break;
    const double t = std::min(now + *delay, t_total);
    if (!(t > now)) break;
    rho = measurement_map(g, conditional_propagate(g, rho, t - now));
    traj.jump_times.push_back(t);
    now = t;
  }
  return traj;
}

FilteredPath filter_trajectory(const GridPropagator& prop, const HybridOperator& rho0, const Trajectory& traj) {
  traj.validate();
  const ModelGenerators& g = prop.generators();
  const double dt = prop.dt();
  const int n = grid_steps(traj.window_end, dt);

  FilteredPath path;
  path.dt = dt;
  path.trajectory = traj;
  path.times.reserve(static_cast<std::size_t>(n) + 1);
  path.states.reserve(static_cast<std::size_t>(n) + 1);
  path.times.push_back(0.0);
  path.states.push_back(rho0);

  HybridOperator rho = rho0;
  std::size_t next = 0;
  const auto& jumps = traj.jump_times;
  for (int k = 0; k < n; ++k) {
    const double t0 = k * dt;
    const double t1 = (k + 1 == n) ? std::max(traj.window_end, t0 + dt) : (k + 1) * dt;
    if (next >= jumps.size() || jumps[next] > t1) {
      rho = conditional_propagate(prop.step(), rho);
    } else {
      double cur = t0;
      while (next < jumps.size() && jumps[next] <= t1) {
        rho = measurement_map(g, conditional_propagate(g, rho, jumps[next] - cur));
        cur = jumps[next];
        ++next;
      }
      rho = conditional_propagate(g, rho, std::max(0.0, t0 + dt - cur));
    }
    path.times.push_back((k + 1) * dt);
    path.states.push_back(rho);
  }
  return path;
}

FilteredPath filter_trajectory(const ModelGenerators& g, const HybridOperator& rho0, const Trajectory& traj,
                               double dt) {
  return filter_trajectory(GridPropagator(g, dt), rho0, traj);
}

FilteredPath simulate_trajectory(const GridPropagator& prop, const HybridOperator& rho0, double t_total,
                                 Stream& rng) {
  grid_steps(t_total, prop.dt());
  return filter_trajectory(prop, rho0, sample_trajectory(prop.generators(), rho0, t_total, rng));
}

FilteredPath simulate_trajectory(const ModelGenerators& g, const HybridOperator& rho0, double t_total, double dt,
                                 Stream& rng) {
  return simulate_trajectory(GridPropagator(g, dt), rho0, t_total, rng);
}

double trajectory_log_weight(const ModelGenerators& g, const Trajectory& traj, const HybridOperator& rho0) {
  traj.validate();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  HybridOperator v = rho0;
  double log_weight = 0.0;
  double cur = 0.0;
  for (double t : traj.jump_times) {
    v = apply(g.J, apply(expm(g.D, t - cur), v));
    const double s = v.total_trace().real();
    if (!(s > 0.0)) return kNegInf;
    log_weight += std::log(s);
    v *= 1.0 / s;
    cur = t;
  }
  const double tail = apply(expm(g.D, traj.window_end - cur), v).total_trace().real();
  if (!(tail > 0.0)) return kNegInf;
  return log_weight + std::log(tail);
}

}  // namespace qcsmooth
