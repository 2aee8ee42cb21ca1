#include "qcsmooth/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcsmooth/errors.hpp"

namespace qcsmooth {

namespace {

constexpr double kVanishingBlock = 1e-14;
constexpr double kVanishingWeight = 1e-12;

double rescale(CMatrix& m) {
  const double s = m.cwiseAbs().maxCoeff();
  if (s > 0.0 && std::isfinite(s)) m /= s;
  return s;
}

HybridOperator transpose_blocks(HybridOperator h) {
  for (int r = 0; r < h.n_classical(); ++r) {
    CMatrix t = h.block(r).transpose();
    h.block(r) = std::move(t);
  }
  return h;
}

}  // namespace

EffectPath effect_backward(const ModelGenerators& g, const Trajectory& traj, double t_start, double t_end,
                           double dt) {
  const int m = grid_steps(t_end - t_start, dt);
  const HybridSuperop dual_d = dual(g.D);
  const HybridSuperop dual_j = dual(g.J);
  const HybridSuperop dual_step = expm(dual_d, dt);

  std::vector<double> jumps;
  for (double t : traj.jump_times) {
    if (t > t_start && t <= t_end) jumps.push_back(t);
  }

  EffectPath path;
  path.dt = dt;
  path.times.resize(static_cast<std::size_t>(m) + 1);
  path.effects.resize(static_cast<std::size_t>(m) + 1);
  path.log_scale.resize(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) path.times[k] = t_start + k * dt;
  path.times[m] = t_end;

  HybridOperator effect = HybridOperator::identity(g.n_classical, g.dim);
  double log_scale = 0.0;
  path.effects[m] = effect;
  path.log_scale[m] = 0.0;

  auto next = jumps.rbegin();
  for (int k = m - 1; k >= 0; --k) {
    const double t0 = path.times[k];
    double cur = path.times[k + 1];
    if (next == jumps.rend() || *next <= t0) {
      effect = apply(dual_step, effect);
    } else {
      while (next != jumps.rend() && *next > t0) {
        effect = apply(dual_j, apply(expm(dual_d, std::max(0.0, cur - *next)), effect));
        cur = *next;
        ++next;
      }
      effect = apply(expm(dual_d, std::max(0.0, cur - t0)), effect);
    }
    effect = hermitize(effect);
    const double s = effect.max_abs();
    if (s > 0.0 && std::isfinite(s)) {
      effect *= 1.0 / s;
      log_scale += std::log(s);
    }
    path.effects[k] = effect;
    path.log_scale[k] = log_scale;
  }
  return path;
}

ClassicalDist smoothed_classical(const HybridOperator& filtered, const HybridOperator& effect) {
  require_same_space(filtered, effect);
  ClassicalDist out;
  out.probs.resize(static_cast<std::size_t>(filtered.n_classical()));
  double total = 0.0;
  for (int r = 0; r < filtered.n_classical(); ++r) {
    const double w = filtered.block(r).cwiseProduct(effect.block(r).transpose()).sum().real();
    out.probs[r] = std::max(0.0, w);
    total += out.probs[r];
  }
  if (!(total > 1e-300) || !std::isfinite(total)) {
    throw InfeasibleFuture("smoothed classical weights vanish for every label");
  }
  for (double& p : out.probs) p /= total;
  return out;
}

HybridOperator smoothed_state(const HybridOperator& filtered, const ClassicalDist& weights) {
  if (static_cast<int>(weights.probs.size()) != filtered.n_classical()) {
    throw DimensionMismatch("classical weights do not match the number of blocks");
  }
  HybridOperator out(filtered.n_classical(), filtered.dim());
  for (int r = 0; r < filtered.n_classical(); ++r) {
    const double tr = filtered.block(r).trace().real();
    const double p = weights.probs[r];
    if (tr < kVanishingBlock) {
      if (p >= kVanishingWeight) {
        throw InconsistentWeight("weight " + std::to_string(p) + " on label " + std::to_string(r) +
                                 " whose filtered block vanishes");
      }
      continue;
    }
    out.block(r) = (p / tr) * filtered.block(r);
  }
  return hermitize(out);
}

SmoothedRecord make_smoothed_record(double t, const HybridOperator& filtered, const HybridOperator& effect) {
  SmoothedRecord rec;
  rec.t = t;
  rec.classical_dist = smoothed_classical(filtered, effect);
  rec.smoothed_state = smoothed_state(filtered, rec.classical_dist);
  rec.quantum_partial = reduce_quantum(rec.smoothed_state);
  rec.classical_partial = reduce_classical(rec.smoothed_state);
  rec.quantum_purity = purity(rec.quantum_partial);
  rec.classical_purity = rec.classical_partial.purity();
  return rec;
}

std::vector<HybridOperator> fixed_lag_effects(const GridPropagator& prop, const FilteredPath& path, double lag) {
  const ModelGenerators& g = prop.generators();
  const int n = static_cast<int>(path.states.size()) - 1;
  const int m = grid_steps(lag, path.dt);
  if (n < 0 || m > n) return {};
  const int count = n - m + 1;
  const HybridOperator unit = HybridOperator::identity(g.n_classical, g.dim);
  std::vector<HybridOperator> out;
  out.reserve(static_cast<std::size_t>(count));
  if (m == 0) {
    out.assign(static_cast<std::size_t>(count), unit);
    return out;
  }

  // Per-interval propagators Phi_k over (t_k, t_{k+1}].
  std::vector<CMatrix> phi(static_cast<std::size_t>(n));
  const auto& jumps = path.trajectory.jump_times;
  std::size_t next = 0;
  for (int k = 0; k < n; ++k) {
    const double t0 = path.times[k];
    const double t1 = (k + 1 == n) ? std::max(path.times[k + 1], path.trajectory.window_end) : path.times[k + 1];
    const std::size_t first = next;
    while (next < jumps.size() && jumps[next] <= t1) ++next;
    phi[k] = prop.interval(t0, std::span<const double>(jumps.data() + first, next - first)).matrix();
  }

  // The window product Phi_{k+m-1} ... Phi_k splits at the block boundary
  // b = (j+1) m into a prefix Q = Phi_{k+m-1} ... Phi_b and a suffix
  // S_k = Phi_{b-1} ... Phi_k. Only the row vec(I)^T Q S_k is needed.
  const Eigen::RowVectorXcd unit_row = vectorize(unit).transpose();
  const int size = static_cast<int>(unit_row.size());
  std::vector<CMatrix> suffix(static_cast<std::size_t>(m));
  for (int j = 0; j * m <= n - m; ++j) {
    const int lo = j * m;
    const int b = lo + m;
    const int hi = std::min(b - 1, n - m);

    suffix[m - 1] = phi[b - 1];
    rescale(suffix[m - 1]);
    for (int k = b - 2; k >= lo; --k) {
      suffix[k - lo] = suffix[k - lo + 1] * phi[k];
      rescale(suffix[k - lo]);
    }

    CMatrix prefix = CMatrix::Identity(size, size);
    for (int k = lo; k <= hi; ++k) {
      if (k > lo) {
        prefix = phi[k + m - 1] * prefix;
        rescale(prefix);
      }
      Eigen::RowVectorXcd row = (unit_row * prefix) * suffix[k - lo];
      const double s = row.cwiseAbs().maxCoeff();
      if (s > 0.0 && std::isfinite(s)) row /= s;
      CVector col = row.transpose();
      out.push_back(hermitize(transpose_blocks(devectorize(col, g.n_classical, g.dim))));
    }
  }
  return out;
}

std::vector<SmoothedRecord> smooth_path(const GridPropagator& prop, const FilteredPath& path, double lag) {
  if (!(lag >= 0.0)) throw ConfigError("smoothing lag must be >= 0");
  const auto effects = fixed_lag_effects(prop, path, lag);
  std::vector<SmoothedRecord> out;
  out.reserve(effects.size());
  for (std::size_t k = 0; k < effects.size(); ++k) {
    out.push_back(make_smoothed_record(path.times[k], path.states[k], effects[k]));
  }
  return out;
}

std::vector<SmoothedRecord> smooth_path(const ModelGenerators& g, const FilteredPath& path, double lag) {
  return smooth_path(GridPropagator(g, path.dt), path, lag);
}

}  // namespace qcsmooth
