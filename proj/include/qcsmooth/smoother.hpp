#pragma once

// Backward effect propagation and Bayesian combination with the filtered
// state into smoothed classical weights and smoothed hybrid states.

#include <vector>

#include "qcsmooth/generators.hpp"
#include "qcsmooth/jump_engine.hpp"

namespace qcsmooth {

/// Effect operators on the grid t_start, t_start + dt, ..., T. Each stored
/// effect is rescaled to unit max-magnitude entry; the true effect is
/// effects[k] * exp(log_scale[k]). The last entry is |I) with log_scale 0.
struct EffectPath {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<HybridOperator> effects;
  std::vector<double> log_scale;
};

/// Propagates |I) backward from T to t_start with the dual generators,
/// applying dual(J) at every detection in (t_start, T].
EffectPath effect_backward(const ModelGenerators& g, const Trajectory& traj, double t_start, double t_end,
                           double dt);

/// P[R] proportional to Tr[(rho_f|R)(R|E)]. Throws InfeasibleFuture when every weight vanishes.
ClassicalDist smoothed_classical(const HybridOperator& filtered, const HybridOperator& effect);

/// sum_R P[R] (R|rho_f) / Tr[(R|rho_f)] |R).
HybridOperator smoothed_state(const HybridOperator& filtered, const ClassicalDist& weights);

struct SmoothedRecord {
  double t = 0.0;
  ClassicalDist classical_dist;
  HybridOperator smoothed_state;
  CMatrix quantum_partial;
  ClassicalDist classical_partial;
  double quantum_purity = 0.0;
  double classical_purity = 0.0;
};

SmoothedRecord make_smoothed_record(double t, const HybridOperator& filtered, const HybridOperator& effect);

/// Fixed-lag effects: entry k is the effect at grid time t_k for the record
/// window (t_k, t_k + lag], up to a positive scale, for every t_k + lag <= T.
std::vector<HybridOperator> fixed_lag_effects(const GridPropagator& prop, const FilteredPath& path, double lag);

/// Smoothed record at every grid time t with t + lag <= T.
std::vector<SmoothedRecord> smooth_path(const GridPropagator& prop, const FilteredPath& path, double lag);
std::vector<SmoothedRecord> smooth_path(const ModelGenerators& g, const FilteredPath& path, double lag);

}  // namespace qcsmooth
