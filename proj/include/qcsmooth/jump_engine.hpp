#pragma once

// Monitored jump trajectories: survival-inversion sampling of detection times
// and the forward (filtered) hybrid state on a uniform grid.

#include <optional>
#include <vector>

#include "qcsmooth/generators.hpp"
#include "qcsmooth/random.hpp"

namespace qcsmooth {

struct Trajectory {
  double window_end = 0.0;
  /// Strictly increasing detection times in (0, window_end].
  std::vector<double> jump_times;

  void validate() const;
};

/// Cached e^{D dt} for a fixed grid step.
class GridPropagator {
 public:
  GridPropagator(const ModelGenerators& g, double dt);

  const ModelGenerators& generators() const { return *g_; }
  double dt() const { return dt_; }
  const HybridSuperop& step() const { return step_; }

  /// Unnormalized propagator over (t0, t0 + dt] with detections at `jumps`
  /// (sorted, inside the interval) applied at their exact times.
  HybridSuperop interval(double t0, std::span<const double> jumps) const;

 private:
  const ModelGenerators* g_;
  double dt_;
  HybridSuperop step_;
};

struct FilteredPath {
  double dt = 0.0;
  std::vector<double> times;
  /// Normalized filtered state at each grid time; the state at t_k already
  /// includes every detection in (t_{k-1}, t_k].
  std::vector<HybridOperator> states;
  Trajectory trajectory;
};

/// No-detection probability Tr[(1| e^{D tau} |rho)].
double survival(const ModelGenerators& g, const HybridOperator& rho, double tau);

/// Inverse-transform sample of the next detection delay, or nullopt when no
/// detection happens within t_max.
std::optional<double> sample_jump_time(const ModelGenerators& g, const HybridOperator& rho, double t_max,
                                       Stream& rng);

/// Filtered path for a given detection record.
FilteredPath filter_trajectory(const GridPropagator& prop, const HybridOperator& rho0, const Trajectory& traj);
FilteredPath filter_trajectory(const ModelGenerators& g, const HybridOperator& rho0, const Trajectory& traj,
                               double dt);

/// Samples a detection record on [0, t_total] and returns its filtered path.
FilteredPath simulate_trajectory(const GridPropagator& prop, const HybridOperator& rho0, double t_total,
                                 Stream& rng);
FilteredPath simulate_trajectory(const ModelGenerators& g, const HybridOperator& rho0, double t_total, double dt,
                                 Stream& rng);

/// Samples only the detection times.
Trajectory sample_trajectory(const ModelGenerators& g, const HybridOperator& rho0, double t_total, Stream& rng);

/// log Tr[(1| U[T, 0, record] |rho0)]; -infinity for records the model cannot produce.
double trajectory_log_weight(const ModelGenerators& g, const Trajectory& traj, const HybridOperator& rho0);

}  // namespace qcsmooth
