#pragma once

// Hybrid Lindblad rate generators and the deterministic / conditional
// propagation built on them.

#include <optional>
#include <string>
#include <vector>

#include "qcsmooth/hybrid.hpp"

namespace qcsmooth {

struct ClassicalDist {
  std::vector<double> probs;

  double purity() const;
};

/// Transition R' -> R through Lindblad operator A at rate r:
///   gain  r A rho_{R'} A^dagger  into block R,
///   loss -r {A^dagger A, rho_{R'}}_+ on block R', with {p,q}_+ = (pq + qp)/2.
/// Observed terms contribute their gain part to the jump superoperator J.
struct JumpTerm {
  int source = 0;
  int target = 0;
  CMatrix op;
  double rate = 0.0;
  bool observed = false;
};

/// Raw generator pair for models that are not of Hamiltonian + jump-list form.
struct RawGenerators {
  CMatrix L;
  CMatrix J;
};

struct ModelSpec {
  int n_classical = 1;
  int dim = 2;
  /// Classical labels in block order. Defaults to "0", "1", ... when empty.
  std::vector<std::string> labels;
  /// One Hamiltonian per classical state; missing entries are zero.
  std::vector<CMatrix> hamiltonians;
  std::vector<JumpTerm> jumps;
  std::optional<HybridOperator> initial;
  std::optional<RawGenerators> raw;

  /// Throws InvalidModel on negative rates, labels out of range or bad shapes.
  /// With require_observed, at least one observed channel must exist.
  void validate(bool require_observed = false) const;
  bool has_observed_channel() const;
};

struct ModelGenerators {
  HybridSuperop L;
  HybridSuperop D;
  HybridSuperop J;
  int n_classical = 1;
  int dim = 1;
  std::vector<std::string> labels;
  /// Initial hybrid state; defaults to I/d in the first classical block.
  HybridOperator initial;
};

ModelGenerators build(const ModelSpec& spec);

/// J rho normalized to unit total trace. Throws NullJump when Tr[(1|J|rho)] vanishes.
HybridOperator measurement_map(const ModelGenerators& g, const HybridOperator& rho);

/// e^{D dt} rho renormalized. Throws Extinct when the survival falls below 1e-14.
HybridOperator conditional_propagate(const ModelGenerators& g, const HybridOperator& rho, double dt);

/// Same as above with a precomputed propagator e^{D dt}.
HybridOperator conditional_propagate(const HybridSuperop& expD, const HybridOperator& rho);

/// rho_t = e^{L t} rho0 at every requested time (times must be non-decreasing, >= 0).
std::vector<HybridOperator> master_solve(const ModelGenerators& g, const HybridOperator& rho0,
                                         const std::vector<double>& times);

CMatrix reduce_quantum(const HybridOperator& rho);
ClassicalDist reduce_classical(const HybridOperator& rho);

/// Uniform grid 0, dt, ..., n dt = t_total. Throws ConfigError unless dt divides t_total.
std::vector<double> uniform_grid(double t_total, double dt);
int grid_steps(double t_total, double dt);

inline constexpr double kExtinctionFloor = 1e-14;

}  // namespace qcsmooth
