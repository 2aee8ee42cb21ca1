#pragma once

// Resonance fluorescence of a driven two-level emitter watched by a detector
// of efficiency eta, in two equivalent representations:
//   plain  - single classical state, observed channel gamma*eta sigma rho sigma^dagger;
//   hybrid - fictitious detector labels (d, u) carrying detected / missed emissions.
//
// Basis convention: index 0 is the upper level |+>, index 1 the ground |->.
// sigma = |-><+|, H = (Omega/2) sigma_x.

#include <array>
#include <complex>

#include "qcsmooth/generators.hpp"
#include "qcsmooth/random.hpp"

namespace qcsmooth::fluor {

struct FluorParams {
  double omega = 1.0;
  double gamma = 1.0;
  double eta = 0.8;

  void validate() const;
};

CMatrix sigma_minus();
CMatrix sigma_x();
/// |-><-|
CMatrix ground_state();

ModelSpec build_plain(const FluorParams& p);
ModelSpec build_hybrid(const FluorParams& p);

/// Closed-form stationary density matrix of the plain model.
CMatrix steady_state(const FluorParams& p);
double steady_upper_population(const FluorParams& p);

/// Laplace transform of the inter-detection waiting time density, w_eta(u).
std::complex<double> waiting_laplace(const FluorParams& p, std::complex<double> u);

/// (gamma^2 + 2 Omega^2) / (gamma eta Omega^2)
double mean_waiting_time(const FluorParams& p);

/// Time-domain waiting-time law obtained by inverting w_eta(u) with partial
/// fractions over the roots of its cubic denominator. Repeated roots (within
/// 1e-8 relative distance) switch to confluent partial fractions and are
/// reported through degenerate().
class WaitingTimeLaw {
 public:
  explicit WaitingTimeLaw(const FluorParams& p);

  double density(double t) const;
  double cdf(double t) const;
  double survival(double t) const { return 1.0 - cdf(t); }
  /// Inverse CDF by bracketed bisection.
  double quantile(double q) const;

  bool degenerate() const { return degenerate_; }
  const std::array<std::complex<double>, 3>& roots() const { return roots_; }

 private:
  struct Pole {
    std::complex<double> s;
    int multiplicity = 1;
    // Coefficients of t^k e^{s t} / k!, k < multiplicity.
    std::array<std::complex<double>, 3> coeff{};
  };

  FluorParams params_;
  std::array<std::complex<double>, 3> roots_{};
  std::vector<Pole> poles_;
  bool degenerate_ = false;
  bool null_ = false;
};

double waiting_density(const FluorParams& p, double t);

/// Perfect-detector waiting times thinned by geometric rejection.
class ThinningSampler {
 public:
  explicit ThinningSampler(const FluorParams& p);
  double operator()(Stream& rng) const;

 private:
  double eta_;
  WaitingTimeLaw perfect_;
};

double thinning_sampler(const FluorParams& p, Stream& rng);

}  // namespace qcsmooth::fluor
