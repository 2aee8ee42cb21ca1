#pragma once

// Independent reference implementations used as test oracles.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qcsmooth/random.hpp"

namespace oracle {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;

/// Truncated Taylor series of order `order`, with 2^s scaling so the scaled norm stays below 1/2.
inline Mat taylor_expm(const Mat& m, double t, int order = 30) {
  const double norm = (m * t).cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (std::ldexp(norm, -s) > 0.5) ++s;
  const Mat a = m * std::ldexp(t, -s);
  Mat term = Mat::Identity(m.rows(), m.cols());
  Mat sum = term;
  for (int k = 1; k <= order; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

/// Index of entry (i, j) of block r in the column-stacked layout.
inline int vec_index(int r, int i, int j, int d) { return r * d * d + j * d + i; }

/// Builds the matrix of a linear map on block families by acting on unit inputs.
template <class Map>
Mat matrix_of(Map&& map, int nc, int d) {
  const int n = nc * d * d;
  Mat out = Mat::Zero(n, n);
  for (int r = 0; r < nc; ++r) {
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < d; ++i) {
        std::vector<Mat> unit(nc, Mat::Zero(d, d));
        unit[r](i, j) = 1.0;
        const std::vector<Mat> image = map(unit);
        const int col = vec_index(r, i, j, d);
        for (int r2 = 0; r2 < nc; ++r2) {
          for (int j2 = 0; j2 < d; ++j2) {
            for (int i2 = 0; i2 < d; ++i2) out(vec_index(r2, i2, j2, d), col) = image[r2](i2, j2);
          }
        }
      }
    }
  }
  return out;
}

inline Mat sigma() {
  Mat s = Mat::Zero(2, 2);
  s(1, 0) = 1.0;  // |-><+| with |+> first
  return s;
}

inline Mat sigma_x() {
  Mat s = Mat::Zero(2, 2);
  s(0, 1) = 1.0;
  s(1, 0) = 1.0;
  return s;
}

inline Mat anti(const Mat& p, const Mat& q) { return 0.5 * (p * q + q * p); }

/// Right-hand side of the detector-labelled fluorescence rate equation, blocks (d, u).
inline std::vector<Mat> fluor_rhs(const std::vector<Mat>& rho, double omega, double gamma, double eta) {
  const Mat s = sigma();
  const Mat sd = s.adjoint();
  const Mat n = sd * s;
  const Mat h = 0.5 * omega * sigma_x();
  const double g[2] = {gamma * eta, gamma * (1.0 - eta)};
  std::vector<Mat> out(2);
  for (int a = 0; a < 2; ++a) {
    const int b = 1 - a;
    const Complex i(0.0, 1.0);
    out[a] = -i * (h * rho[a] - rho[a] * h) + g[a] * (s * rho[a] * sd - anti(n, rho[a])) - g[b] * anti(n, rho[a]) +
             g[a] * s * rho[b] * sd;
  }
  return out;
}

/// Observed part of the hybrid fluorescence generator: both blocks emit into d at rate gamma*eta.
inline std::vector<Mat> fluor_jump(const std::vector<Mat>& rho, double gamma, double eta) {
  const Mat s = sigma();
  std::vector<Mat> out(2, Mat::Zero(2, 2));
  out[0] = gamma * eta * (s * rho[0] * s.adjoint() + s * rho[1] * s.adjoint());
  return out;
}

/// Sum_R Sum_ij A_R(i,j) B_R(j,i).
inline Complex pairing(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  Complex sum = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (int i = 0; i < a[r].rows(); ++i) {
      for (int j = 0; j < a[r].cols(); ++j) sum += a[r](i, j) * b[r](j, i);
    }
  }
  return sum;
}

inline Mat random_matrix(qcsmooth::Stream& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
  }
  return m;
}

inline Mat random_density(qcsmooth::Stream& rng, int d) {
  const Mat a = random_matrix(rng, d, d);
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

/// Unnormalized propagator for a record: e^{D (T - t_n)} J ... J e^{D (t_1 - t0)} as dense products.
inline Mat record_propagator(const Mat& D, const Mat& J, double t0, double t1, const std::vector<double>& jumps) {
  Mat u = Mat::Identity(D.rows(), D.cols());
  double last = t0;
  for (double t : jumps) {
    if (t <= t0 || t > t1) continue;
    u = J * taylor_expm(D, t - last) * u;
    last = t;
  }
  return taylor_expm(D, t1 - last) * u;
}

}  // namespace oracle
