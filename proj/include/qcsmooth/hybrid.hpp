#pragma once

// Dense linear algebra over hybrid quantum-classical operators.
//
// A hybrid operator is a family of d x d complex blocks indexed by a classical
// label R = 0..n_c-1. Its vectorization stacks the columns of every block and
// concatenates the blocks in label order, so superoperators are plain
// (n_c d^2) x (n_c d^2) complex matrices acting on that vector.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qcsmooth {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

class HybridOperator {
 public:
  HybridOperator() = default;
  HybridOperator(int n_classical, int dim);
  explicit HybridOperator(std::vector<CMatrix> blocks);

  static HybridOperator zero(int n_classical, int dim);
  /// |I) = I|1): the identity in every block.
  static HybridOperator identity(int n_classical, int dim);
  /// Separable state rho |P).
  static HybridOperator separable(const CMatrix& rho, std::span<const double> probs);

  int n_classical() const { return static_cast<int>(blocks_.size()); }
  int dim() const { return dim_; }
  const CMatrix& block(int r) const { return blocks_.at(r); }
  CMatrix& block(int r) { return blocks_.at(r); }
  const std::vector<CMatrix>& blocks() const { return blocks_; }

  /// Sum over labels of Tr[block_R].
  Complex total_trace() const;

  /// Hermitian blocks, eigenvalues >= -tol_psd and unit total trace.
  bool is_state(double tol_herm = 1e-10, double tol_psd = 1e-10, double tol_trace = 1e-9) const;
  bool is_finite() const;

  HybridOperator& operator+=(const HybridOperator& other);
  HybridOperator& operator-=(const HybridOperator& other);
  HybridOperator& operator*=(Complex s);

  /// Largest entry magnitude across all blocks.
  double max_abs() const;

 private:
  int dim_ = 0;
  std::vector<CMatrix> blocks_;
};

HybridOperator operator+(HybridOperator a, const HybridOperator& b);
HybridOperator operator-(HybridOperator a, const HybridOperator& b);
HybridOperator operator*(Complex s, HybridOperator a);

/// Square matrix acting on vectorize(H) for H in the (n_classical, dim) space.
class HybridSuperop {
 public:
  HybridSuperop() = default;
  HybridSuperop(int n_classical, int dim, CMatrix matrix);

  static HybridSuperop zero(int n_classical, int dim);
  static HybridSuperop identity(int n_classical, int dim);

  int n_classical() const { return n_classical_; }
  int dim() const { return dim_; }
  int size() const { return n_classical_ * dim_ * dim_; }
  const CMatrix& matrix() const { return matrix_; }

  HybridSuperop& operator+=(const HybridSuperop& other);
  HybridSuperop& operator-=(const HybridSuperop& other);

 private:
  int n_classical_ = 0;
  int dim_ = 0;
  CMatrix matrix_;
};

HybridSuperop operator+(HybridSuperop a, const HybridSuperop& b);
HybridSuperop operator-(HybridSuperop a, const HybridSuperop& b);
HybridSuperop operator*(Complex s, HybridSuperop a);
/// Composition: (a * b) applies b first.
HybridSuperop operator*(const HybridSuperop& a, const HybridSuperop& b);

CVector vectorize(const HybridOperator& h);
HybridOperator devectorize(const CVector& v, int n_classical, int dim);

HybridOperator apply(const HybridSuperop& s, const HybridOperator& h);

/// exp(S t) by scaling and squaring with a Pade approximant. Requires t >= 0.
HybridSuperop expm(const HybridSuperop& s, double t);

/// Sum_R Tr[A_R B_R] (no complex conjugation).
Complex hs_pairing(const HybridOperator& a, const HybridOperator& b);

/// Adjoint with respect to hs_pairing: hs(A, S rho) = hs(rho, S# A).
HybridSuperop dual(const HybridSuperop& s);

/// Replaces every block by (A + A^dagger) / 2.
HybridOperator hermitize(const HybridOperator& h);

/// Quantum purity Tr[rho^2] of a single density matrix.
double purity(const CMatrix& rho);

/// Throws DimensionMismatch unless both operands live in the same hybrid space.
void require_same_space(const HybridOperator& a, const HybridOperator& b);
void require_same_space(const HybridSuperop& s, const HybridOperator& h);

}  // namespace qcsmooth
