#include "qcsmooth/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "qcsmooth/errors.hpp"

namespace qcsmooth {

namespace {

std::string space_str(int n_classical, int dim) {
  return "(n_c=" + std::to_string(n_classical) + ", d=" + std::to_string(dim) + ")";
}

// Index permutation that transposes every block of a vectorized operator.
std::vector<int> block_transpose_permutation(int n_classical, int dim) {
  const int d2 = dim * dim;
  std::vector<int> perm(static_cast<std::size_t>(n_classical * d2));
  for (int r = 0; r < n_classical; ++r) {
    for (int j = 0; j < dim; ++j) {
      for (int i = 0; i < dim; ++i) {
        perm[r * d2 + j * dim + i] = r * d2 + i * dim + j;
      }
    }
  }
  return perm;
}

}  // namespace

HybridOperator::HybridOperator(int n_classical, int dim) : dim_(dim) {
  if (n_classical < 1 || dim < 1) {
    throw DimensionMismatch("hybrid operator needs n_c >= 1 and d >= 1, got " +
                            space_str(n_classical, dim));
  }
  blocks_.assign(static_cast<std::size_t>(n_classical), CMatrix::Zero(dim, dim));
}

HybridOperator::HybridOperator(std::vector<CMatrix> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw DimensionMismatch("hybrid operator needs at least one block");
  dim_ = static_cast<int>(blocks_.front().rows());
  if (dim_ < 1) throw DimensionMismatch("hybrid operator blocks must be non-empty");
  for (const auto& b : blocks_) {
    if (b.rows() != dim_ || b.cols() != dim_) {
      throw DimensionMismatch("hybrid operator blocks must all be " + std::to_string(dim_) +
                              "x" + std::to_string(dim_));
    }
  }
}

HybridOperator HybridOperator::zero(int n_classical, int dim) {
  return HybridOperator(n_classical, dim);
}

HybridOperator HybridOperator::identity(int n_classical, int dim) {
  HybridOperator h(n_classical, dim);
  for (auto& b : h.blocks_) b.setIdentity();
  return h;
}

HybridOperator HybridOperator::separable(const CMatrix& rho, std::span<const double> probs) {
  if (rho.rows() != rho.cols()) throw DimensionMismatch("separable state needs a square matrix");
  HybridOperator h(static_cast<int>(probs.size()), static_cast<int>(rho.rows()));
  for (std::size_t r = 0; r < probs.size(); ++r) h.blocks_[r] = probs[r] * rho;
  return h;
}

Complex HybridOperator::total_trace() const {
  Complex tr = 0.0;
  for (const auto& b : blocks_) tr += b.trace();
  return tr;
}

bool HybridOperator::is_state(double tol_herm, double tol_psd, double tol_trace) const {
  if (blocks_.empty() || !is_finite()) return false;
  for (const auto& b : blocks_) {
    if ((b - b.adjoint()).cwiseAbs().maxCoeff() > tol_herm) return false;
    const CMatrix herm = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol_psd) return false;
  }
  const Complex tr = total_trace();
  return std::abs(tr.real() - 1.0) <= tol_trace && std::abs(tr.imag()) <= tol_trace;
}

bool HybridOperator::is_finite() const {
  return std::all_of(blocks_.begin(), blocks_.end(), [](const CMatrix& b) { return b.allFinite(); });
}

HybridOperator& HybridOperator::operator+=(const HybridOperator& other) {
  require_same_space(*this, other);
  for (std::size_t r = 0; r < blocks_.size(); ++r) blocks_[r] += other.blocks_[r];
  return *this;
}

HybridOperator& HybridOperator::operator-=(const HybridOperator& other) {
  require_same_space(*this, other);
  for (std::size_t r = 0; r < blocks_.size(); ++r) blocks_[r] -= other.blocks_[r];
  return *this;
}

HybridOperator& HybridOperator::operator*=(Complex s) {
  for (auto& b : blocks_) b *= s;
  return *this;
}

double HybridOperator::max_abs() const {
  double m = 0.0;
  for (const auto& b : blocks_) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

HybridOperator operator+(HybridOperator a, const HybridOperator& b) { return a += b; }
HybridOperator operator-(HybridOperator a, const HybridOperator& b) { return a -= b; }
HybridOperator operator*(Complex s, HybridOperator a) { return a *= s; }

HybridSuperop::HybridSuperop(int n_classical, int dim, CMatrix matrix)
    : n_classical_(n_classical), dim_(dim), matrix_(std::move(matrix)) {
  if (n_classical < 1 || dim < 1) {
    throw DimensionMismatch("superoperator needs n_c >= 1 and d >= 1, got " +
                            space_str(n_classical, dim));
  }
  const int n = size();
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw DimensionMismatch("superoperator on " + space_str(n_classical, dim) + " must be " +
                            std::to_string(n) + "x" + std::to_string(n));
  }
}

HybridSuperop HybridSuperop::zero(int n_classical, int dim) {
  const int n = n_classical * dim * dim;
  return {n_classical, dim, CMatrix::Zero(n, n)};
}

HybridSuperop HybridSuperop::identity(int n_classical, int dim) {
  const int n = n_classical * dim * dim;
  return {n_classical, dim, CMatrix::Identity(n, n)};
}

HybridSuperop& HybridSuperop::operator+=(const HybridSuperop& other) {
  if (other.n_classical_ != n_classical_ || other.dim_ != dim_) {
    throw DimensionMismatch("superoperator sum across different spaces");
  }
  matrix_ += other.matrix_;
  return *this;
}

HybridSuperop& HybridSuperop::operator-=(const HybridSuperop& other) {
  if (other.n_classical_ != n_classical_ || other.dim_ != dim_) {
    throw DimensionMismatch("superoperator difference across different spaces");
  }
  matrix_ -= other.matrix_;
  return *this;
}

HybridSuperop operator+(HybridSuperop a, const HybridSuperop& b) { return a += b; }
HybridSuperop operator-(HybridSuperop a, const HybridSuperop& b) { return a -= b; }

HybridSuperop operator*(Complex s, HybridSuperop a) {
  return {a.n_classical(), a.dim(), s * a.matrix()};
}

HybridSuperop operator*(const HybridSuperop& a, const HybridSuperop& b) {
  if (a.n_classical() != b.n_classical() || a.dim() != b.dim()) {
    throw DimensionMismatch("superoperator composition across different spaces");
  }
  return {a.n_classical(), a.dim(), a.matrix() * b.matrix()};
}

CVector vectorize(const HybridOperator& h) {
  const int d2 = h.dim() * h.dim();
  CVector v(h.n_classical() * d2);
  for (int r = 0; r < h.n_classical(); ++r) {
    // Eigen storage is column-major, so the raw buffer is already column-stacked.
    v.segment(r * d2, d2) = Eigen::Map<const CVector>(h.block(r).data(), d2);
  }
  return v;
}

HybridOperator devectorize(const CVector& v, int n_classical, int dim) {
  const int d2 = dim * dim;
  if (n_classical < 1 || dim < 1 || v.size() != n_classical * d2) {
    throw DimensionMismatch("cannot devectorize length " + std::to_string(v.size()) +
                            " into " + space_str(n_classical, dim));
  }
  HybridOperator h(n_classical, dim);
  for (int r = 0; r < n_classical; ++r) {
    h.block(r) = Eigen::Map<const CMatrix>(v.data() + r * d2, dim, dim);
  }
  return h;
}

HybridOperator apply(const HybridSuperop& s, const HybridOperator& h) {
  require_same_space(s, h);
  return devectorize(s.matrix() * vectorize(h), h.n_classical(), h.dim());
}

HybridSuperop expm(const HybridSuperop& s, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw NonFiniteValue("expm needs a finite duration t >= 0, got " + std::to_string(t));
  }
  if (!s.matrix().allFinite()) throw NonFiniteValue("expm of a superoperator with non-finite entries");
  if (t == 0.0) return HybridSuperop::identity(s.n_classical(), s.dim());
  CMatrix scaled = s.matrix() * t;
  CMatrix result = scaled.exp();
  if (!result.allFinite()) throw NonFiniteValue("expm overflowed");
  return {s.n_classical(), s.dim(), std::move(result)};
}

Complex hs_pairing(const HybridOperator& a, const HybridOperator& b) {
  require_same_space(a, b);
  Complex acc = 0.0;
  for (int r = 0; r < a.n_classical(); ++r) {
    // Tr[A B] = sum_ij A_ij B_ji
    acc += a.block(r).cwiseProduct(b.block(r).transpose()).sum();
  }
  return acc;
}

HybridSuperop dual(const HybridSuperop& s) {
  // With P the block-transpose permutation, hs(A, B) = vec(A)^T P vec(B);
  // the pairing identity then forces S# = P S^T P.
  const auto perm = block_transpose_permutation(s.n_classical(), s.dim());
  const int n = s.size();
  const CMatrix& m = s.matrix();
  CMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, j) = m(perm[j], perm[i]);
  }
  return {s.n_classical(), s.dim(), std::move(out)};
}

HybridOperator hermitize(const HybridOperator& h) {
  HybridOperator out = h;
  for (int r = 0; r < out.n_classical(); ++r) {
    CMatrix sym = 0.5 * (h.block(r) + h.block(r).adjoint());
    out.block(r) = std::move(sym);
  }
  return out;
}

double purity(const CMatrix& rho) {
  return rho.cwiseProduct(rho.transpose()).sum().real();
}

void require_same_space(const HybridOperator& a, const HybridOperator& b) {
  if (a.n_classical() != b.n_classical() || a.dim() != b.dim()) {
    throw DimensionMismatch("hybrid operators live in different spaces: " +
                            space_str(a.n_classical(), a.dim()) + " vs " +
                            space_str(b.n_classical(), b.dim()));
  }
}

void require_same_space(const HybridSuperop& s, const HybridOperator& h) {
  if (s.n_classical() != h.n_classical() || s.dim() != h.dim()) {
    throw DimensionMismatch("superoperator on " + space_str(s.n_classical(), s.dim()) +
                            " applied to operator in " + space_str(h.n_classical(), h.dim()));
  }
}

}  // namespace qcsmooth
