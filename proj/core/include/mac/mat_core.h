#pragma once

// Small dense linear algebra shared by every module: a symmetric matrix value
// type plus the quadratic-form notation used throughout the controller
// formulas.
//
//   quad_form(x, A)        = xᵀAx               (|x|²_A)
//   weighted_norm_sq(B, A) = trace(BᵀAB)        (‖B‖²_A)
//   trace_inner(A, B)      = trace(AᵀB)         (⟨A, B⟩)

#include <Eigen/Dense>

namespace mac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Square matrix that is exactly symmetric. Construction averages the input
/// with its transpose, so repeated updates cannot drift out of symmetry.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;

  /// Throws invalid-argument if `m` is not square or has non-finite entries.
  explicit SymmetricMatrix(const Eigen::Ref<const Matrix>& m);

  static SymmetricMatrix identity(Eigen::Index dim);
  static SymmetricMatrix zero(Eigen::Index dim);
  static SymmetricMatrix scalar(double value);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// Largest absolute entry; 0 for the empty matrix.
  double max_abs() const;

  SymmetricMatrix operator+(const SymmetricMatrix& other) const;
  SymmetricMatrix operator-(const SymmetricMatrix& other) const;
  SymmetricMatrix operator*(double s) const;

 private:
  Matrix m_;
};

inline SymmetricMatrix operator*(double s, const SymmetricMatrix& a) {
  return a * s;
}

/// xᵀAx.
double quad_form(const Eigen::Ref<const Vector>& x, const SymmetricMatrix& a);

/// trace(BᵀAB); requires rows(B) = dim(A).
double weighted_norm_sq(const Eigen::Ref<const Matrix>& b,
                        const SymmetricMatrix& a);

/// trace(AᵀB) = Σᵢⱼ AᵢⱼBᵢⱼ; requires equal shapes.
double trace_inner(const Eigen::Ref<const Matrix>& a,
                   const Eigen::Ref<const Matrix>& b);

/// Clip to [-1, 1]. Throws invalid-argument on NaN or infinity.
double sat(double y);

/// Smallest eigenvalue. The caller compares it against a tolerance; a signed
/// margin rather than a yes/no answer is what marginal feasibility checks need.
double psd_margin(const SymmetricMatrix& a);

/// Default PSD tolerance: 1e-9 × dim × max|entry|.
double default_psd_tolerance(const SymmetricMatrix& a);

/// Inverse of a symmetric matrix. Throws singular-matrix (with the smallest
/// |eigenvalue| as value()) when min|λ| ≤ 1e-12 · max|λ|.
SymmetricMatrix sym_inverse(const SymmetricMatrix& a);

/// Principal square root of a positive semi-definite matrix. Eigenvalues in
/// [-tol, 0) are clamped to zero; anything more negative is invalid-argument.
SymmetricMatrix sym_sqrt(const SymmetricMatrix& a);

/// MᵀAM, symmetrized.
SymmetricMatrix congruence(const Eigen::Ref<const Matrix>& m,
                           const SymmetricMatrix& a);

/// Throws invalid-argument unless `m` is rows × cols. `what` names the operand.
void require_shape(const Eigen::Ref<const Matrix>& m, Eigen::Index rows,
                   Eigen::Index cols, const char* what);

}  // namespace mac
