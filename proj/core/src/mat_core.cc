#include "mac/mat_core.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mac/errors.h"

namespace mac {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kNumericalError: return "numerical-error";
    case ErrorKind::kSingularMatrix: return "singular-matrix";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kNonConvergence: return "non-convergence";
    case ErrorKind::kDegenerateProblem: return "degenerate-problem";
    case ErrorKind::kAmbiguousBracket: return "ambiguous-bracket";
    case ErrorKind::kUnboundedGame: return "unbounded-game";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kIo: return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message, double value)
    : std::runtime_error(message), kind_(kind), value_(value) {}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> eigen_decompose(
    const SymmetricMatrix& a, Eigen::DecompositionOptions opts) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(), opts);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumericalError,
                "symmetric eigen-decomposition failed");
  }
  return es;
}

std::string shape_string(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

}  // namespace

void require_shape(const Eigen::Ref<const Matrix>& m, Eigen::Index rows,
                   Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(what) + " must be " + shape_string(rows, cols) +
                    ", got " + shape_string(m.rows(), m.cols()));
  }
}

SymmetricMatrix::SymmetricMatrix(const Eigen::Ref<const Matrix>& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::kInvalidArgument,
                "symmetric matrix must be square, got " +
                    shape_string(m.rows(), m.cols()));
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument,
                "symmetric matrix has non-finite entries");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymmetricMatrix SymmetricMatrix::identity(Eigen::Index dim) {
  return SymmetricMatrix(Matrix::Identity(dim, dim));
}

SymmetricMatrix SymmetricMatrix::zero(Eigen::Index dim) {
  return SymmetricMatrix(Matrix::Zero(dim, dim));
}

SymmetricMatrix SymmetricMatrix::scalar(double value) {
  return SymmetricMatrix(Matrix::Constant(1, 1, value));
}

double SymmetricMatrix::max_abs() const {
  return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff();
}

SymmetricMatrix SymmetricMatrix::operator+(const SymmetricMatrix& other) const {
  require_shape(other.m_, dim(), dim(), "symmetric summand");
  return SymmetricMatrix(m_ + other.m_);
}

SymmetricMatrix SymmetricMatrix::operator-(const SymmetricMatrix& other) const {
  require_shape(other.m_, dim(), dim(), "symmetric subtrahend");
  return SymmetricMatrix(m_ - other.m_);
}

SymmetricMatrix SymmetricMatrix::operator*(double s) const {
  return SymmetricMatrix(m_ * s);
}

double quad_form(const Eigen::Ref<const Vector>& x, const SymmetricMatrix& a) {
  if (x.size() != a.dim()) {
    throw Error(ErrorKind::kInvalidArgument,
                "quad_form: vector length " + std::to_string(x.size()) +
                    " does not match matrix dimension " +
                    std::to_string(a.dim()));
  }
  return x.dot(a.matrix() * x);
}

double weighted_norm_sq(const Eigen::Ref<const Matrix>& b,
                        const SymmetricMatrix& a) {
  if (b.rows() != a.dim()) {
    throw Error(ErrorKind::kInvalidArgument,
                "weighted_norm_sq: B has " + std::to_string(b.rows()) +
                    " rows, weight has dimension " + std::to_string(a.dim()));
  }
  return (b.transpose() * a.matrix() * b).trace();
}

double trace_inner(const Eigen::Ref<const Matrix>& a,
                   const Eigen::Ref<const Matrix>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kInvalidArgument,
                "trace_inner: shape mismatch " +
                    shape_string(a.rows(), a.cols()) + " vs " +
                    shape_string(b.rows(), b.cols()));
  }
  return a.cwiseProduct(b).sum();
}

double sat(double y) {
  if (!std::isfinite(y)) {
    throw Error(ErrorKind::kInvalidArgument, "sat: argument is not finite");
  }
  return std::clamp(y, -1.0, 1.0);
}

double psd_margin(const SymmetricMatrix& a) {
  if (a.dim() == 0) return 0.0;
  return eigen_decompose(a, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double default_psd_tolerance(const SymmetricMatrix& a) {
  return 1e-9 * static_cast<double>(a.dim()) * a.max_abs();
}

SymmetricMatrix sym_inverse(const SymmetricMatrix& a) {
  const auto es = eigen_decompose(a, Eigen::ComputeEigenvectors);
  const Vector& lambda = es.eigenvalues();
  const double smallest = lambda.cwiseAbs().minCoeff();
  const double largest = lambda.cwiseAbs().maxCoeff();
  if (!(smallest > 1e-12 * largest)) {
    throw Error(ErrorKind::kSingularMatrix,
                "matrix is singular to working precision", smallest);
  }
  const Matrix& v = es.eigenvectors();
  return SymmetricMatrix(v * lambda.cwiseInverse().asDiagonal() *
                         v.transpose());
}

SymmetricMatrix sym_sqrt(const SymmetricMatrix& a) {
  const auto es = eigen_decompose(a, Eigen::ComputeEigenvectors);
  Vector lambda = es.eigenvalues();
  const double tol = std::max(default_psd_tolerance(a), 1e-300);
  if (lambda(0) < -tol) {
    throw Error(ErrorKind::kInvalidArgument,
                "sym_sqrt: matrix is not positive semi-definite", lambda(0));
  }
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  const Matrix& v = es.eigenvectors();
  return SymmetricMatrix(v * lambda.asDiagonal() * v.transpose());
}

SymmetricMatrix congruence(const Eigen::Ref<const Matrix>& m,
                           const SymmetricMatrix& a) {
  if (m.rows() != a.dim()) {
    throw Error(ErrorKind::kInvalidArgument,
                "congruence: operand has " + std::to_string(m.rows()) +
                    " rows, weight has dimension " + std::to_string(a.dim()));
  }
  return SymmetricMatrix(m.transpose() * a.matrix() * m);
}

}  // namespace mac
