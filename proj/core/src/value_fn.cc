#include "mac/value_fn.h"

#include <cmath>

#include "mac/errors.h"

namespace mac {

InfoMatrix::InfoMatrix(SymmetricMatrix z, Origin origin)
    : z_(std::move(z)), origin_(origin) {
  if (z_.dim() == 0 || z_.dim() % 2 != 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "information matrix must be 2n x 2n, got dimension " +
                    std::to_string(z_.dim()));
  }
}

InfoMatrix InfoMatrix::zero(Eigen::Index states) {
  return InfoMatrix(SymmetricMatrix::zero(2 * states), Origin::kData);
}

Matrix extract_Y(const InfoMatrix& z, double gamma) {
  return gamma * gamma * z.vx();
}

namespace {

void require_states(const Matrix& a, const InfoMatrix& z) {
  if (z.states() != a.rows()) {
    throw Error(ErrorKind::kInvalidArgument,
                "information matrix has " + std::to_string(z.states()) +
                    " states, system has " + std::to_string(a.rows()));
  }
}

void require_vector(const GameSpec& spec, const Eigen::Ref<const Vector>& x) {
  if (x.size() != spec.states()) {
    throw Error(ErrorKind::kInvalidArgument,
                "state vector has length " + std::to_string(x.size()) +
                    ", system has " + std::to_string(spec.states()) +
                    " states");
  }
}

}  // namespace

double sign_penalty(const Matrix& a, const InfoMatrix& z, int sign) {
  require_states(a, z);
  const Eigen::Index n = a.rows();
  Matrix stacked(2 * n, n);
  stacked << Matrix::Identity(n, n), static_cast<double>(sign) * a.transpose();
  return weighted_norm_sq(stacked, z.z());
}

double diag_penalty(const Matrix& a, const InfoMatrix& z) {
  require_states(a, z);
  const Eigen::Index n = a.rows();
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n).setIdentity();
  block.bottomRightCorner(n, n) = a.transpose();
  return weighted_norm_sq(block, z.z());
}

ClosedFormValue::ClosedFormValue(GameSpec spec, RiccatiSolution sol, double tol)
    : spec_(std::move(spec)), sol_(std::move(sol)) {
  require_shape(sol_.P.matrix(), spec_.states(), spec_.states(), "P");
  require_shape(sol_.T.matrix(), spec_.states(), spec_.states(), "T");
  require_shape(sol_.K, spec_.inputs(), spec_.states(), "K");
  const SymmetricMatrix next = riccati_step(spec_, sol_.P);
  residual_ = (next.matrix() - sol_.P.matrix()).cwiseAbs().maxCoeff();
  const double allowed = std::max(10.0 * tol, 1e-9 * sol_.P.max_abs());
  if (residual_ > allowed) {
    throw Error(ErrorKind::kInvalidArgument,
                "P is not a fixed point of the Riccati recursion for this game",
                residual_);
  }
  t_minus_p_ = sol_.T - sol_.P;
}

ClosedFormValue ClosedFormValue::solve(const GameSpec& spec,
                                       const RiccatiOptions& opts) {
  return ClosedFormValue(spec, solve_riccati_or_throw(spec, opts), opts.tol);
}

ScalarCoefficients ClosedFormValue::scalar() const {
  if (!spec_.is_scalar()) {
    throw Error(ErrorKind::kInvalidArgument,
                "scalar coefficients need n = m = 1");
  }
  ScalarCoefficients c;
  c.a = spec_.a()(0, 0);
  c.b = spec_.b()(0, 0);
  c.q = spec_.q()(0, 0);
  c.r = spec_.r()(0, 0);
  c.gamma_sq = spec_.gamma_sq();
  c.p = sol_.P(0, 0);
  c.s = sol_.S(0, 0);
  c.t = sol_.T(0, 0);
  c.k = sol_.K(0, 0);
  c.t_minus_p = t_minus_p_(0, 0);
  return c;
}

double v_bar0(const ClosedFormValue& cf, const Eigen::Ref<const Vector>& x,
              const InfoMatrix& z) {
  require_vector(cf.spec(), x);
  const Matrix& a = cf.spec().a();
  const double penalty =
      std::min(sign_penalty(a, z, +1), sign_penalty(a, z, -1));
  return quad_form(x, cf.solution().P) - cf.spec().gamma_sq() * penalty;
}

double v_star(const ClosedFormValue& cf, const Eigen::Ref<const Vector>& x,
              const InfoMatrix& z) {
  require_vector(cf.spec(), x);
  const Matrix& a = cf.spec().a();
  const double g2 = cf.spec().gamma_sq();
  const double evidence = trace_inner(a, extract_Y(z, cf.spec().gamma()));
  const double curvature = quad_form(x, cf.t_minus_p());
  if (std::abs(evidence) >= curvature) {
    const double penalty =
        std::min(sign_penalty(a, z, +1), sign_penalty(a, z, -1));
    return quad_form(x, cf.solution().P) - g2 * penalty;
  }
  return quad_form(x, cf.solution().T) - g2 * diag_penalty(a, z) +
         evidence * evidence / curvature;
}

LemmaMinimax lemma_aa_minimax(const ClosedFormValue& cf,
                              const Eigen::Ref<const Vector>& x,
                              const Eigen::Ref<const Matrix>& y) {
  require_vector(cf.spec(), x);
  const double evidence = trace_inner(cf.spec().a(), y);
  const double curvature = quad_form(x, cf.t_minus_p());

  LemmaMinimax out;
  if (std::abs(evidence) >= curvature) {
    out.value = quad_form(x, cf.solution().P) + 2.0 * std::abs(evidence);
    out.theta_hat = evidence > 0.0 ? -1.0 : (evidence < 0.0 ? 1.0 : 0.0);
  } else {
    out.value = quad_form(x, cf.solution().T) + evidence * evidence / curvature;
    out.theta_hat = -sat(evidence / curvature);
  }
  out.u_hat = -out.theta_hat * (cf.solution().K * x);
  return out;
}

double v_bar1(const ClosedFormValue& cf, const Eigen::Ref<const Vector>& x,
              const InfoMatrix& z) {
  const Matrix y = extract_Y(z, cf.spec().gamma());
  return lemma_aa_minimax(cf, x, y).value -
         cf.spec().gamma_sq() * diag_penalty(cf.spec().a(), z);
}

namespace {

inline double scalar_sign_penalty(const ScalarCoefficients& c,
                                  const Eigen::Matrix2d& z, double sign) {
  return z(0, 0) + 2.0 * sign * c.a * z(0, 1) + c.a * c.a * z(1, 1);
}

}  // namespace

double v_bar0(const ScalarCoefficients& c, double x, const Eigen::Matrix2d& z) {
  const double penalty = std::min(scalar_sign_penalty(c, z, 1.0),
                                  scalar_sign_penalty(c, z, -1.0));
  return c.p * x * x - c.gamma_sq * penalty;
}

double v_bar1(const ScalarCoefficients& c, double x, const Eigen::Matrix2d& z) {
  const double evidence = c.gamma_sq * c.a * z(0, 1);
  const double curvature = c.t_minus_p * x * x;
  const double minimax = std::abs(evidence) >= curvature
                             ? c.p * x * x + 2.0 * std::abs(evidence)
                             : c.t * x * x + evidence * evidence / curvature;
  return minimax - c.gamma_sq * (z(0, 0) + c.a * c.a * z(1, 1));
}

double v_star(const ScalarCoefficients& c, double x, const Eigen::Matrix2d& z) {
  const double evidence = c.gamma_sq * c.a * z(0, 1);
  const double curvature = c.t_minus_p * x * x;
  if (std::abs(evidence) >= curvature) {
    return v_bar0(c, x, z);
  }
  return c.t * x * x - c.gamma_sq * (z(0, 0) + c.a * c.a * z(1, 1)) +
         evidence * evidence / curvature;
}

}  // namespace mac
