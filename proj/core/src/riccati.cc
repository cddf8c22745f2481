#include "mac/riccati.h"

#include <array>
#include <cmath>
#include <sstream>

#include "mac/errors.h"

namespace mac {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(what) + " has non-finite entries");
  }
}

bool is_invertible(const Matrix& a) {
  if (a.rows() == 0) return false;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& sv = svd.singularValues();
  return sv(sv.size() - 1) > 1e-12 * sv(0);
}

SymmetricMatrix gamma_sq_identity(const GameSpec& spec) {
  return SymmetricMatrix::identity(spec.states()) * spec.gamma_sq();
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

GameSpec::GameSpec(Matrix a, Matrix b, SymmetricMatrix q, SymmetricMatrix r,
                   double gamma)
    : a_(std::move(a)),
      b_(std::move(b)),
      q_(std::move(q)),
      r_(std::move(r)),
      gamma_(gamma) {
  const Eigen::Index n = a_.rows();
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "A must be non-empty");
  require_shape(a_, n, n, "A");
  if (b_.rows() != n || b_.cols() == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "B must have " + std::to_string(n) +
                    " rows and at least one column");
  }
  require_shape(q_.matrix(), n, n, "Q");
  require_shape(r_.matrix(), b_.cols(), b_.cols(), "R");
  require_finite(a_, "A");
  require_finite(b_, "B");
  if (!(std::isfinite(gamma_) && gamma_ > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "gamma must be positive");
  }
  if (psd_margin(q_) <= default_psd_tolerance(q_)) {
    throw Error(ErrorKind::kInvalidArgument, "Q must be positive definite",
                psd_margin(q_));
  }
  if (psd_margin(r_) <= default_psd_tolerance(r_)) {
    throw Error(ErrorKind::kInvalidArgument, "R must be positive definite",
                psd_margin(r_));
  }
}

GameSpec GameSpec::scalar(double a, double b, double q, double r,
                          double gamma) {
  return GameSpec(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b),
                  SymmetricMatrix::scalar(q), SymmetricMatrix::scalar(r),
                  gamma);
}

GameSpec GameSpec::with_gamma(double gamma) const {
  return GameSpec(a_, b_, q_, r_, gamma);
}

SymmetricMatrix s_from_p(const SymmetricMatrix& p, double gamma) {
  const Eigen::Index n = p.dim();
  const SymmetricMatrix shrink(Matrix::Identity(n, n) -
                               p.matrix() / (gamma * gamma));
  return SymmetricMatrix(sym_inverse(shrink).matrix() * p.matrix());
}

Matrix gain_K(const GameSpec& spec, const SymmetricMatrix& s) {
  require_shape(s.matrix(), spec.states(), spec.states(), "S");
  const Matrix& b = spec.b();
  const SymmetricMatrix g(spec.r().matrix() + b.transpose() * s.matrix() * b);
  return sym_inverse(g).matrix() * (b.transpose() * s.matrix() * spec.a());
}

SymmetricMatrix riccati_step(const GameSpec& spec, const SymmetricMatrix& p) {
  const SymmetricMatrix s = s_from_p(p, spec.gamma());
  const Matrix& a = spec.a();
  const Matrix& b = spec.b();
  const Matrix sa = s.matrix() * a;
  const Matrix g = spec.r().matrix() + b.transpose() * s.matrix() * b;
  const Matrix bsa = b.transpose() * sa;
  const Matrix correction = bsa.transpose() * g.ldlt().solve(bsa);
  return SymmetricMatrix(spec.q().matrix() + a.transpose() * sa - correction);
}

namespace {

std::optional<RiccatiInfeasible> violates_gamma_bound(const GameSpec& spec,
                                                      const SymmetricMatrix& p,
                                                      int iteration) {
  if (!p.matrix().allFinite()) {
    return RiccatiInfeasible{iteration, p, "iterate diverged", -INFINITY};
  }
  const double margin = psd_margin(gamma_sq_identity(spec) - p);
  if (margin <= 1e-10 * spec.gamma_sq()) {
    return RiccatiInfeasible{iteration, p, "P < gamma^2 I", margin};
  }
  return std::nullopt;
}

RiccatiSolution finalize(const GameSpec& spec, SymmetricMatrix p,
                         int iterations, double residual) {
  RiccatiSolution sol;
  sol.S = s_from_p(p, spec.gamma());
  sol.K = gain_K(spec, sol.S);
  sol.T = spec.q() + congruence(spec.a(), sol.S);
  sol.P = std::move(p);
  sol.iterations = iterations;
  sol.residual = residual;

  const Matrix& a = spec.a();
  const Matrix& b = spec.b();
  const Matrix t_minus_p = sol.T.matrix() - sol.P.matrix();
  const Matrix via_gain =
      sol.K.transpose() * b.transpose() * sol.S.matrix() * a;
  const Matrix via_weight =
      sol.K.transpose() *
      (spec.r().matrix() + b.transpose() * sol.S.matrix() * b) * sol.K;
  const double scale = sol.T.max_abs();
  sol.identity_deviation =
      std::max({max_abs_diff(t_minus_p, via_gain),
                max_abs_diff(t_minus_p, via_weight),
                max_abs_diff(via_gain, via_weight)}) /
      scale;
  if (sol.identity_deviation > 1e-6) {
    throw Error(ErrorKind::kNumericalError,
                "Riccati fixed point fails T - P = K'B'SA", sol.identity_deviation);
  }
  return sol;
}

}  // namespace

RiccatiResult solve_riccati(const GameSpec& spec, const RiccatiOptions& opts) {
  if (!(opts.tol > 0.0) || opts.max_iter < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "solve_riccati: tol must be positive and max_iter >= 1");
  }
  SymmetricMatrix p = SymmetricMatrix::zero(spec.states());
  double step = INFINITY;
  for (int k = 0; k < opts.max_iter; ++k) {
    SymmetricMatrix next = riccati_step(spec, p);
    if (auto bad = violates_gamma_bound(spec, next, k + 1)) return *bad;
    step = max_abs_diff(next.matrix(), p.matrix());
    p = std::move(next);
    if (step < opts.tol) return finalize(spec, std::move(p), k + 1, step);
  }
  std::ostringstream os;
  os << "Riccati recursion did not converge in " << opts.max_iter
     << " iterations (last step " << step << ")";
  throw Error(ErrorKind::kNonConvergence, os.str(), step);
}

RiccatiSolution solve_riccati_or_throw(const GameSpec& spec,
                                       const RiccatiOptions& opts) {
  RiccatiResult result = solve_riccati(spec, opts);
  if (auto* bad = std::get_if<RiccatiInfeasible>(&result)) {
    std::ostringstream os;
    os << "Riccati recursion infeasible at gamma=" << spec.gamma()
       << ": iterate " << bad->iteration << " violates "
       << bad->violated_constraint;
    throw Error(ErrorKind::kInfeasible, os.str(), bad->margin);
  }
  return std::get<RiccatiSolution>(std::move(result));
}

ConditionIIReport check_condition_ii(const GameSpec& spec,
                                     const RiccatiSolution& sol,
                                     double tolerance) {
  if (!is_invertible(spec.a())) {
    throw Error(ErrorKind::kInvalidArgument,
                "condition (ii) requires invertible A");
  }
  const SymmetricMatrix gap = gamma_sq_identity(spec) - sol.P;
  SymmetricMatrix t_minus_p_inv;
  try {
    t_minus_p_inv = sym_inverse(sol.T - sol.P);
  } catch (const Error& e) {
    throw Error(ErrorKind::kDegenerateProblem,
                "condition (ii) requires invertible T - P", e.value());
  }
  const SymmetricMatrix lhs = congruence(gap.matrix(), t_minus_p_inv);

  // E = B K A⁻¹, computed as the solution of Eᵀ = A⁻ᵀ (BK)ᵀ.
  const Matrix bk = spec.b() * sol.K;
  const Matrix e = spec.a().transpose().fullPivLu().solve(bk.transpose()).transpose();
  const Eigen::Index n = spec.states();
  const Matrix identity = Matrix::Identity(n, n);

  ConditionIIReport report;
  report.tolerance = tolerance >= 0.0 ? tolerance : default_psd_tolerance(lhs);
  report.margin_plus =
      psd_margin(lhs - congruence((identity + e).transpose(), gap));
  report.margin_minus =
      psd_margin(lhs - congruence((identity - e).transpose(), gap));
  report.feasible = report.margin_plus >= -report.tolerance &&
                    report.margin_minus >= -report.tolerance;
  return report;
}

LowerBoundReport check_lower_bound(const GameSpec& spec,
                                   const RiccatiSolution& sol,
                                   double tolerance) {
  const SymmetricMatrix g2 = gamma_sq_identity(spec);
  const double tol = tolerance >= 0.0 ? tolerance : default_psd_tolerance(g2);
  LowerBoundReport report;
  report.margin = psd_margin(g2 - sol.T);
  const bool p_positive = psd_margin(sol.P) > 0.0;
  const bool p_below = psd_margin(g2 - sol.P) > 0.0;
  report.necessary_ok = p_positive && p_below && report.margin >= -tol;
  return report;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kInfeasible: return "infeasible";
    case Verdict::kUndetermined: return "undetermined";
    case Verdict::kCertified: return "certified";
  }
  return "unknown";
}

std::string_view to_string(GammaCriterion c) {
  switch (c) {
    case GammaCriterion::kConditionII: return "condition_ii";
    case GammaCriterion::kLowerBound: return "lower_bound";
  }
  return "unknown";
}

FeasibilityAssessment assess_feasibility(const GameSpec& spec,
                                         const RiccatiOptions& opts) {
  FeasibilityAssessment out;
  RiccatiResult result = solve_riccati(spec, opts);
  if (auto* bad = std::get_if<RiccatiInfeasible>(&result)) {
    out.verdict = Verdict::kInfeasible;
    out.note = "Riccati recursion violates " + bad->violated_constraint;
    out.riccati_failure = std::move(*bad);
    return out;
  }
  out.solution = std::get<RiccatiSolution>(std::move(result));
  out.lower_bound = check_lower_bound(spec, *out.solution);
  if (!out.lower_bound->necessary_ok) {
    out.verdict = Verdict::kInfeasible;
    out.note = "necessary condition T <= gamma^2 I fails";
    return out;
  }
  try {
    out.condition_ii = check_condition_ii(spec, *out.solution);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kInvalidArgument &&
        e.kind() != ErrorKind::kDegenerateProblem) {
      throw;
    }
    out.verdict = Verdict::kUndetermined;
    out.note = std::string("condition (ii) not evaluated: ") + e.what();
    return out;
  }
  if (out.condition_ii->feasible) {
    out.verdict = Verdict::kCertified;
  } else {
    out.verdict = Verdict::kUndetermined;
    out.note = "Riccati solvable and lower bound holds, condition (ii) fails";
  }
  return out;
}

bool gamma_criterion_holds(const GameSpec& spec, GammaCriterion criterion,
                           const RiccatiOptions& opts) {
  const Verdict v = assess_feasibility(spec, opts).verdict;
  return criterion == GammaCriterion::kLowerBound ? v != Verdict::kInfeasible
                                                  : v == Verdict::kCertified;
}

double gamma_search(const Matrix& a, const Matrix& b, const SymmetricMatrix& q,
                    const SymmetricMatrix& r, GammaCriterion criterion,
                    GammaBracket bracket, double tol,
                    const RiccatiOptions& opts) {
  if (!(std::isfinite(bracket.lo) && std::isfinite(bracket.hi) &&
        bracket.lo > 0.0 && bracket.hi > bracket.lo)) {
    throw Error(ErrorKind::kInvalidArgument,
                "gamma bracket must satisfy 0 < lo < hi");
  }
  if (!(tol > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "gamma tolerance must be positive");
  }
  const GameSpec base(a, b, q, r, bracket.hi);
  auto holds = [&](double g) {
    return gamma_criterion_holds(base.with_gamma(g), criterion, opts);
  };

  constexpr int kSamples = 16;
  std::array<double, kSamples> gammas{};
  std::array<bool, kSamples> ok{};
  for (int j = 0; j < kSamples; ++j) {
    gammas[j] = bracket.lo + (bracket.hi - bracket.lo) * j / (kSamples - 1);
    ok[j] = holds(gammas[j]);
  }
  if (ok.front()) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(to_string(criterion)) +
                    " already holds at the lower end of the bracket");
  }
  if (!ok.back()) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(to_string(criterion)) +
                    " does not hold at the upper end of the bracket");
  }
  int first = 1;
  while (!ok[first]) ++first;
  for (int j = first; j < kSamples; ++j) {
    if (!ok[j]) {
      std::ostringstream os;
      os << "feasibility is not monotone on the bracket: holds at gamma="
         << gammas[first] << " but not at gamma=" << gammas[j];
      throw Error(ErrorKind::kAmbiguousBracket, os.str(), gammas[j]);
    }
  }

  double lo = gammas[first - 1];
  double hi = gammas[first];
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace mac
