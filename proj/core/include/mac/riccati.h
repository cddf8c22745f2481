#pragma once

// Synthesis for the sign-uncertain game
//
//   x⁺ = i·A·x + B·u + w,   i ∈ {-1, +1} unknown,
//   cost Σ |x|²_Q + |u|²_R − γ²|w|².
//
// The value function and the explicit adaptive law are parametrized by the
// fixed point P of the minimax Riccati recursion
//
//   P ← Q + AᵀSA − AᵀSB(R + BᵀSB)⁻¹BᵀSA,   S = (I − γ⁻²P)⁻¹P,
//
// together with T = Q + AᵀSA and the H∞ gain K = (R + BᵀSB)⁻¹BᵀSA.

#include <optional>
#include <string>
#include <variant>

#include "mac/mat_core.h"

namespace mac {

/// Problem data (A, B, Q, R, γ). Validated on construction: consistent
/// shapes, Q ≻ 0, R ≻ 0, γ > 0, finite entries.
class GameSpec {
 public:
  GameSpec(Matrix a, Matrix b, SymmetricMatrix q, SymmetricMatrix r,
           double gamma);

  /// n = m = 1 game with all scalar data.
  static GameSpec scalar(double a, double b, double q, double r, double gamma);

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const SymmetricMatrix& q() const { return q_; }
  const SymmetricMatrix& r() const { return r_; }
  double gamma() const { return gamma_; }
  double gamma_sq() const { return gamma_ * gamma_; }

  Eigen::Index states() const { return a_.rows(); }
  Eigen::Index inputs() const { return b_.cols(); }
  bool is_scalar() const { return states() == 1 && inputs() == 1; }

  GameSpec with_gamma(double gamma) const;

 private:
  Matrix a_;
  Matrix b_;
  SymmetricMatrix q_;
  SymmetricMatrix r_;
  double gamma_;
};

struct RiccatiOptions {
  double tol = 1e-12;
  int max_iter = 100000;
};

struct RiccatiSolution {
  SymmetricMatrix P;
  SymmetricMatrix S;
  SymmetricMatrix T;
  Matrix K;
  int iterations = 0;
  /// Max-abs change of the final recursion step.
  double residual = 0.0;
  /// Largest relative disagreement between T − P, KᵀBᵀSA and
  /// Kᵀ(R + BᵀSB)K.
  double identity_deviation = 0.0;
};

/// Returned instead of a solution when an iterate leaves 0 ≺ P ≺ γ²I.
struct RiccatiInfeasible {
  int iteration = 0;
  SymmetricMatrix iterate;
  std::string violated_constraint;
  /// psd_margin of γ²I − P_k at the offending iterate.
  double margin = 0.0;
};

using RiccatiResult = std::variant<RiccatiSolution, RiccatiInfeasible>;

/// S = (I − γ⁻²P)⁻¹P. Well defined at P = 0.
SymmetricMatrix s_from_p(const SymmetricMatrix& p, double gamma);

/// (R + BᵀSB)⁻¹BᵀSA.
Matrix gain_K(const GameSpec& spec, const SymmetricMatrix& s);

/// One step of the recursion from `p`.
SymmetricMatrix riccati_step(const GameSpec& spec, const SymmetricMatrix& p);

/// Iterates from P₀ = 0 until the max-abs step is below `opts.tol`. Throws
/// non-convergence (value() = last step size) after `opts.max_iter` steps.
RiccatiResult solve_riccati(const GameSpec& spec,
                            const RiccatiOptions& opts = {});

/// Like solve_riccati but turns an infeasible outcome into an `infeasible`
/// Error.
RiccatiSolution solve_riccati_or_throw(const GameSpec& spec,
                                       const RiccatiOptions& opts = {});

struct ConditionIIReport {
  bool feasible = false;
  double margin_plus = 0.0;
  double margin_minus = 0.0;
  double tolerance = 0.0;
};

/// Optimality certificate for the explicit law:
///
///   (γ²I−P)(T−P)⁻¹(γ²I−P) ⪰ (I ± BKA⁻¹)(γ²I−P)(I ± BKA⁻¹)ᵀ
///
/// for both signs. Margins are the smallest eigenvalues of the two
/// differences. Requires invertible A (invalid-argument otherwise) and
/// invertible T − P (degenerate-problem otherwise). A negative `tolerance`
/// selects the default PSD tolerance for each difference.
ConditionIIReport check_condition_ii(const GameSpec& spec,
                                     const RiccatiSolution& sol,
                                     double tolerance = -1.0);

struct LowerBoundReport {
  bool necessary_ok = false;
  /// psd_margin(γ²I − T).
  double margin = 0.0;
};

/// Necessary condition for a finite game value: 0 ≺ P ≺ γ²I and T ⪯ γ²I.
LowerBoundReport check_lower_bound(const GameSpec& spec,
                                   const RiccatiSolution& sol,
                                   double tolerance = -1.0);

enum class Verdict { kInfeasible, kUndetermined, kCertified };

std::string_view to_string(Verdict v);

/// Three-level classification. `infeasible`: the Riccati recursion leaves
/// P ≺ γ²I or T ⪯ γ²I fails. `certified`: condition (ii) holds. Anything in
/// between is `undetermined`; no claim is made there.
struct FeasibilityAssessment {
  Verdict verdict = Verdict::kInfeasible;
  std::optional<RiccatiSolution> solution;
  std::optional<RiccatiInfeasible> riccati_failure;
  std::optional<LowerBoundReport> lower_bound;
  std::optional<ConditionIIReport> condition_ii;
  /// Human-readable reason, e.g. why condition (ii) was not evaluated.
  std::string note;
};

FeasibilityAssessment assess_feasibility(const GameSpec& spec,
                                         const RiccatiOptions& opts = {});

enum class GammaCriterion { kConditionII, kLowerBound };

std::string_view to_string(GammaCriterion c);

struct GammaBracket {
  double lo = 1.0;
  double hi = 100.0;
};

/// True iff `criterion` holds at γ: lower_bound means verdict ≠ infeasible,
/// condition_ii means verdict = certified.
bool gamma_criterion_holds(const GameSpec& spec, GammaCriterion criterion,
                           const RiccatiOptions& opts = {});

/// Bisection for the smallest γ at which `criterion` holds. The bracket is
/// first sampled at 16 evenly spaced points; a feasible sample followed by an
/// infeasible one raises ambiguous-bracket. Invalid brackets (lo ≥ hi,
/// non-positive, criterion already true at lo or false at hi) raise
/// invalid-argument. The result is within `tol` above the flip point.
double gamma_search(const Matrix& a, const Matrix& b, const SymmetricMatrix& q,
                    const SymmetricMatrix& r, GammaCriterion criterion,
                    GammaBracket bracket, double tol = 1e-6,
                    const RiccatiOptions& opts = {});

}  // namespace mac
