#pragma once

// Closed-form value functions of the sign-uncertain game.
//
// The information matrix Z (2n×2n) is blocked as [[Z_vv, Z_vx], [Z_xv, Z_xx]]
// and enters through three quantities:
//
//   sign penalty   ‖[I iA]ᵀ‖²_Z = Σ|w|² under sign i (for data-generated Z)
//   diag penalty   ‖diag{I,A}ᵀ‖²_Z = tr Z_vv + tr(A Z_xx Aᵀ)
//   evidence       Y = γ² Z_vx,  ⟨A, Y⟩
//
// so that γ²·sign_penalty(i) = γ²·diag_penalty + 2i⟨A, Y⟩.

#include <Eigen/Dense>

#include "mac/mat_core.h"
#include "mac/riccati.h"

namespace mac {

/// Z together with where it came from. Data-generated matrices (sums of
/// outer products) are PSD; general symmetric Z is accepted for lemma-level
/// evaluation.
class InfoMatrix {
 public:
  enum class Origin { kData, kGeneral };

  /// Throws invalid-argument unless the dimension is even and positive.
  explicit InfoMatrix(SymmetricMatrix z, Origin origin = Origin::kGeneral);

  static InfoMatrix zero(Eigen::Index states);

  const SymmetricMatrix& z() const { return z_; }
  Origin origin() const { return origin_; }
  Eigen::Index states() const { return z_.dim() / 2; }

  auto vv() const { return z_.matrix().topLeftCorner(states(), states()); }
  auto vx() const { return z_.matrix().topRightCorner(states(), states()); }
  auto xx() const { return z_.matrix().bottomRightCorner(states(), states()); }

 private:
  SymmetricMatrix z_;
  Origin origin_;
};

/// Y = γ²·[I 0] Z [0 I]ᵀ.
Matrix extract_Y(const InfoMatrix& z, double gamma);

/// ‖[I iA]ᵀ‖²_Z for sign i ∈ {-1, +1}.
double sign_penalty(const Matrix& a, const InfoMatrix& z, int sign);

/// ‖diag{I, A}ᵀ‖²_Z.
double diag_penalty(const Matrix& a, const InfoMatrix& z);

/// Scalar (n = m = 1) constants of the closed forms, for tight loops.
struct ScalarCoefficients {
  double a = 0, b = 0, q = 0, r = 0;
  double gamma_sq = 0;
  double p = 0, s = 0, t = 0, k = 0;
  double t_minus_p = 0;
};

/// Game data plus its Riccati fixed point. Construction re-runs one recursion
/// step from P and rejects the pair unless the step moves P by less than
/// max(10·tol, 1e-9·|P|).
class ClosedFormValue {
 public:
  ClosedFormValue(GameSpec spec, RiccatiSolution sol, double tol = 1e-12);

  /// Solves the Riccati equation; throws `infeasible` when it has no
  /// admissible solution.
  static ClosedFormValue solve(const GameSpec& spec,
                               const RiccatiOptions& opts = {});

  const GameSpec& spec() const { return spec_; }
  const RiccatiSolution& solution() const { return sol_; }
  const SymmetricMatrix& t_minus_p() const { return t_minus_p_; }
  double fixed_point_residual() const { return residual_; }

  /// Throws invalid-argument unless the game is scalar.
  ScalarCoefficients scalar() const;

 private:
  GameSpec spec_;
  RiccatiSolution sol_;
  SymmetricMatrix t_minus_p_;
  double residual_ = 0.0;
};

/// V̄₀(x, Z) = |x|²_P − γ² min_{i=±1} ‖[I iA]ᵀ‖²_Z.
double v_bar0(const ClosedFormValue& cf, const Eigen::Ref<const Vector>& x,
              const InfoMatrix& z);

/// Piecewise closed form of the limit value function:
///
///   |x|²_P − γ² min_i ‖[I iA]ᵀ‖²_Z                     if |⟨A,Y⟩| ≥ |x|²_{T−P}
///   |x|²_T − γ²‖diag{I,A}ᵀ‖²_Z + ⟨A,Y⟩²/|x|²_{T−P}     otherwise.
///
/// The first branch includes equality and the 0 ≥ 0 case at x = 0.
double v_star(const ClosedFormValue& cf, const Eigen::Ref<const Vector>& x,
              const InfoMatrix& z);

struct LemmaMinimax {
  double value = 0.0;
  /// Maximizing θ = −sat(⟨A,Y⟩/|x|²_{T−P}); 0 when both are zero.
  double theta_hat = 0.0;
  /// Minimizing u = −θ̂Kx.
  Vector u_hat;
};

/// min_u max_{i=±1} { |x|²_Q + |u|²_R + |iAx+Bu|²_S − 2⟨iA, Y⟩ }, in closed
/// form via the θ-relaxation max_{|θ|≤1} { |x|²_T − θ²|x|²_{T−P} − 2θ⟨A,Y⟩ }.
LemmaMinimax lemma_aa_minimax(const ClosedFormValue& cf,
                              const Eigen::Ref<const Vector>& x,
                              const Eigen::Ref<const Matrix>& y);

/// V̄₁(x, Z): the θ-relaxed minimax at Y = extract_Y(Z) minus
/// γ²‖diag{I,A}ᵀ‖²_Z (taken from the full Z).
double v_bar1(const ClosedFormValue& cf, const Eigen::Ref<const Vector>& x,
              const InfoMatrix& z);

// Scalar fast paths. Z is the 2×2 information matrix [[z_vv, z_vx],
// [z_vx, z_xx]]; results agree with the general overloads.
double v_bar0(const ScalarCoefficients& c, double x, const Eigen::Matrix2d& z);
double v_bar1(const ScalarCoefficients& c, double x, const Eigen::Matrix2d& z);
double v_star(const ScalarCoefficients& c, double x, const Eigen::Matrix2d& z);

}  // namespace mac
