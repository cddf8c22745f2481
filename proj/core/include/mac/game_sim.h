#pragma once

// Closed-loop play of the sign-uncertain game under the explicit adaptive
// law
//
//   u_t = sat( γ² Σ_{τ<t} (Bu_τ − x_{τ+1})ᵀ A x_τ / |x_t|²_{T−P} ) · K x_t,
//
// with the information state Z_t = Σ ζ_τ ζ_τᵀ, ζ_τ = [Bu_τ − x_{τ+1}; x_τ].

#include <cstdint>
#include <string>
#include <vector>

#include "mac/mat_core.h"
#include "mac/riccati.h"
#include "mac/value_fn.h"

namespace mac {

/// Accumulated data Z_t with its upper-right block (the sign evidence)
/// cached. Starts at Z₀ = 0.
class InfoState {
 public:
  explicit InfoState(Eigen::Index states);

  const SymmetricMatrix& z() const { return z_; }
  /// Σ (Bu_τ − x_{τ+1}) x_τᵀ; equals the upper-right block of Z exactly.
  const Matrix& evidence() const { return evidence_; }
  int t() const { return t_; }
  Eigen::Index states() const { return evidence_.rows(); }

  InfoMatrix info_matrix() const {
    return InfoMatrix(z_, InfoMatrix::Origin::kData);
  }

  friend InfoState update_info(const InfoState& info,
                               const Eigen::Ref<const Vector>& x,
                               const Eigen::Ref<const Vector>& u,
                               const Eigen::Ref<const Vector>& x_next,
                               const Eigen::Ref<const Matrix>& b);

 private:
  SymmetricMatrix z_;
  Matrix evidence_;
  int t_ = 0;
};

/// Z ← Z + ζζᵀ with ζ = [Bu − x_next; x].
InfoState update_info(const InfoState& info, const Eigen::Ref<const Vector>& x,
                      const Eigen::Ref<const Vector>& u,
                      const Eigen::Ref<const Vector>& x_next,
                      const Eigen::Ref<const Matrix>& b);

/// Saturation argument γ²⟨A, evidence⟩ / |x|²_{T−P}; 0 when x = 0.
double controller_ratio(const Eigen::Ref<const Vector>& x,
                        const InfoState& info, const GameSpec& spec,
                        const RiccatiSolution& sol);

/// The explicit adaptive law. Returns 0 at x = 0.
Vector controller_u(const Eigen::Ref<const Vector>& x, const InfoState& info,
                    const GameSpec& spec, const RiccatiSolution& sol);

/// argmax_v |v|²_P − γ²|iAx + Bu − v|² = (I − γ⁻²P)⁻¹(iAx + Bu). Throws
/// infeasible when P ⋠ γ²I strictly.
Vector worst_case_v(const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& u, int sign,
                    const GameSpec& spec, const RiccatiSolution& sol);

struct AdversaryPolicy {
  enum class Kind { kZero, kConstant, kRandomBounded, kWorstCase };

  Kind kind = Kind::kZero;
  /// Euclidean bound for kRandomBounded (uniform in the ball).
  double bound = 0.0;
  std::uint64_t seed = 0;
  /// Disturbance for kConstant.
  Vector constant;
  /// Sign the worst-case adversary plays against; may differ from the
  /// plant's.
  int sign = 1;

  static AdversaryPolicy zero() { return {}; }
  static AdversaryPolicy constant_disturbance(Vector w);
  static AdversaryPolicy random_bounded(double bound, std::uint64_t seed);
  static AdversaryPolicy worst_case(int sign);
};

std::string_view to_string(AdversaryPolicy::Kind kind);
AdversaryPolicy::Kind adversary_kind_from_string(std::string_view name);

struct Trajectory {
  std::vector<Vector> states;  ///< x_0 .. x_N
  std::vector<Vector> inputs;  ///< u_0 .. u_{N-1}
  std::vector<Vector> disturbances;  ///< w_0 .. w_{N-1}
  int sign = 1;
  /// running_payoff[t] = Σ_{τ≤t} |x_τ|²_Q + |u_τ|²_R − γ²|w_τ|².
  std::vector<double> running_payoff;
  /// Evidence block at every step, for the sign-learning property.
  std::vector<double> saturation_args;

  int horizon() const { return static_cast<int>(inputs.size()); }
};

/// Rolls the closed loop for `horizon` steps. Throws divergence if any state
/// entry exceeds 1e9 in magnitude.
Trajectory simulate(const GameSpec& spec, const RiccatiSolution& sol,
                    const Eigen::Ref<const Vector>& x0, int sign,
                    const AdversaryPolicy& adversary, int horizon);

/// Max over t of |x_{t+1} − (iAx_t + Bu_t + w_t)|∞.
double reconstruction_residual(const Trajectory& traj, const GameSpec& spec);

struct DissipationReport {
  bool ok = false;
  /// max_N running_payoff[N] − V*(x₀, 0). Non-positive when ok.
  double worst_slack = 0.0;
  double bound = 0.0;
};

/// Every prefix payoff must stay below V*(x₀, 0) + 1e-6.
DissipationReport dissipation_check(const Trajectory& traj,
                                    const ClosedFormValue& cf);

}  // namespace mac
