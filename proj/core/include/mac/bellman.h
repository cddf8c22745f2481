#pragma once

// Numerical Bellman operator for the reformulated game on (x, Z):
//
//   F V(x, Z) = min_u max_v { |x|²_Q + |u|²_R + V(v, Z + ζζᵀ) },
//   ζ = [Bu − v; x],
//
// evaluated by grid search with local refinement (scalar systems only), plus
// the value-iteration driver and the checkers for the θ-extremality lemma and
// the matrix identities that connect it to the optimality certificate.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mac/mat_core.h"
#include "mac/riccati.h"
#include "mac/value_fn.h"

namespace mac {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Search resolution. Unset ranges use x- and u-dependent defaults:
///   u ∈ ±(10|x|·|K| + 1),  v ∈ ±(10(|x| + |u|) + 1),
/// with K the H∞ gain (taken from `gain` or solved for).
struct SearchGrid {
  std::optional<Interval> u_range;
  std::optional<Interval> v_range;
  int u_steps = 201;
  int v_steps = 201;
  int refine_rounds = 5;
  std::optional<double> gain;

  /// Throws invalid-argument on steps < 3, refine_rounds < 0 or empty or
  /// non-finite ranges.
  void validate() const;
};

/// Scalar value function V(x, Z) with Z = [[z_vv, z_vx], [z_vx, z_xx]].
using ScalarValueFn = std::function<double(double x, const Eigen::Matrix2d& z)>;

struct ValueHandle {
  std::string label;
  ScalarValueFn evaluate;
};

enum class ClosedForm { kVBar0, kVBar1, kVStar };

ValueHandle make_value_handle(const ClosedFormValue& cf, ClosedForm form);
ValueHandle zero_value_handle();

struct BellmanResult {
  double value = 0.0;
  Vector u_star;
  Vector v_star;
};

/// F V(x, Z) by grid search over u and v. Requires n = m = 1. Throws
/// unbounded-game when the inner objective keeps growing past the v range
/// (by more than 1% of the incumbent), which signals that γ is too small.
BellmanResult bellman_apply(const ValueHandle& value, const GameSpec& spec,
                            const Eigen::Ref<const Vector>& x,
                            const InfoMatrix& z, const SearchGrid& grid);

struct InnerMax {
  double value = 0.0;
  double v = 0.0;
};

/// |x|²_Q + |u|²_R + max_v V(v, Z + ζζᵀ) for fixed u, by grid search.
InnerMax bellman_inner_max(const ValueHandle& value, const GameSpec& spec,
                           double x, const Eigen::Matrix2d& z, double u,
                           const SearchGrid& grid);

/// The same quantity for V = V̄₀ with v eliminated analytically (any n):
///   |x|²_Q + |u|²_R + max_i { |iAx + Bu|²_S − γ²‖[I iA]ᵀ‖²_Z }.
double bellman_inner_max_v_bar0(const ClosedFormValue& cf,
                                const Eigen::Ref<const Vector>& x,
                                const InfoMatrix& z,
                                const Eigen::Ref<const Vector>& u);

struct ScalarState {
  double x = 0.0;
  Eigen::Matrix2d z = Eigen::Matrix2d::Zero();
};

/// max over states of |F V̄₁ − V̄₁| / max(1, |V̄₁|). Zero at every state when
/// condition (ii) holds, up to grid error; no certification is done here so
/// the converse direction can be probed too.
double fixed_point_residual(const ClosedFormValue& cf, const SearchGrid& grid,
                            std::span<const ScalarState> states);

/// Value-iteration iterates V_k, k = 0..k_max, for a scalar game.
///
/// V_k is stored through two exact reductions: the diagonal of Z enters only
/// as the additive term −γ²(z_vv + A²z_xx), and the remainder W_k(x, z_vx)
/// is homogeneous (W(αx, α²z) = α²W(x, z)) and even in both arguments. So
/// W_k(x, z) = (x² + |z|)·h_k(s) with s = |z|/(x² + |z|) ∈ [0, 1], and h_k is
/// tabulated on a uniform s grid with linear interpolation.
class ValueIterationTrace {
 public:
  ValueIterationTrace(double gamma_sq, double a, int nodes);

  int iterations() const { return static_cast<int>(h_.size()) - 1; }
  int nodes() const { return nodes_; }

  /// V_k(x, Z).
  double value(int k, double x, const Eigen::Matrix2d& z) const;
  /// V_k(x, 0).
  double value_at_zero_info(int k, double x) const;
  /// W_k(x, z_vx), the diagonal-free part.
  double reduced(int k, double x, double z_vx) const;

  const std::vector<double>& table(int k) const { return h_.at(k); }
  void push(std::vector<double> table);

 private:
  double gamma_sq_;
  double a_;
  int nodes_;
  std::vector<std::vector<double>> h_;
};

/// Runs value iteration from V₀(x, Z) = −γ² min_i ‖[I iA]ᵀ‖²_Z. Throws
/// unbounded-game if an iterate exceeds 1e6 on the normalized grid.
ValueIterationTrace value_iteration_trace(const GameSpec& spec, int k_max,
                                          const SearchGrid& grid,
                                          int nodes = 1001);

/// V_k(x0, 0) for k = 0..k_max.
std::vector<double> value_iteration(const GameSpec& spec, double x0, int k_max,
                                    const SearchGrid& grid);

struct CdmReport {
  bool feasible = false;
  double margin_plus = 0.0;
  double margin_minus = 0.0;
};

/// PSD margins of 2I + M⁻¹ + M − (I ± DC⁻¹)(I + M)(I ± DC⁻¹)ᵀ.
/// Requires invertible C and M ≻ 0.
CdmReport cdm_check_ii(const Eigen::Ref<const Matrix>& c,
                       const Eigen::Ref<const Matrix>& d,
                       const SymmetricMatrix& m);

struct CdmWitness {
  Vector x;
  double c = 0.0;
  double theta = 0.0;
  /// Amount by which the interior θ beats both endpoints.
  double excess = 0.0;
};

struct CdmBruteForceReport {
  bool holds = true;
  std::optional<CdmWitness> witness;
};

/// Direct test of the endpoint property: for sampled (x, c), is
///   max_{θ∈[-1,1]} |θCx + Dx|²_{(I+θ²M)⁻¹} + θc
/// attained at θ = ±1? Uses a θ grid of step 1e-3 refined by golden section;
/// an interior point beating both endpoints by more than 1e-8 is a witness.
///
/// Random x alone misses thin failure regions, so x is also taken from
/// directed candidates: for θ on a grid (denser towards ±1), the top
/// eigenvector of the quadratic form f(θ) − chord(θ), where chord is the
/// straight line through the endpoint values. Those candidates and half the
/// `trials` random draws use the endpoint-equalizing offset
/// c = −2xᵀCᵀ(I+M)⁻¹Dx; the other half use a random c.
CdmBruteForceReport cdm_check_i_bruteforce(const Eigen::Ref<const Matrix>& c,
                                           const Eigen::Ref<const Matrix>& d,
                                           const SymmetricMatrix& m,
                                           int trials, std::uint64_t seed = 0);

/// Max entrywise deviation across the identities relating the scaled
/// (C, D, M) certificate to the (P, T, BKA⁻¹) form, with
/// H = (γ²I − T)^{1/2}, M = H⁻¹(T − P)H⁻¹, C = H⁻¹A, D = H⁻¹BK.
/// Requires 0 ≺ P ≺ T ≺ γ²I (strict) and invertible A.
double appendix_identity_check(const SymmetricMatrix& p,
                               const SymmetricMatrix& t, double gamma,
                               const Eigen::Ref<const Matrix>& k,
                               const Eigen::Ref<const Matrix>& a,
                               const Eigen::Ref<const Matrix>& b);

}  // namespace mac
