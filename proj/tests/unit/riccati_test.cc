#include "mac/riccati.h"

#include <cmath>

#include <gtest/gtest.h>

#include "mac/errors.h"

namespace mac {
namespace {

// Plain scalar recursion, written out independently of the library.
struct ScalarFixedPoint {
  double p, s, t, k;
};

ScalarFixedPoint scalar_oracle(double a, double b, double q, double r,
                               double gamma) {
  const double g2 = gamma * gamma;
  double p = 0;
  for (int it = 0; it < 200000; ++it) {
    const double s = p / (1 - p / g2);
    const double next = q + a * a * s - (a * s * b) * (a * s * b) / (r + b * b * s);
    if (std::abs(next - p) < 1e-15) {
      p = next;
      break;
    }
    p = next;
  }
  const double s = p / (1 - p / g2);
  return {p, s, q + a * a * s, b * s * a / (r + b * b * s)};
}

const RiccatiSolution& example1() {
  static const RiccatiSolution sol =
      solve_riccati_or_throw(GameSpec::scalar(1, 1, 1, 1, 2.5232));
  return sol;
}

TEST(GameSpec, Validation) {
  EXPECT_THROW(GameSpec::scalar(1, 1, 0, 1, 2), Error);
  EXPECT_THROW(GameSpec::scalar(1, 1, 1, -1, 2), Error);
  EXPECT_THROW(GameSpec::scalar(1, 1, 1, 1, 0), Error);
  EXPECT_THROW(GameSpec(Matrix::Identity(2, 2), Matrix::Ones(3, 1),
                        SymmetricMatrix::identity(2),
                        SymmetricMatrix::identity(1), 2.0),
               Error);
  auto spec = GameSpec::scalar(1, 1, 1, 1, 2);
  EXPECT_TRUE(spec.is_scalar());
  EXPECT_DOUBLE_EQ(spec.with_gamma(3).gamma_sq(), 9.0);
}

TEST(SolveRiccati, Example1Values) {
  const auto& sol = example1();
  EXPECT_NEAR(sol.P(0, 0), 1.6985, 1e-3);
  EXPECT_NEAR(sol.T(0, 0), 3.3165, 1e-3);
  EXPECT_NEAR(sol.K(0, 0), 0.6985, 1e-3);
  EXPECT_NEAR(sol.S(0, 0), 2.3165, 1e-3);
  const auto oracle = scalar_oracle(1, 1, 1, 1, 2.5232);
  EXPECT_NEAR(sol.P(0, 0), oracle.p, 1e-10);
  EXPECT_NEAR(sol.T(0, 0), oracle.t, 1e-10);
  EXPECT_NEAR(sol.K(0, 0), oracle.k, 1e-10);
  EXPECT_LT(sol.identity_deviation, 1e-9);
}

// T is built with the inverse-γ² shrink factor. With γ² in its place the
// same data would give T ≈ 0.83, which is below P and makes no sense.
TEST(SolveRiccati, ShrinkFactorUsesInverseGammaSquared) {
  const auto& sol = example1();
  EXPECT_NEAR(sol.T(0, 0), 3.3165, 1e-3);
  EXPECT_GT(std::abs(sol.T(0, 0) - 0.83), 1.0);
  EXPECT_GT(sol.T(0, 0), sol.P(0, 0));
}

TEST(SolveRiccati, ZeroDynamicsGivesQ) {
  auto sol = solve_riccati_or_throw(GameSpec::scalar(0, 1, 1, 1, 1.7));
  EXPECT_NEAR(sol.P(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(sol.T(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(sol.K(0, 0), 0.0, 1e-14);
}

TEST(SolveRiccati, LargeGammaApproachesLqr) {
  auto sol = solve_riccati_or_throw(GameSpec::scalar(1, 1, 1, 1, 1e6));
  // Plain LQR fixed point p = 1 + p − p²/(1 + p), iterated independently.
  double p = 0;
  for (int i = 0; i < 500; ++i) p = 1 + p - p * p / (1 + p);
  EXPECT_NEAR(sol.P(0, 0), p, 1e-6);
  EXPECT_NEAR(p, (1 + std::sqrt(5.0)) / 2, 1e-12);
}

TEST(SolveRiccati, MatchesScalarOracleAcrossGamma) {
  for (double g : {2.1, 2.2, 2.6, 3.0, 5.0}) {
    auto sol = solve_riccati_or_throw(GameSpec::scalar(1, 1, 1, 1, g));
    auto oracle = scalar_oracle(1, 1, 1, 1, g);
    EXPECT_NEAR(sol.P(0, 0), oracle.p, 1e-9) << g;
    EXPECT_NEAR(sol.T(0, 0), oracle.t, 1e-9) << g;
  }
}

TEST(SolveRiccati, DecoupledBlocksMatchScalar) {
  GameSpec spec(Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                SymmetricMatrix::identity(2), SymmetricMatrix::identity(2),
                2.5232);
  auto sol = solve_riccati_or_throw(spec);
  const auto& s = example1();
  EXPECT_TRUE(sol.K.isApprox(s.K(0, 0) * Matrix::Identity(2, 2), 1e-10));
  EXPECT_TRUE(sol.P.matrix().isApprox(s.P(0, 0) * Matrix::Identity(2, 2), 1e-10));
}

TEST(SolveRiccati, SmallGammaIsInfeasible) {
  auto result = solve_riccati(GameSpec::scalar(1, 1, 1, 1, 1.0));
  ASSERT_TRUE(std::holds_alternative<RiccatiInfeasible>(result));
  const auto& bad = std::get<RiccatiInfeasible>(result);
  EXPECT_LE(bad.margin, 0.0);
  EXPECT_FALSE(bad.violated_constraint.empty());
  try {
    solve_riccati_or_throw(GameSpec::scalar(1, 1, 1, 1, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasible);
  }
}

TEST(SolveRiccati, IterationCapRaisesNonConvergence) {
  try {
    solve_riccati(GameSpec::scalar(1, 1, 1, 1, 2.5232), {1e-12, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonConvergence);
    EXPECT_GT(e.value(), 0.0);
  }
}

TEST(GainK, Cases) {
  auto spec = GameSpec::scalar(1, 1, 1, 1, 2.5232);
  EXPECT_NEAR(gain_K(spec, SymmetricMatrix::scalar(2.3165))(0, 0), 0.6985, 1e-4);
  auto no_input = GameSpec::scalar(1, 0, 1, 1, 2.5232);
  EXPECT_EQ(gain_K(no_input, SymmetricMatrix::scalar(2.3165))(0, 0), 0.0);
}

TEST(SFromP, ScalarFormula) {
  auto s = s_from_p(SymmetricMatrix::scalar(1.6985), 2.5232);
  EXPECT_NEAR(s(0, 0), 1.6985 / (1 - 1.6985 / (2.5232 * 2.5232)), 1e-12);
  EXPECT_EQ(s_from_p(SymmetricMatrix::zero(2), 3.0).max_abs(), 0.0);
}

// Direct scalar evaluation of both sides of the certificate.
double scalar_margin(double gamma, int sign) {
  const auto o = scalar_oracle(1, 1, 1, 1, gamma);
  const double g2 = gamma * gamma;
  const double lhs = (g2 - o.p) * (g2 - o.p) / (o.t - o.p);
  const double f = 1 + sign * o.k;
  return lhs - f * f * (g2 - o.p);
}

TEST(ConditionII, Example1Marginal) {
  auto spec = GameSpec::scalar(1, 1, 1, 1, 2.5232);
  auto rep = check_condition_ii(spec, example1());
  EXPECT_TRUE(rep.feasible);
  EXPECT_LE(std::abs(rep.margin_plus), 1e-2);
  EXPECT_NEAR(rep.margin_plus, scalar_margin(2.5232, 1), 1e-9);
  EXPECT_NEAR(rep.margin_minus, scalar_margin(2.5232, -1), 1e-9);
}

TEST(ConditionII, LargerGammaHasPositiveMargin) {
  auto spec = GameSpec::scalar(1, 1, 1, 1, 3.0);
  auto rep = check_condition_ii(spec, solve_riccati_or_throw(spec));
  EXPECT_TRUE(rep.feasible);
  EXPECT_GT(rep.margin_plus, 1.0);
  EXPECT_NEAR(rep.margin_plus, scalar_margin(3.0, 1), 1e-9);
}

TEST(ConditionII, FailsAtGamma22) {
  auto spec = GameSpec::scalar(1, 1, 1, 1, 2.2);
  auto rep = check_condition_ii(spec, solve_riccati_or_throw(spec));
  EXPECT_FALSE(rep.feasible);
  EXPECT_LT(rep.margin_plus, 0.0);
  EXPECT_NEAR(rep.margin_plus, scalar_margin(2.2, 1), 1e-9);
}

TEST(ConditionII, SingularARejected) {
  auto spec = GameSpec::scalar(0, 1, 1, 1, 2.0);
  try {
    check_condition_ii(spec, solve_riccati_or_throw(spec));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
}

TEST(LowerBound, Cases) {
  auto spec = GameSpec::scalar(1, 1, 1, 1, 2.5232);
  auto rep = check_lower_bound(spec, example1());
  EXPECT_TRUE(rep.necessary_ok);
  EXPECT_NEAR(rep.margin, 6.3665 - 3.3165, 1e-3);

  // The crossing sits at γ ≈ 2.0198; 2.01 is within the ±1e-2 reading.
  auto near = GameSpec::scalar(1, 1, 1, 1, 2.01);
  EXPECT_LT(std::abs(check_lower_bound(near, solve_riccati_or_throw(near)).margin),
            0.1);
  auto above = GameSpec::scalar(1, 1, 1, 1, 2.02);
  EXPECT_TRUE(check_lower_bound(above, solve_riccati_or_throw(above)).necessary_ok);

  auto zero_a = GameSpec::scalar(0, 1, 1, 1, 1.01);
  EXPECT_TRUE(check_lower_bound(zero_a, solve_riccati_or_throw(zero_a)).necessary_ok);
}

TEST(AssessFeasibility, ThreeLevels) {
  EXPECT_EQ(assess_feasibility(GameSpec::scalar(1, 1, 1, 1, 2.5232)).verdict,
            Verdict::kCertified);
  EXPECT_EQ(assess_feasibility(GameSpec::scalar(1, 1, 1, 1, 2.2)).verdict,
            Verdict::kUndetermined);
  auto low = assess_feasibility(GameSpec::scalar(1, 1, 1, 1, 1.5));
  EXPECT_EQ(low.verdict, Verdict::kInfeasible);
  ASSERT_TRUE(low.lower_bound.has_value());
  EXPECT_NEAR(low.lower_bound->margin, 2.25 - low.solution->T(0, 0), 1e-12);
  EXPECT_EQ(assess_feasibility(GameSpec::scalar(1, 1, 1, 1, 1.0)).verdict,
            Verdict::kInfeasible);
  EXPECT_EQ(to_string(Verdict::kUndetermined), "undetermined");
}

TEST(GammaSearch, Example1CriticalValues) {
  const Matrix one = Matrix::Ones(1, 1);
  const auto id = SymmetricMatrix::identity(1);
  const double g2 =
      gamma_search(one, one, id, id, GammaCriterion::kConditionII, {});
  EXPECT_NEAR(g2, 2.5232, 1e-3);
  EXPECT_LT(scalar_margin(g2 - 1e-4, 1), 0.0);
  EXPECT_GE(scalar_margin(g2 + 1e-4, 1), 0.0);
  const double g1 =
      gamma_search(one, one, id, id, GammaCriterion::kLowerBound, {});
  EXPECT_NEAR(g1, 2.01, 1e-2);
}

TEST(GammaSearch, ZeroDynamics) {
  const auto id = SymmetricMatrix::identity(1);
  const double g = gamma_search(Matrix::Zero(1, 1), Matrix::Ones(1, 1), id, id,
                                GammaCriterion::kLowerBound, {0.5, 100});
  EXPECT_NEAR(g, 1.0, 1e-5);
}

TEST(GammaSearch, BadBracket) {
  const Matrix one = Matrix::Ones(1, 1);
  const auto id = SymmetricMatrix::identity(1);
  for (GammaBracket b : {GammaBracket{5, 2}, GammaBracket{3, 100}, GammaBracket{1, 2}}) {
    try {
      gamma_search(one, one, id, id, GammaCriterion::kConditionII, b);
      FAIL() << b.lo << " " << b.hi;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
    }
  }
}

}  // namespace
}  // namespace mac
