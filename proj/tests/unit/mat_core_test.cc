#include "mac/mat_core.h"

#include <cmath>

#include <gtest/gtest.h>

#include "mac/errors.h"
#include "mac/rng.h"

namespace mac {
namespace {

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1, 1);
  return m;
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kIo;
}

TEST(SymmetricMatrix, AveragesAsymmetricInput) {
  Matrix m(2, 2);
  m << 1, 2, 4, 3;
  SymmetricMatrix s(m);
  EXPECT_DOUBLE_EQ(s(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(s(1, 0), 3.0);
  EXPECT_DOUBLE_EQ(s.max_abs(), 3.0);
}

TEST(SymmetricMatrix, RejectsNonSquareAndNonFinite) {
  EXPECT_EQ(kind_of([] { SymmetricMatrix(Matrix::Zero(2, 3)); }),
            ErrorKind::kInvalidArgument);
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = NAN;
  EXPECT_EQ(kind_of([&] { SymmetricMatrix{m}; }), ErrorKind::kInvalidArgument);
}

TEST(SymmetricMatrix, Arithmetic) {
  auto a = SymmetricMatrix::identity(2);
  auto b = SymmetricMatrix::scalar(3.0);
  EXPECT_EQ(b.dim(), 1);
  auto c = 2.0 * a - SymmetricMatrix::identity(2);
  EXPECT_TRUE(c.matrix().isApprox(Matrix::Identity(2, 2)));
  EXPECT_EQ((a + SymmetricMatrix::zero(2)).matrix(), a.matrix());
}

TEST(QuadForm, HandValues) {
  Matrix m(2, 2);
  m << 2, 1, 1, 3;
  Vector x(2);
  x << 1, -1;
  // 2 - 2 + 3
  EXPECT_DOUBLE_EQ(quad_form(x, SymmetricMatrix(m)), 3.0);
  EXPECT_DOUBLE_EQ(quad_form(Vector::Zero(2), SymmetricMatrix(m)), 0.0);
}

TEST(WeightedNormSq, MatchesColumnSumOfQuadForms) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix g = random_matrix(rng, 3, 3);
    SymmetricMatrix a(g * g.transpose());
    Matrix b = random_matrix(rng, 3, 2);
    double expected = 0;
    for (int j = 0; j < 2; ++j) expected += quad_form(b.col(j), a);
    EXPECT_NEAR(weighted_norm_sq(b, a), expected, 1e-12);
  }
}

TEST(TraceInner, ElementwiseSumAndShapeCheck) {
  Matrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 5, 6, 7, 8;
  EXPECT_DOUBLE_EQ(trace_inner(a, b), 70.0);
  EXPECT_DOUBLE_EQ(trace_inner(a, b), (a.transpose() * b).trace());
  EXPECT_EQ(kind_of([&] { trace_inner(a, Matrix::Zero(2, 3)); }),
            ErrorKind::kInvalidArgument);
}

TEST(Sat, ClipsAndRejectsNonFinite) {
  EXPECT_DOUBLE_EQ(sat(0.3), 0.3);
  EXPECT_DOUBLE_EQ(sat(-3.934), -1.0);
  EXPECT_DOUBLE_EQ(sat(1.0), 1.0);
  EXPECT_DOUBLE_EQ(sat(7.0), 1.0);
  EXPECT_EQ(kind_of([] { sat(NAN); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { sat(INFINITY); }), ErrorKind::kInvalidArgument);
}

TEST(PsdMargin, SmallestEigenvalue) {
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  EXPECT_NEAR(psd_margin(SymmetricMatrix(m)), 1.0, 1e-14);
  m << 1, 2, 2, 1;
  EXPECT_NEAR(psd_margin(SymmetricMatrix(m)), -1.0, 1e-14);
  EXPECT_NEAR(default_psd_tolerance(SymmetricMatrix(m)), 1e-9 * 2 * 2, 1e-20);
}

TEST(SymInverse, RoundTripAndSingular) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix g = random_matrix(rng, 3, 3);
    SymmetricMatrix a(g * g.transpose() + Matrix::Identity(3, 3));
    EXPECT_TRUE((sym_inverse(a).matrix() * a.matrix())
                    .isApprox(Matrix::Identity(3, 3), 1e-10));
  }
  Matrix s(2, 2);
  s << 1, 1, 1, 1;
  try {
    sym_inverse(SymmetricMatrix(s));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSingularMatrix);
    EXPECT_LT(e.value(), 1e-12);
  }
}

TEST(SymSqrt, SquaresBack) {
  Rng rng(11);
  Matrix g = random_matrix(rng, 3, 3);
  SymmetricMatrix a(g * g.transpose());
  auto r = sym_sqrt(a);
  EXPECT_TRUE((r.matrix() * r.matrix()).isApprox(a.matrix(), 1e-10));
  EXPECT_EQ(kind_of([] { sym_sqrt(SymmetricMatrix::scalar(-1.0)); }),
            ErrorKind::kInvalidArgument);
}

TEST(Congruence, MatchesDirectProduct) {
  Rng rng(5);
  Matrix m = random_matrix(rng, 3, 2);
  Matrix g = random_matrix(rng, 3, 3);
  SymmetricMatrix a(g + g.transpose());
  EXPECT_TRUE(congruence(m, a).matrix().isApprox(m.transpose() * a.matrix() * m,
                                                 1e-14));
}

TEST(ErrorKinds, StableNames) {
  EXPECT_EQ(to_string(ErrorKind::kSingularMatrix), "singular-matrix");
  EXPECT_EQ(to_string(ErrorKind::kAmbiguousBracket), "ambiguous-bracket");
  Error e(ErrorKind::kDivergence, "boom");
  EXPECT_TRUE(std::isnan(e.value()));
  EXPECT_STREQ(e.what(), "boom");
}

}  // namespace
}  // namespace mac
