#include "mac/bellman.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mac/errors.h"
#include "mac/rng.h"

namespace mac {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kRefinePoints = 10;  // per side, per round

struct Extremum {
  double arg = 0.0;
  double value = kNegInf;
};

// Grid maximization of f over [lo, hi] followed by `rounds` rounds of local
// re-gridding around each of the two best grid-local maxima. Each round
// shrinks the bracket by a factor of kRefinePoints.
template <class F>
Extremum grid_maximize(F&& f, double lo, double hi, int steps, int rounds) {
  const double h = (hi - lo) / (steps - 1);
  Extremum first;
  Extremum second;
  auto consider = [&](double arg, double value) {
    if (value > first.value) {
      second = first;
      first = {arg, value};
    } else if (value > second.value) {
      second = {arg, value};
    }
  };

  double prev = kNegInf;
  double cur = f(lo);
  for (int j = 0; j < steps; ++j) {
    const double next = j + 1 < steps ? f(lo + (j + 1) * h) : kNegInf;
    if (cur >= prev && cur > next) consider(lo + j * h, cur);
    prev = cur;
    cur = next;
  }
  if (first.value == kNegInf) {
    // NaN everywhere or a flat function whose last value compared unequal.
    first = {lo, f(lo)};
  }

  auto refine = [&](Extremum best) {
    double width = h;
    for (int r = 0; r < rounds; ++r) {
      const double sub = width / kRefinePoints;
      const double center = best.arg;
      for (int t = -kRefinePoints; t <= kRefinePoints; ++t) {
        if (t == 0) continue;
        const double arg = center + t * sub;
        if (arg < lo || arg > hi) continue;
        const double value = f(arg);
        if (value > best.value) best = {arg, value};
      }
      width = sub;
    }
    return best;
  };

  Extremum best = refine(first);
  if (second.value != kNegInf) {
    const Extremum other = refine(second);
    if (other.value > best.value) best = other;
  }
  return best;
}

template <class F>
Extremum grid_minimize(F&& f, double lo, double hi, int steps, int rounds) {
  Extremum e = grid_maximize([&](double t) { return -f(t); }, lo, hi, steps,
                             rounds);
  e.value = -e.value;
  return e;
}

Eigen::Matrix2d updated_info(const Eigen::Matrix2d& z, double zeta_v,
                             double x) {
  Eigen::Matrix2d out = z;
  out(0, 0) += zeta_v * zeta_v;
  out(0, 1) += zeta_v * x;
  out(1, 0) += zeta_v * x;
  out(1, 1) += x * x;
  return out;
}

double resolve_gain(const GameSpec& spec, const SearchGrid& grid) {
  if (grid.gain) return std::abs(*grid.gain);
  const RiccatiResult result = solve_riccati(spec);
  if (const auto* sol = std::get_if<RiccatiSolution>(&result)) {
    return std::abs(sol->K(0, 0));
  }
  return 1.0;
}

Interval default_u_range(double x, double gain) {
  const double half = 10.0 * std::abs(x) * gain + 1.0;
  return {-half, half};
}

Interval default_v_range(double x, double u) {
  const double half = 10.0 * (std::abs(x) + std::abs(u)) + 1.0;
  return {-half, half};
}

// max_v of `objective(v)` over the grid's v range, with the boundary-growth
// guard. `objective` excludes the stage cost.
template <class F>
Extremum guarded_inner_max(F&& objective, double x, double u,
                           const SearchGrid& grid) {
  const Interval range = grid.v_range.value_or(default_v_range(x, u));
  const Extremum best = grid_maximize(objective, range.lo, range.hi,
                                      grid.v_steps, grid.refine_rounds);
  const double width = range.hi - range.lo;
  const double beyond =
      std::max(objective(range.lo - width), objective(range.hi + width));
  if (beyond > best.value + 0.01 * std::max(1.0, std::abs(best.value))) {
    std::ostringstream os;
    os << "inner maximization over v is unbounded at x=" << x << ", u=" << u
       << " (value " << beyond << " beyond the search range vs " << best.value
       << " inside); try a larger gamma";
    throw Error(ErrorKind::kUnboundedGame, os.str(), beyond);
  }
  return best;
}

struct ScalarGame {
  double a, b, q, r, gamma_sq;
};

ScalarGame scalar_game(const GameSpec& spec) {
  if (!spec.is_scalar()) {
    throw Error(ErrorKind::kInvalidArgument,
                "grid Bellman evaluation needs a scalar system (n = m = 1)");
  }
  return {spec.a()(0, 0), spec.b()(0, 0), spec.q()(0, 0), spec.r()(0, 0),
          spec.gamma_sq()};
}

Extremum inner_max_impl(const ValueHandle& value, const ScalarGame& g,
                        double x, const Eigen::Matrix2d& z, double u,
                        const SearchGrid& grid) {
  auto objective = [&](double v) {
    return value.evaluate(v, updated_info(z, g.b * u - v, x));
  };
  Extremum e = guarded_inner_max(objective, x, u, grid);
  e.value += g.q * x * x + g.r * u * u;
  return e;
}

}  // namespace

void SearchGrid::validate() const {
  if (u_steps < 3 || v_steps < 3) {
    throw Error(ErrorKind::kInvalidArgument, "search grid needs >= 3 steps");
  }
  if (refine_rounds < 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "refine_rounds must be non-negative");
  }
  for (const auto& range : {u_range, v_range}) {
    if (range && !(std::isfinite(range->lo) && std::isfinite(range->hi) &&
                   range->lo < range->hi)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "search ranges must be finite and non-empty");
    }
  }
  if (gain && !std::isfinite(*gain)) {
    throw Error(ErrorKind::kInvalidArgument, "search gain must be finite");
  }
}

ValueHandle make_value_handle(const ClosedFormValue& cf, ClosedForm form) {
  const ScalarCoefficients c = cf.scalar();
  switch (form) {
    case ClosedForm::kVBar0:
      return {"v_bar0", [c](double x, const Eigen::Matrix2d& z) {
                return v_bar0(c, x, z);
              }};
    case ClosedForm::kVBar1:
      return {"v_bar1", [c](double x, const Eigen::Matrix2d& z) {
                return v_bar1(c, x, z);
              }};
    case ClosedForm::kVStar:
      return {"v_star", [c](double x, const Eigen::Matrix2d& z) {
                return v_star(c, x, z);
              }};
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown closed form");
}

ValueHandle zero_value_handle() {
  return {"zero", [](double, const Eigen::Matrix2d&) { return 0.0; }};
}

InnerMax bellman_inner_max(const ValueHandle& value, const GameSpec& spec,
                           double x, const Eigen::Matrix2d& z, double u,
                           const SearchGrid& grid) {
  grid.validate();
  const Extremum e = inner_max_impl(value, scalar_game(spec), x, z, u, grid);
  return {e.value, e.arg};
}

BellmanResult bellman_apply(const ValueHandle& value, const GameSpec& spec,
                            const Eigen::Ref<const Vector>& x,
                            const InfoMatrix& z, const SearchGrid& grid) {
  grid.validate();
  const ScalarGame g = scalar_game(spec);
  if (x.size() != 1 || z.states() != 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "bellman_apply: state and information matrix must be scalar");
  }
  const double xs = x(0);
  const Eigen::Matrix2d zs = z.z().matrix();
  const Interval u_range =
      grid.u_range.value_or(default_u_range(xs, resolve_gain(spec, grid)));

  const Extremum best = grid_minimize(
      [&](double u) { return inner_max_impl(value, g, xs, zs, u, grid).value; },
      u_range.lo, u_range.hi, grid.u_steps, grid.refine_rounds);
  const Extremum inner = inner_max_impl(value, g, xs, zs, best.arg, grid);

  BellmanResult out;
  out.value = best.value;
  out.u_star = Vector::Constant(1, best.arg);
  out.v_star = Vector::Constant(1, inner.arg);
  return out;
}

double bellman_inner_max_v_bar0(const ClosedFormValue& cf,
                                const Eigen::Ref<const Vector>& x,
                                const InfoMatrix& z,
                                const Eigen::Ref<const Vector>& u) {
  const GameSpec& spec = cf.spec();
  if (x.size() != spec.states() || u.size() != spec.inputs()) {
    throw Error(ErrorKind::kInvalidArgument,
                "bellman_inner_max_v_bar0: dimension mismatch");
  }
  const Vector bu = spec.b() * u;
  const Vector ax = spec.a() * x;
  double best = kNegInf;
  for (int sign : {-1, 1}) {
    const Vector c = sign * ax + bu;
    const double value = quad_form(c, cf.solution().S) -
                         spec.gamma_sq() * sign_penalty(spec.a(), z, sign);
    best = std::max(best, value);
  }
  return quad_form(x, spec.q()) + quad_form(u, spec.r()) + best;
}

double fixed_point_residual(const ClosedFormValue& cf, const SearchGrid& grid,
                            std::span<const ScalarState> states) {
  const ScalarCoefficients c = cf.scalar();
  const ValueHandle handle = make_value_handle(cf, ClosedForm::kVBar1);
  SearchGrid g = grid;
  if (!g.gain) g.gain = c.k;

  double worst = 0.0;
  for (const ScalarState& state : states) {
    const Vector x = Vector::Constant(1, state.x);
    const InfoMatrix z{SymmetricMatrix(state.z)};
    const double image = bellman_apply(handle, cf.spec(), x, z, g).value;
    const double reference = v_bar1(c, state.x, state.z);
    worst = std::max(worst, std::abs(image - reference) /
                                std::max(1.0, std::abs(reference)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Value iteration

ValueIterationTrace::ValueIterationTrace(double gamma_sq, double a, int nodes)
    : gamma_sq_(gamma_sq), a_(a), nodes_(nodes) {
  if (nodes_ < 2) {
    throw Error(ErrorKind::kInvalidArgument,
                "value iteration needs at least two nodes");
  }
}

void ValueIterationTrace::push(std::vector<double> table) {
  if (static_cast<int>(table.size()) != nodes_) {
    throw Error(ErrorKind::kInvalidArgument, "value table has wrong size");
  }
  h_.push_back(std::move(table));
}

double ValueIterationTrace::reduced(int k, double x, double z_vx) const {
  const std::vector<double>& h = h_.at(k);
  const double scale = x * x + std::abs(z_vx);
  if (scale == 0.0) return 0.0;
  const double pos = std::abs(z_vx) / scale * (nodes_ - 1);
  const int j = std::min(static_cast<int>(pos), nodes_ - 2);
  const double frac = pos - j;
  return scale * ((1.0 - frac) * h[j] + frac * h[j + 1]);
}

double ValueIterationTrace::value(int k, double x,
                                  const Eigen::Matrix2d& z) const {
  return reduced(k, x, z(0, 1)) - gamma_sq_ * (z(0, 0) + a_ * a_ * z(1, 1));
}

double ValueIterationTrace::value_at_zero_info(int k, double x) const {
  return reduced(k, x, 0.0);
}

ValueIterationTrace value_iteration_trace(const GameSpec& spec, int k_max,
                                          const SearchGrid& grid, int nodes) {
  grid.validate();
  if (k_max < 0) {
    throw Error(ErrorKind::kInvalidArgument, "k_max must be non-negative");
  }
  const ScalarGame g = scalar_game(spec);
  const double gain = resolve_gain(spec, grid);
  ValueIterationTrace trace(g.gamma_sq, g.a, nodes);

  std::vector<double> h0(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double s = static_cast<double>(j) / (nodes - 1);
    h0[j] = 2.0 * g.gamma_sq * std::abs(g.a) * s;
  }
  trace.push(std::move(h0));

  constexpr double kUnboundedLevel = 1e6;
  for (int k = 0; k < k_max; ++k) {
    std::vector<double> next(nodes);
    for (int j = 0; j < nodes; ++j) {
      const double z = static_cast<double>(j) / (nodes - 1);
      const double x = std::sqrt(1.0 - z);
      auto inner = [&](double u) {
        auto objective = [&](double v) {
          const double d = g.b * u - v;
          return trace.reduced(k, v, z + d * x) - g.gamma_sq * d * d;
        };
        return g.r * u * u + guarded_inner_max(objective, x, u, grid).value;
      };
      const Interval u_range =
          grid.u_range.value_or(default_u_range(x, gain));
      const Extremum best = grid_minimize(inner, u_range.lo, u_range.hi,
                                          grid.u_steps, grid.refine_rounds);
      next[j] = x * x * (g.q - g.gamma_sq * g.a * g.a) + best.value;
      if (!(std::abs(next[j]) <= kUnboundedLevel)) {
        std::ostringstream os;
        os << "value iterate " << k + 1 << " reached " << next[j]
           << "; the game has no finite value at this gamma";
        throw Error(ErrorKind::kUnboundedGame, os.str(), next[j]);
      }
    }
    trace.push(std::move(next));
  }
  return trace;
}

std::vector<double> value_iteration(const GameSpec& spec, double x0, int k_max,
                                    const SearchGrid& grid) {
  const ValueIterationTrace trace = value_iteration_trace(spec, k_max, grid);
  std::vector<double> out;
  out.reserve(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    out.push_back(trace.value_at_zero_info(k, x0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// θ-extremality lemma

namespace {

bool invertible(const Eigen::Ref<const Matrix>& c) {
  Eigen::JacobiSVD<Matrix> svd(c);
  const Vector& sv = svd.singularValues();
  return sv.size() > 0 && sv(sv.size() - 1) > 1e-12 * sv(0);
}

void require_cdm_inputs(const Eigen::Ref<const Matrix>& c,
                        const Eigen::Ref<const Matrix>& d,
                        const SymmetricMatrix& m) {
  const Eigen::Index n = c.rows();
  require_shape(c, n, n, "C");
  require_shape(d, n, n, "D");
  require_shape(m.matrix(), n, n, "M");
  if (!invertible(c)) {
    throw Error(ErrorKind::kInvalidArgument, "C must be invertible");
  }
  if (!(psd_margin(m) > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "M must be positive definite",
                psd_margin(m));
  }
}

}  // namespace

CdmReport cdm_check_ii(const Eigen::Ref<const Matrix>& c,
                       const Eigen::Ref<const Matrix>& d,
                       const SymmetricMatrix& m) {
  require_cdm_inputs(c, d, m);
  const Eigen::Index n = c.rows();
  const Matrix identity = Matrix::Identity(n, n);
  const Matrix e = c.transpose().fullPivLu().solve(d.transpose()).transpose();
  const SymmetricMatrix base =
      SymmetricMatrix::identity(n) * 2.0 + sym_inverse(m) + m;
  const SymmetricMatrix weight = SymmetricMatrix::identity(n) + m;

  CdmReport report;
  report.margin_plus =
      psd_margin(base - congruence((identity + e).transpose(), weight));
  report.margin_minus =
      psd_margin(base - congruence((identity - e).transpose(), weight));
  const double tol = default_psd_tolerance(base);
  report.feasible =
      report.margin_plus >= -tol && report.margin_minus >= -tol;
  return report;
}

CdmBruteForceReport cdm_check_i_bruteforce(const Eigen::Ref<const Matrix>& c,
                                           const Eigen::Ref<const Matrix>& d,
                                           const SymmetricMatrix& m,
                                           int trials, std::uint64_t seed) {
  require_cdm_inputs(c, d, m);
  const Eigen::Index n = c.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix());
  const Vector lambda = es.eigenvalues();
  const Matrix& basis = es.eigenvectors();

  constexpr int kThetaSteps = 2001;  // step 1e-3 on [-1, 1]
  constexpr double kExcessThreshold = 1e-8;
  constexpr double kGolden = 0.6180339887498949;
  const double h = 2.0 / (kThetaSteps - 1);

  // Largest interior gain of θ ↦ |θCx + Dx|²_{(I+θ²M)⁻¹} + θc over the
  // better endpoint, for one (x, c).
  auto probe = [&](const Vector& x, std::optional<double> given_offset) {
    // In the eigenbasis of M, |θCx + Dx|²_{(I+θ²M)⁻¹} = Σ (θaⱼ + bⱼ)²/(1 + θ²λⱼ).
    const Vector pa = basis.transpose() * (c * x);
    const Vector pb = basis.transpose() * (d * x);
    auto f = [&](double theta) {
      double total = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double num = theta * pa(j) + pb(j);
        total += num * num / (1.0 + theta * theta * lambda(j));
      }
      return total;
    };
    double offset;
    if (given_offset) {
      offset = *given_offset * (f(1.0) + f(-1.0) + 1e-12);
    } else {
      // c = −2xᵀCᵀ(I+M)⁻¹Dx equalizes the endpoints of the upper envelope.
      double cross = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        cross += pa(j) * pb(j) / (1.0 + lambda(j));
      }
      offset = -2.0 * cross;
    }
    auto phi = [&](double theta) { return f(theta) + theta * offset; };

    const double endpoints = std::max(phi(-1.0), phi(1.0));
    int best_j = 1;
    double best_value = kNegInf;
    for (int j = 1; j < kThetaSteps - 1; ++j) {
      const double value = phi(-1.0 + j * h);
      if (value > best_value) {
        best_value = value;
        best_j = j;
      }
    }

    double lo = -1.0 + (best_j - 1) * h;
    double hi = -1.0 + (best_j + 1) * h;
    double t1 = hi - kGolden * (hi - lo);
    double t2 = lo + kGolden * (hi - lo);
    double f1 = phi(t1);
    double f2 = phi(t2);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        lo = t1;
        t1 = t2;
        f1 = f2;
        t2 = lo + kGolden * (hi - lo);
        f2 = phi(t2);
      } else {
        hi = t2;
        t2 = t1;
        f2 = f1;
        t1 = hi - kGolden * (hi - lo);
        f1 = phi(t1);
      }
    }
    double theta = 0.5 * (lo + hi);
    double value = phi(theta);
    if (best_value > value) {
      theta = -1.0 + best_j * h;
      value = best_value;
    }
    return CdmWitness{x, offset, theta, value - endpoints};
  };

  // Directed candidates: for fixed θ, f(θ) minus its chord through the
  // endpoints is a quadratic form in x, so its top eigenvector is the x most
  // likely to put the maximum in the interior. Probed before the random draws.
  std::vector<Vector> candidates;
  {
    const Matrix identity = Matrix::Identity(n, n);
    const Matrix w = (identity + m.matrix()).inverse();
    const Matrix chord_const = c.transpose() * w * c + d.transpose() * w * d;
    const Matrix chord_lin = c.transpose() * w * d + d.transpose() * w * c;
    std::vector<double> thetas;
    for (int j = 1; j < 200; ++j) thetas.push_back(-1.0 + 0.01 * j);
    for (double delta = 1e-2; delta > 1e-9; delta *= 0.1) {
      thetas.push_back(-1.0 + delta);
      thetas.push_back(1.0 - delta);
    }
    for (double theta : thetas) {
      const Matrix e = theta * c + d;
      const Matrix gap =
          e.transpose() *
              (identity + theta * theta * m.matrix()).ldlt().solve(e) -
          chord_const - theta * chord_lin;
      Eigen::SelfAdjointEigenSolver<Matrix> ge(0.5 * (gap + gap.transpose()));
      if (ge.eigenvalues()(n - 1) > 0.0) candidates.push_back(ge.eigenvectors().col(n - 1));
    }
  }

  CdmBruteForceReport report;
  auto record = [&](const CdmWitness& w) {
    if (w.excess > kExcessThreshold && std::abs(w.theta) < 1.0) {
      report.holds = false;
      report.witness = w;
      return true;
    }
    return false;
  };
  for (const Vector& x : candidates) {
    if (record(probe(x, std::nullopt))) return report;
  }

  Rng rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.normal();
    x.normalize();
    // Half the trials use the endpoint-equalizing offset, half a random one.
    std::optional<double> offset;
    if (trial % 2 == 1) offset = rng.normal();
    if (record(probe(x, offset))) return report;
  }
  return report;
}

double appendix_identity_check(const SymmetricMatrix& p,
                               const SymmetricMatrix& t, double gamma,
                               const Eigen::Ref<const Matrix>& k,
                               const Eigen::Ref<const Matrix>& a,
                               const Eigen::Ref<const Matrix>& b) {
  const Eigen::Index n = p.dim();
  require_shape(t.matrix(), n, n, "T");
  require_shape(a, n, n, "A");
  if (b.rows() != n || k.rows() != b.cols() || k.cols() != n) {
    throw Error(ErrorKind::kInvalidArgument,
                "appendix_identity_check: B must be n x m and K m x n");
  }
  if (!(std::isfinite(gamma) && gamma > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "gamma must be positive");
  }
  const SymmetricMatrix g2 = SymmetricMatrix::identity(n) * (gamma * gamma);
  const SymmetricMatrix t_minus_p = t - p;
  const SymmetricMatrix slack = g2 - t;
  auto strictly_positive = [](const SymmetricMatrix& s) {
    return psd_margin(s) > std::max(default_psd_tolerance(s), 1e-300);
  };
  if (!strictly_positive(p) || !strictly_positive(t_minus_p) ||
      !strictly_positive(slack)) {
    throw Error(ErrorKind::kInvalidArgument,
                "appendix identities need 0 < P < T < gamma^2 I");
  }
  if (!invertible(a)) {
    throw Error(ErrorKind::kInvalidArgument, "A must be invertible");
  }

  const Matrix identity = Matrix::Identity(n, n);
  const Matrix h = sym_sqrt(slack).matrix();
  const Matrix h_inv = sym_inverse(SymmetricMatrix(h)).matrix();
  const SymmetricMatrix m(h_inv * t_minus_p.matrix() * h_inv);
  const Matrix m_inv = sym_inverse(m).matrix();
  const Matrix c = h_inv * a;
  const Matrix d = h_inv * b * k;
  const Matrix dc_inv = d * c.inverse();
  const Matrix bka_inv = b * k * a.inverse();
  const Matrix gap = g2.matrix() - p.matrix();
  const Matrix tp_inv = sym_inverse(t_minus_p).matrix();
  const Matrix i_plus_m = identity + m.matrix();
  const Matrix certificate = gap * tp_inv * gap;

  double worst = 0.0;
  auto track = [&](const Matrix& lhs, const Matrix& rhs) {
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  };
  track(h * i_plus_m * h, gap);
  track(h * (identity + m_inv) * h, slack.matrix() * tp_inv * gap);
  track(h * (2.0 * identity + m.matrix() + m_inv) * h, certificate);
  for (double sign : {1.0, -1.0}) {
    const Matrix scaled = identity + sign * dc_inv;
    const Matrix direct = identity + sign * bka_inv;
    track(h * scaled * h_inv, direct);
    const Matrix mdc = 2.0 * identity + m_inv + m.matrix() -
                       scaled * i_plus_m * scaled.transpose();
    track(h * mdc * h, certificate - direct * gap * direct.transpose());
  }
  return worst;
}

}  // namespace mac
