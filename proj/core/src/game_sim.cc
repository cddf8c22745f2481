#include "mac/game_sim.h"

#include <cmath>
#include <sstream>

#include "mac/errors.h"
#include "mac/rng.h"

namespace mac {

InfoState::InfoState(Eigen::Index states)
    : z_(SymmetricMatrix::zero(2 * states)),
      evidence_(Matrix::Zero(states, states)) {
  if (states <= 0) {
    throw Error(ErrorKind::kInvalidArgument, "InfoState needs n >= 1");
  }
}

InfoState update_info(const InfoState& info, const Eigen::Ref<const Vector>& x,
                      const Eigen::Ref<const Vector>& u,
                      const Eigen::Ref<const Vector>& x_next,
                      const Eigen::Ref<const Matrix>& b) {
  const Eigen::Index n = info.states();
  if (x.size() != n || x_next.size() != n || b.rows() != n ||
      b.cols() != u.size()) {
    throw Error(ErrorKind::kInvalidArgument, "update_info: dimension mismatch");
  }
  Vector zeta(2 * n);
  zeta << b * u - x_next, x;

  InfoState out = info;
  out.z_ = SymmetricMatrix(info.z_.matrix() + zeta * zeta.transpose());
  out.evidence_ = out.z_.matrix().topRightCorner(n, n);
  out.t_ = info.t_ + 1;
  return out;
}

double controller_ratio(const Eigen::Ref<const Vector>& x,
                        const InfoState& info, const GameSpec& spec,
                        const RiccatiSolution& sol) {
  const SymmetricMatrix t_minus_p = sol.T - sol.P;
  const double curvature = quad_form(x, t_minus_p);
  const double evidence =
      spec.gamma_sq() * trace_inner(spec.a(), info.evidence());
  if (curvature == 0.0) {
    if (evidence == 0.0) return 0.0;
    return evidence > 0.0 ? INFINITY : -INFINITY;
  }
  return evidence / curvature;
}

Vector controller_u(const Eigen::Ref<const Vector>& x, const InfoState& info,
                    const GameSpec& spec, const RiccatiSolution& sol) {
  if (x.size() != spec.states() || info.states() != spec.states()) {
    throw Error(ErrorKind::kInvalidArgument, "controller_u: dimension mismatch");
  }
  if (x.isZero(0.0)) return Vector::Zero(spec.inputs());
  const double ratio = controller_ratio(x, info, spec, sol);
  const double gain = std::isinf(ratio) ? (ratio > 0 ? 1.0 : -1.0) : sat(ratio);
  return gain * (sol.K * x);
}

Vector worst_case_v(const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& u, int sign,
                    const GameSpec& spec, const RiccatiSolution& sol) {
  if (x.size() != spec.states() || u.size() != spec.inputs()) {
    throw Error(ErrorKind::kInvalidArgument, "worst_case_v: dimension mismatch");
  }
  const Eigen::Index n = spec.states();
  const SymmetricMatrix shrink(Matrix::Identity(n, n) -
                               sol.P.matrix() / spec.gamma_sq());
  const double margin = psd_margin(shrink);
  if (!(margin > 0.0)) {
    throw Error(ErrorKind::kInfeasible,
                "worst-case disturbance needs P < gamma^2 I", margin);
  }
  const Vector drift = static_cast<double>(sign) * (spec.a() * x) + spec.b() * u;
  return shrink.matrix().ldlt().solve(drift);
}

AdversaryPolicy AdversaryPolicy::constant_disturbance(Vector w) {
  AdversaryPolicy p;
  p.kind = Kind::kConstant;
  p.constant = std::move(w);
  return p;
}

AdversaryPolicy AdversaryPolicy::random_bounded(double bound,
                                                std::uint64_t seed) {
  AdversaryPolicy p;
  p.kind = Kind::kRandomBounded;
  p.bound = bound;
  p.seed = seed;
  return p;
}

AdversaryPolicy AdversaryPolicy::worst_case(int sign) {
  AdversaryPolicy p;
  p.kind = Kind::kWorstCase;
  p.sign = sign;
  return p;
}

std::string_view to_string(AdversaryPolicy::Kind kind) {
  switch (kind) {
    case AdversaryPolicy::Kind::kZero: return "zero";
    case AdversaryPolicy::Kind::kConstant: return "constant";
    case AdversaryPolicy::Kind::kRandomBounded: return "random_bounded";
    case AdversaryPolicy::Kind::kWorstCase: return "worst_case";
  }
  return "unknown";
}

AdversaryPolicy::Kind adversary_kind_from_string(std::string_view name) {
  for (auto kind : {AdversaryPolicy::Kind::kZero, AdversaryPolicy::Kind::kConstant,
                    AdversaryPolicy::Kind::kRandomBounded,
                    AdversaryPolicy::Kind::kWorstCase}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "unknown adversary kind '" + std::string(name) + "'");
}

namespace {

void require_sign(int sign, const char* what) {
  if (sign != 1 && sign != -1) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(what) + " must be +1 or -1");
  }
}

Vector uniform_in_ball(Rng& rng, Eigen::Index n, double radius) {
  if (n == 1) return Vector::Constant(1, rng.uniform(-radius, radius));
  Vector dir(n);
  for (Eigen::Index i = 0; i < n; ++i) dir(i) = rng.normal();
  const double norm = dir.norm();
  if (norm == 0.0) return Vector::Zero(n);
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
  return dir * (r / norm);
}

}  // namespace

Trajectory simulate(const GameSpec& spec, const RiccatiSolution& sol,
                    const Eigen::Ref<const Vector>& x0, int sign,
                    const AdversaryPolicy& adversary, int horizon) {
  require_sign(sign, "plant sign");
  if (horizon < 1) {
    throw Error(ErrorKind::kInvalidArgument, "horizon must be >= 1");
  }
  const Eigen::Index n = spec.states();
  if (x0.size() != n) {
    throw Error(ErrorKind::kInvalidArgument, "x0 has wrong dimension");
  }
  if (adversary.kind == AdversaryPolicy::Kind::kConstant &&
      adversary.constant.size() != n) {
    throw Error(ErrorKind::kInvalidArgument,
                "constant disturbance has wrong dimension");
  }
  if (adversary.kind == AdversaryPolicy::Kind::kRandomBounded &&
      !(adversary.bound >= 0.0 && std::isfinite(adversary.bound))) {
    throw Error(ErrorKind::kInvalidArgument,
                "random_bounded needs a finite non-negative bound");
  }
  if (adversary.kind == AdversaryPolicy::Kind::kWorstCase) {
    require_sign(adversary.sign, "adversary sign");
  }

  Rng rng(adversary.seed);
  Trajectory traj;
  traj.sign = sign;
  traj.states.reserve(horizon + 1);
  traj.states.emplace_back(x0);

  InfoState info(n);
  double payoff = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const Vector& x = traj.states.back();
    const Vector u = controller_u(x, info, spec, sol);
    traj.saturation_args.push_back(controller_ratio(x, info, spec, sol));
    const Vector drift = static_cast<double>(sign) * (spec.a() * x) + spec.b() * u;

    Vector w;
    switch (adversary.kind) {
      case AdversaryPolicy::Kind::kZero:
        w = Vector::Zero(n);
        break;
      case AdversaryPolicy::Kind::kConstant:
        w = adversary.constant;
        break;
      case AdversaryPolicy::Kind::kRandomBounded:
        w = uniform_in_ball(rng, n, adversary.bound);
        break;
      case AdversaryPolicy::Kind::kWorstCase: {
        const Vector adversary_drift =
            static_cast<double>(adversary.sign) * (spec.a() * x) + spec.b() * u;
        w = worst_case_v(x, u, adversary.sign, spec, sol) - adversary_drift;
        break;
      }
    }

    Vector x_next = drift + w;
    if (!(x_next.cwiseAbs().maxCoeff() <= 1e9)) {
      std::ostringstream os;
      os << "state diverged at t=" << t + 1 << " (|x| = "
         << x_next.cwiseAbs().maxCoeff() << ")";
      throw Error(ErrorKind::kDivergence, os.str(), x_next.cwiseAbs().maxCoeff());
    }
    payoff += quad_form(x, spec.q()) + quad_form(u, spec.r()) -
              spec.gamma_sq() * w.squaredNorm();
    traj.running_payoff.push_back(payoff);
    info = update_info(info, x, u, x_next, spec.b());
    traj.inputs.push_back(u);
    traj.disturbances.push_back(std::move(w));
    traj.states.push_back(std::move(x_next));
  }
  return traj;
}

double reconstruction_residual(const Trajectory& traj, const GameSpec& spec) {
  double worst = 0.0;
  for (int t = 0; t < traj.horizon(); ++t) {
    const Vector predicted = static_cast<double>(traj.sign) *
                                 (spec.a() * traj.states[t]) +
                             spec.b() * traj.inputs[t] + traj.disturbances[t];
    worst = std::max(worst,
                     (traj.states[t + 1] - predicted).cwiseAbs().maxCoeff());
  }
  return worst;
}

DissipationReport dissipation_check(const Trajectory& traj,
                                    const ClosedFormValue& cf) {
  const Eigen::Index n = cf.spec().states();
  DissipationReport report;
  report.bound = v_star(cf, traj.states.front(), InfoMatrix::zero(n));
  report.worst_slack = -INFINITY;
  for (double prefix : traj.running_payoff) {
    report.worst_slack = std::max(report.worst_slack, prefix - report.bound);
  }
  report.ok = report.worst_slack <= 1e-6;
  return report;
}

}  // namespace mac
