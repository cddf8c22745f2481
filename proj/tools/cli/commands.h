#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "cli/config.h"
#include "cli/report.h"
#include "mac/riccati.h"

namespace mac::cli {

/// Flag overrides applied on top of the loaded config.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<OutputFormat> format;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> gamma;
  std::optional<int> horizon;
};

RunConfig apply_overrides(RunConfig config, const Overrides& overrides);

/// P, S, T, K, certificate margins and the three-level verdict.
Report cmd_solve(const RunConfig& config);

/// Smallest γ satisfying `criterion`, plus a feasibility sweep over the
/// bracket written as gamma_sweep.{csv,json}.
Report cmd_gamma(const RunConfig& config, GammaCriterion criterion,
                 GammaBracket bracket, int sweep_points = 64);

/// The scalar A = B = Q = R = 1 walkthrough with its golden numbers. Uses
/// the config's γ and solver tolerance; the config's system is ignored.
Report cmd_example1(const RunConfig& config);

/// (z, V*(1, Z(z))) with Z(z) = [[|z|, z], [z, |z|]], written as
/// figure1.{csv,json}. Requires a scalar system and steps ≥ 2.
Report cmd_figure1(const RunConfig& config, double z_min, double z_max,
                   int steps);

/// Closed-loop run from the config's simulation section. Refuses infeasible
/// γ; writes trajectory.{csv,json} and checks the dissipation bound.
Report cmd_simulate(const RunConfig& config);

enum class Suite { kBellman, kLemmas, kIdentities, kAll };

Suite suite_from_string(std::string_view name);

/// Verification batteries. Sampling uses the adversary seed from the config
/// (overridable with --seed).
Report cmd_verify(const RunConfig& config, Suite suite);

/// Writes <out>/<command>.json.
std::filesystem::path write_report(const Report& report, const RunConfig& config);

}  // namespace mac::cli
