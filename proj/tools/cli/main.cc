// macctl: synthesis, certification, simulation and verification for the
// sign-uncertain minimax adaptive control game.
//
// Prints the command's JSON report on stdout and saves it with any data
// artifacts under the output directory. Exit status: 0 when every assertion
// passed, 1 when one failed, 2 on errors (reported as a JSON error object).

#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.h"
#include "mac/errors.h"

namespace {

using mac::cli::Report;

int finish(const Report& report, const mac::cli::RunConfig& cfg) {
  mac::cli::write_report(report, cfg);
  std::cout << report.to_json().dump(2) << '\n';
  if (!report.all_passed()) {
    report.write_failures(std::cerr);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimax adaptive control of a sign-uncertain linear system"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  mac::cli::Overrides overrides;
  std::string format;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON run configuration")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--format", format, "Artifact format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", overrides.seed, "Random seed (adversary and sampling)");
  app.add_option("--tol", overrides.tol, "Riccati solver tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--gamma", overrides.gamma, "Override the attenuation level")
      ->check(CLI::PositiveNumber);
  app.add_option("--horizon", overrides.horizon, "Override the simulation horizon")
      ->check(CLI::PositiveNumber);

  auto* solve = app.add_subcommand("solve", "Solve the Riccati equation and classify gamma");

  auto* gamma = app.add_subcommand("gamma", "Search the critical gamma");
  std::string criterion = "condition_ii";
  mac::GammaBracket bracket;
  int sweep_points = 64;
  gamma->add_option("--criterion", criterion)
      ->check(CLI::IsMember({"condition_ii", "lower_bound"}));
  gamma->add_option("--lo", bracket.lo, "Bracket lower end");
  gamma->add_option("--hi", bracket.hi, "Bracket upper end");
  gamma->add_option("--sweep-points", sweep_points, "Points in the feasibility sweep");

  auto* example1 = app.add_subcommand("example1", "Reproduce the scalar example");

  auto* figure1 = app.add_subcommand("figure1", "Emit the value-function cut V*(1, Z(z))");
  double z_min = -0.5, z_max = 0.5;
  int steps = 101;
  figure1->add_option("--z-min", z_min);
  figure1->add_option("--z-max", z_max);
  figure1->add_option("--steps", steps);

  auto* simulate = app.add_subcommand("simulate", "Run the closed loop");

  auto* verify = app.add_subcommand("verify", "Run verification batteries");
  std::string suite = "all";
  verify->add_option("suite", suite, "bellman | lemmas | identities | all")
      ->check(CLI::IsMember({"bellman", "lemmas", "identities", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << mac::cli::error_json("usage", e.what()).dump(2) << '\n';
    return 2;
  }

  try {
    if (!format.empty()) overrides.format = mac::cli::output_format_from_string(format);
    if (!out_dir.empty()) overrides.out = out_dir;
    mac::cli::RunConfig cfg = config_path.empty()
                                  ? mac::cli::RunConfig{}
                                  : mac::cli::load_run_config(config_path);
    cfg = mac::cli::apply_overrides(std::move(cfg), overrides);

    if (*solve) return finish(mac::cli::cmd_solve(cfg), cfg);
    if (*gamma) {
      const auto c = criterion == "lower_bound" ? mac::GammaCriterion::kLowerBound
                                                : mac::GammaCriterion::kConditionII;
      return finish(mac::cli::cmd_gamma(cfg, c, bracket, sweep_points), cfg);
    }
    if (*example1) return finish(mac::cli::cmd_example1(cfg), cfg);
    if (*figure1) return finish(mac::cli::cmd_figure1(cfg, z_min, z_max, steps), cfg);
    if (*simulate) return finish(mac::cli::cmd_simulate(cfg), cfg);
    if (*verify) {
      return finish(mac::cli::cmd_verify(cfg, mac::cli::suite_from_string(suite)), cfg);
    }
  } catch (const mac::Error& e) {
    std::cout << mac::cli::error_json(e).dump(2) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cout << mac::cli::error_json("internal", e.what()).dump(2) << '\n';
    return 2;
  }
  return 2;
}
