#pragma once

// Run configuration for macctl, loaded from a single JSON document:
//
//   {
//     "system":     {"A": [[1]], "B": [[1]], "Q": [[1]], "R": [[1]]},
//     "gamma":      2.5232,
//     "solver":     {"tol": 1e-12, "max_iter": 100000},
//     "simulation": {"x0": [1], "sign": 1, "horizon": 50,
//                    "adversary": {"kind": "random_bounded", "seed": 7,
//                                  "bound": 2.0}},
//     "output":     {"directory": "macctl-out", "format": "csv"}
//   }
//
// Every section is optional and defaults to the scalar A = B = Q = R = 1
// game; keys that are not listed above are rejected.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mac/game_sim.h"
#include "mac/riccati.h"

namespace mac::cli {

enum class OutputFormat { kCsv, kJson };

OutputFormat output_format_from_string(std::string_view name);
std::string_view to_string(OutputFormat format);

struct SimulationConfig {
  Vector x0 = Vector::Ones(1);
  int sign = 1;
  AdversaryPolicy adversary = AdversaryPolicy::zero();
  int horizon = 50;
};

struct RunConfig {
  Matrix a = Matrix::Ones(1, 1);
  Matrix b = Matrix::Ones(1, 1);
  Matrix q = Matrix::Ones(1, 1);
  Matrix r = Matrix::Ones(1, 1);
  double gamma = 2.5232;
  RiccatiOptions solver;
  SimulationConfig simulation;
  std::filesystem::path output_directory = "macctl-out";
  OutputFormat format = OutputFormat::kCsv;

  /// Validated game data; throws invalid-argument on bad shapes or values.
  GameSpec game_spec() const;
  /// Cross-field checks (x0 and constant disturbance sizes, sign, horizon).
  void validate() const;
};

/// Parses and validates. Throws invalid-argument naming the offending key.
RunConfig parse_run_config(const nlohmann::json& doc);
/// Reads `path`; I/O failures are reported as io errors with the path.
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json to_json(const RunConfig& config);

}  // namespace mac::cli
