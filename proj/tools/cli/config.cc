#include "cli/config.h"

#include <cmath>
#include <fstream>
#include <set>

#include "mac/errors.h"

namespace mac::cli {

using nlohmann::json;

OutputFormat output_format_from_string(std::string_view name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw Error(ErrorKind::kInvalidArgument,
              "format must be csv or json, got '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::kCsv ? "csv" : "json";
}

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::kInvalidArgument, where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!keys.count(key)) bad(where, "unknown key '" + key + "'");
  }
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) bad(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(where, "expected a finite number");
  return x;
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad(where, "expected an integer");
  return v.get<int>();
}

Matrix matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) bad(where, "expected a non-empty array of rows");
  const std::size_t cols = v.front().is_array() ? v.front().size() : 0;
  if (cols == 0) bad(where, "rows must be non-empty arrays");
  Matrix m(v.size(), cols);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) bad(where, "ragged rows");
    for (std::size_t j = 0; j < cols; ++j) {
      m(i, j) = number(v[i][j], where + "[" + std::to_string(i) + "][" +
                                    std::to_string(j) + "]");
    }
  }
  return m;
}

Vector vector(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) bad(where, "expected a non-empty array");
  Vector x(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    x(i) = number(v[i], where + "[" + std::to_string(i) + "]");
  }
  return x;
}

}  // namespace

GameSpec RunConfig::game_spec() const {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) bad("system.A", "must be square");
  if (b.rows() != n) bad("system.B", "must have as many rows as A");
  if (q.rows() != n || q.cols() != n) bad("system.Q", "must match A");
  if (r.rows() != b.cols() || r.cols() != b.cols()) {
    bad("system.R", "must be m x m with m the column count of B");
  }
  if (!(q - q.transpose()).isZero(1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()))) {
    bad("system.Q", "must be symmetric");
  }
  if (!(r - r.transpose()).isZero(1e-12 * std::max(1.0, r.cwiseAbs().maxCoeff()))) {
    bad("system.R", "must be symmetric");
  }
  return GameSpec(a, b, SymmetricMatrix(q), SymmetricMatrix(r), gamma);
}

void RunConfig::validate() const {
  const GameSpec spec = game_spec();
  if (!(solver.tol > 0.0)) bad("solver.tol", "must be positive");
  if (solver.max_iter < 1) bad("solver.max_iter", "must be >= 1");
  if (simulation.x0.size() != spec.states()) {
    bad("simulation.x0", "length must equal the state dimension");
  }
  if (simulation.sign != 1 && simulation.sign != -1) {
    bad("simulation.sign", "must be 1 or -1");
  }
  if (simulation.horizon < 1) bad("simulation.horizon", "must be >= 1");
  const auto& adv = simulation.adversary;
  if (adv.kind == AdversaryPolicy::Kind::kConstant &&
      adv.constant.size() != spec.states()) {
    bad("simulation.adversary.constant", "length must equal the state dimension");
  }
  if (adv.kind == AdversaryPolicy::Kind::kRandomBounded && !(adv.bound >= 0.0)) {
    bad("simulation.adversary.bound", "must be non-negative");
  }
  if (adv.sign != 1 && adv.sign != -1) {
    bad("simulation.adversary.sign", "must be 1 or -1");
  }
}

RunConfig parse_run_config(const json& doc) {
  RunConfig cfg;
  reject_unknown(doc, "config", {"system", "gamma", "solver", "simulation", "output"});

  if (doc.contains("system")) {
    const auto& sys = doc["system"];
    reject_unknown(sys, "system", {"A", "B", "Q", "R"});
    for (const char* key : {"A", "B", "Q", "R"}) {
      if (!sys.contains(key)) bad("system", std::string("missing key '") + key + "'");
    }
    cfg.a = matrix(sys["A"], "system.A");
    cfg.b = matrix(sys["B"], "system.B");
    cfg.q = matrix(sys["Q"], "system.Q");
    cfg.r = matrix(sys["R"], "system.R");
  }
  if (doc.contains("gamma")) cfg.gamma = number(doc["gamma"], "gamma");

  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    reject_unknown(s, "solver", {"tol", "max_iter"});
    if (s.contains("tol")) cfg.solver.tol = number(s["tol"], "solver.tol");
    if (s.contains("max_iter")) {
      cfg.solver.max_iter = integer(s["max_iter"], "solver.max_iter");
    }
  }

  if (doc.contains("simulation")) {
    const auto& s = doc["simulation"];
    reject_unknown(s, "simulation", {"x0", "sign", "adversary", "horizon"});
    if (s.contains("x0")) cfg.simulation.x0 = vector(s["x0"], "simulation.x0");
    if (s.contains("sign")) cfg.simulation.sign = integer(s["sign"], "simulation.sign");
    if (s.contains("horizon")) {
      cfg.simulation.horizon = integer(s["horizon"], "simulation.horizon");
    }
    if (s.contains("adversary")) {
      const auto& a = s["adversary"];
      const std::string where = "simulation.adversary";
      reject_unknown(a, where, {"kind", "seed", "bound", "constant", "sign"});
      auto& adv = cfg.simulation.adversary;
      if (a.contains("kind")) {
        if (!a["kind"].is_string()) bad(where + ".kind", "expected a string");
        adv.kind = adversary_kind_from_string(a["kind"].get<std::string>());
      }
      if (a.contains("seed")) {
        if (!a["seed"].is_number_unsigned()) {
          bad(where + ".seed", "expected a non-negative integer");
        }
        adv.seed = a["seed"].get<std::uint64_t>();
      }
      if (a.contains("bound")) adv.bound = number(a["bound"], where + ".bound");
      if (a.contains("constant")) adv.constant = vector(a["constant"], where + ".constant");
      if (a.contains("sign")) adv.sign = integer(a["sign"], where + ".sign");
    }
  }

  if (doc.contains("output")) {
    const auto& o = doc["output"];
    reject_unknown(o, "output", {"directory", "format"});
    if (o.contains("directory")) {
      if (!o["directory"].is_string()) bad("output.directory", "expected a string");
      cfg.output_directory = o["directory"].get<std::string>();
    }
    if (o.contains("format")) {
      if (!o["format"].is_string()) bad("output.format", "expected a string");
      cfg.format = output_format_from_string(o["format"].get<std::string>());
    }
  }

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot open config file '" + path.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kInvalidArgument,
                "config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const RunConfig& cfg) {
  const auto& adv = cfg.simulation.adversary;
  json adversary = {{"kind", std::string(to_string(adv.kind))},
                    {"seed", adv.seed},
                    {"bound", adv.bound},
                    {"sign", adv.sign}};
  if (adv.constant.size() > 0) {
    adversary["constant"] = std::vector<double>(adv.constant.begin(), adv.constant.end());
  }
  return {
      {"system",
       {{"A", matrix_to_json(cfg.a)},
        {"B", matrix_to_json(cfg.b)},
        {"Q", matrix_to_json(cfg.q)},
        {"R", matrix_to_json(cfg.r)}}},
      {"gamma", cfg.gamma},
      {"solver", {{"tol", cfg.solver.tol}, {"max_iter", cfg.solver.max_iter}}},
      {"simulation",
       {{"x0", std::vector<double>(cfg.simulation.x0.begin(), cfg.simulation.x0.end())},
        {"sign", cfg.simulation.sign},
        {"horizon", cfg.simulation.horizon},
        {"adversary", adversary}}},
      {"output",
       {{"directory", cfg.output_directory.string()},
        {"format", std::string(to_string(cfg.format))}}},
  };
}

}  // namespace mac::cli
