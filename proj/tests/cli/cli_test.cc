#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include "cli/commands.h"
#include "mac/errors.h"
#include "mac/trajectory_csv.h"

namespace mac::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("macctl-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter_++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

RunConfig config_in(const fs::path& dir) {
  RunConfig cfg;
  cfg.output_directory = dir;
  return cfg;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double value_of(const Report& r, const std::string& name) {
  const json doc = r.to_json();
  for (const auto& v : doc["values"]) {
    if (v["name"] == name) return v["value"].is_array() ? v["value"][0][0].get<double>()
                                                        : v["value"].get<double>();
  }
  ADD_FAILURE() << "no value " << name;
  return 0;
}

const Assertion* find_assertion(const Report& r, const std::string& name) {
  for (const auto& a : r.assertions()) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

ErrorKind kind_of_parse(const std::string& text) {
  try {
    parse_run_config(json::parse(text));
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorKind::kIo;
}

TEST(RunConfig, DefaultsAreTheScalarExample) {
  const auto cfg = parse_run_config(json::object());
  EXPECT_EQ(cfg.a(0, 0), 1.0);
  EXPECT_EQ(cfg.gamma, 2.5232);
  EXPECT_EQ(cfg.format, OutputFormat::kCsv);
  EXPECT_EQ(cfg.simulation.horizon, 50);
}

TEST(RunConfig, FullDocumentRoundTrips) {
  const auto text = R"({
    "system": {"A": [[0.9, 0.1], [0, 1.1]], "B": [[1], [0.5]],
               "Q": [[1, 0], [0, 2]], "R": [[1]]},
    "gamma": 4.0,
    "solver": {"tol": 1e-10, "max_iter": 5000},
    "simulation": {"x0": [1, -1], "sign": -1, "horizon": 20,
                   "adversary": {"kind": "random_bounded", "seed": 9, "bound": 0.5}},
    "output": {"directory": "somewhere", "format": "json"}
  })";
  const auto cfg = parse_run_config(json::parse(text));
  EXPECT_EQ(cfg.b.rows(), 2);
  EXPECT_EQ(cfg.simulation.adversary.kind, AdversaryPolicy::Kind::kRandomBounded);
  EXPECT_EQ(cfg.simulation.adversary.seed, 9u);
  EXPECT_EQ(cfg.format, OutputFormat::kJson);
  const auto again = parse_run_config(to_json(cfg));
  EXPECT_EQ(again.a, cfg.a);
  EXPECT_EQ(again.simulation.x0, cfg.simulation.x0);
  EXPECT_EQ(again.solver.max_iter, 5000);
}

TEST(RunConfig, RejectsUnknownKeysAndBadShapes) {
  EXPECT_EQ(kind_of_parse(R"({"gama": 3})"), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of_parse(R"({"solver": {"tolerance": 1}})"), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of_parse(R"({"simulation": {"adversary": {"kind": "zero", "x": 1}}})"),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of_parse(R"({"simulation": {"x0": [1, 2]}})"), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of_parse(R"({"system": {"A": [[1, 2]], "B": [[1]], "Q": [[1]], "R": [[1]]}})"),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of_parse(R"({"system": {"A": [[1]], "B": [[1]], "Q": [[1]]}})"),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of_parse(R"({"system": {"A": [[1], [1, 2]], "B": [[1]], "Q": [[1]], "R": [[1]]}})"),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of_parse(R"({"output": {"format": "xml"}})"), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of_parse(R"({"simulation": {"sign": 0}})"), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of_parse(R"({"gamma": "big"})"), ErrorKind::kInvalidArgument);
}

TEST(RunConfig, MissingFileIsIoError) {
  try {
    load_run_config("/nonexistent/config.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/config.json"), std::string::npos);
  }
}

TEST(Solve, Verdicts) {
  TempDir dir;
  auto cfg = config_in(dir.path());
  auto r = cmd_solve(cfg);
  EXPECT_EQ(r.verdict(), "certified");
  EXPECT_NEAR(value_of(r, "P"), 1.6985, 1e-3);
  EXPECT_NEAR(value_of(r, "T"), 3.3165, 1e-3);
  EXPECT_NEAR(value_of(r, "K"), 0.6985, 1e-3);
  cfg.gamma = 2.2;
  EXPECT_EQ(cmd_solve(cfg).verdict(), "undetermined");
  cfg.gamma = 1.5;
  EXPECT_EQ(cmd_solve(cfg).verdict(), "infeasible");
  cfg.gamma = 1.0;
  EXPECT_EQ(cmd_solve(cfg).verdict(), "infeasible");
}

TEST(Gamma, CriticalValuesAndSweep) {
  TempDir dir;
  auto cfg = config_in(dir.path());
  auto r = cmd_gamma(cfg, GammaCriterion::kConditionII, {});
  EXPECT_NEAR(value_of(r, "gamma_star"), 2.5232, 1e-3);
  EXPECT_NEAR(value_of(cmd_gamma(cfg, GammaCriterion::kLowerBound, {}), "gamma_star"),
              2.01, 1e-2);
  const auto sweep = read_file(dir.path() / "gamma_sweep.csv");
  EXPECT_EQ(sweep.substr(0, sweep.find('\n')),
            "gamma,lower_bound_ok,condition_ii_ok,lower_bound_margin,"
            "condition_ii_margin_plus,condition_ii_margin_minus");
  EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 65);

  cfg.a = Matrix::Zero(1, 1);
  EXPECT_NEAR(value_of(cmd_gamma(cfg, GammaCriterion::kLowerBound, {}), "gamma_star"),
              1.0, 1e-5);
}

TEST(Example1, PassesAndToleratesLooserSolver) {
  TempDir dir;
  auto cfg = config_in(dir.path());
  auto r = cmd_example1(cfg);
  EXPECT_TRUE(r.all_passed());
  EXPECT_GE(r.assertions().size(), 13u);
  cfg.solver.tol *= 10;
  EXPECT_TRUE(cmd_example1(cfg).all_passed());
}

TEST(Example1, FailsUncertifiedGamma) {
  TempDir dir;
  auto cfg = config_in(dir.path());
  cfg.gamma = 2.4;
  auto r = cmd_example1(cfg);
  EXPECT_FALSE(r.all_passed());
  const auto* a = find_assertion(r, "verdict_certified");
  ASSERT_NE(a, nullptr);
  EXPECT_FALSE(a->passed);
  EXPECT_NE(a->message.find("undetermined"), std::string::npos);
}

TEST(Figure1, CurveShape) {
  TempDir dir;
  auto cfg = config_in(dir.path());
  auto r = cmd_figure1(cfg, -0.5, 0.5, 101);
  EXPECT_TRUE(r.all_passed());
  std::ifstream in(dir.path() / "figure1.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "z,value");
  std::map<double, double> curve;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    curve[std::stod(line.substr(0, comma))] = std::stod(line.substr(comma + 1));
  }
  ASSERT_EQ(curve.size(), 101u);
  EXPECT_NEAR(curve.at(0.0), 3.3165, 1e-3);
  EXPECT_NEAR(curve.at(-0.5), 1.6985, 1e-3);
  EXPECT_NEAR(curve.at(0.5), 1.6985, 1e-3);
  // 0.1 is not exactly on the grid; evaluate the closest emitted point.
  EXPECT_NEAR(curve.lower_bound(0.0999)->second, 2.293, 1e-3);
  for (const auto& [z, v] : curve) {
    auto mirror = curve.lower_bound(-z - 1e-9);
    ASSERT_NE(mirror, curve.end());
    EXPECT_NEAR(mirror->second, v, 1e-12);
  }
  EXPECT_THROW(cmd_figure1(cfg, -0.5, 0.5, 1), Error);
}

TEST(Simulate, Example1Rows) {
  TempDir dir;
  auto cfg = config_in(dir.path());
  auto r = cmd_simulate(cfg);
  EXPECT_TRUE(r.all_passed());
  std::ifstream in(dir.path() / "trajectory.csv");
  const auto parsed = parse_trajectory_csv(in);
  EXPECT_NEAR(parsed.states[2](0), 0.3015, 1e-3);
  EXPECT_EQ(parsed.states.size(), 51u);
}

TEST(Simulate, SeededRunsAreByteIdentical) {
  TempDir a, b;
  auto cfg = config_in(a.path());
  cfg.simulation.adversary = AdversaryPolicy::random_bounded(2.0, 1234);
  cmd_simulate(cfg);
  cfg.output_directory = b.path();
  cmd_simulate(cfg);
  EXPECT_EQ(read_file(a.path() / "trajectory.csv"), read_file(b.path() / "trajectory.csv"));
}

TEST(Simulate, ZeroStateAndRefusals) {
  TempDir dir;
  auto cfg = config_in(dir.path());
  cfg.simulation.x0 = Vector::Zero(1);
  cmd_simulate(cfg);
  std::ifstream in(dir.path() / "trajectory.csv");
  const auto parsed = parse_trajectory_csv(in);
  for (const auto& x : parsed.states) EXPECT_EQ(x(0), 0.0);
  for (double p : parsed.running_payoff) EXPECT_EQ(p, 0.0);

  cfg.gamma = 1.5;
  try {
    cmd_simulate(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasible);
  }
  cfg.gamma = 2.5232;
  cfg.simulation.x0 = Vector::Ones(1);
  cfg.simulation.adversary = AdversaryPolicy::constant_disturbance(Vector::Constant(1, 5e9));
  try {
    cmd_simulate(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDivergence);
  }
}

TEST(Verify, Suites) {
  TempDir dir;
  auto cfg = config_in(dir.path());
  auto ids = cmd_verify(cfg, Suite::kIdentities);
  EXPECT_TRUE(ids.all_passed());
  EXPECT_LE(value_of(ids, "identity_max_deviation"), 1e-10);
  EXPECT_TRUE(cmd_verify(cfg, Suite::kLemmas).all_passed());
  cfg.gamma = 2.6;
  auto bell = cmd_verify(cfg, Suite::kBellman);
  EXPECT_TRUE(bell.all_passed());
  EXPECT_LE(value_of(bell, "bellman_residual"), 1e-3);
  EXPECT_THROW(suite_from_string("everything"), Error);
}

// End-to-end runs of the installed binary.
struct RunResult {
  int status;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(MACCTL_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

TEST(Binary, ExitStatusAndReports) {
  TempDir dir;
  const std::string out = "--out " + dir.path().string() + " ";
  auto ok = run(out + "example1");
  EXPECT_EQ(ok.status, 0);
  const auto report = json::parse(ok.out);
  for (const char* key : {"verdict", "values", "margins", "assertions"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
  EXPECT_TRUE(fs::exists(dir.path() / "example1.json"));

  EXPECT_EQ(run(out + "--gamma 2.4 example1").status, 1);

  auto err = run(out + "--gamma 1.5 simulate");
  EXPECT_EQ(err.status, 2);
  EXPECT_EQ(json::parse(err.out)["error"]["kind"], "infeasible");

  const auto bad_cfg = dir.path() / "bad.json";
  std::ofstream(bad_cfg) << R"({"gamma": 3, "colour": "red"})";
  auto bad = run(out + "--config " + bad_cfg.string() + " solve");
  EXPECT_EQ(bad.status, 2);
  EXPECT_EQ(json::parse(bad.out)["error"]["kind"], "invalid-argument");

  EXPECT_NE(run("frobnicate").status, 0);
}

TEST(Binary, SeededSimulationIsDeterministic) {
  TempDir a, b;
  const auto cfg = a.path() / "cfg.json";
  std::ofstream(cfg) << R"({"simulation": {"adversary": {"kind": "random_bounded", "bound": 2}}})";
  EXPECT_EQ(run("--config " + cfg.string() + " --seed 42 --out " + a.path().string() +
                " simulate").status, 0);
  EXPECT_EQ(run("--config " + cfg.string() + " --seed 42 --out " + b.path().string() +
                " simulate").status, 0);
  EXPECT_EQ(read_file(a.path() / "trajectory.csv"), read_file(b.path() / "trajectory.csv"));
}

}  // namespace
}  // namespace mac::cli
