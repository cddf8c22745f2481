#include "cli/report.h"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mac::cli {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string describe(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

void Report::add_value(const std::string& name, json value) {
  values_.push_back({{"name", name}, {"value", std::move(value)}});
}

void Report::add_margin(const std::string& name, double value) {
  margins_.push_back({{"name", name}, {"value", number_or_null(value)}});
}

const Assertion& Report::check_near(const std::string& name, double actual,
                                    double expected, double tolerance) {
  Assertion a{name, expected, actual, tolerance,
              std::abs(actual - expected) <= tolerance, ""};
  if (!a.passed) {
    a.message = name + ": got " + describe(actual) + ", expected " +
                describe(expected) + " ± " + describe(tolerance);
  }
  assertions_.push_back(std::move(a));
  return assertions_.back();
}

const Assertion& Report::check_at_most(const std::string& name, double actual,
                                       double bound) {
  Assertion a{name, bound, actual, 0.0, actual <= bound, ""};
  if (!a.passed) {
    a.message = name + ": got " + describe(actual) + ", must be <= " + describe(bound);
  }
  assertions_.push_back(std::move(a));
  return assertions_.back();
}

const Assertion& Report::check_above(const std::string& name, double actual,
                                     double bound) {
  Assertion a{name, bound, actual, 0.0, actual > bound, ""};
  if (!a.passed) {
    a.message = name + ": got " + describe(actual) + ", must be > " + describe(bound);
  }
  assertions_.push_back(std::move(a));
  return assertions_.back();
}

const Assertion& Report::check(const std::string& name, bool passed,
                               std::string message) {
  Assertion a{name, 1.0, passed ? 1.0 : 0.0, 0.0, passed,
              passed ? std::string() : std::move(message)};
  assertions_.push_back(std::move(a));
  return assertions_.back();
}

void Report::add_artifact(const std::filesystem::path& path) {
  artifacts_.push_back(path.string());
}

bool Report::all_passed() const {
  for (const auto& a : assertions_) {
    if (!a.passed) return false;
  }
  return true;
}

json Report::to_json() const {
  json assertions = json::array();
  for (const auto& a : assertions_) {
    json item = {{"name", a.name},
                 {"expected", number_or_null(a.expected)},
                 {"actual", number_or_null(a.actual)},
                 {"tolerance", a.tolerance},
                 {"passed", a.passed}};
    if (!a.message.empty()) item["message"] = a.message;
    assertions.push_back(std::move(item));
  }
  json out = {{"command", command_},   {"verdict", verdict_},
              {"values", values_},     {"margins", margins_},
              {"assertions", assertions}, {"passed", all_passed()}};
  if (!artifacts_.empty()) out["artifacts"] = artifacts_;
  if (!notes_.empty()) out["notes"] = notes_;
  return out;
}

void Report::write_failures(std::ostream& out) const {
  std::size_t width = 9;
  for (const auto& a : assertions_) width = std::max(width, a.name.size());
  out << std::left << std::setw(static_cast<int>(width)) << "assertion"
      << "  expected        actual          tolerance\n";
  for (const auto& a : assertions_) {
    if (a.passed) continue;
    out << std::left << std::setw(static_cast<int>(width)) << a.name << "  "
        << std::setw(14) << describe(a.expected) << "  " << std::setw(14)
        << describe(a.actual) << "  " << describe(a.tolerance) << '\n';
    if (!a.message.empty()) out << "  " << a.message << '\n';
  }
}

json error_json(const Error& e) {
  json err = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
  err["value"] = number_or_null(e.value());
  return {{"error", err}};
}

json error_json(std::string_view kind, const std::string& message) {
  return {{"error", {{"kind", std::string(kind)}, {"message", message}, {"value", nullptr}}}};
}

}  // namespace mac::cli
