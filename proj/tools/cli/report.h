#pragma once

// Machine-readable command reports. Every command produces one of these; it
// is printed to stdout as JSON and saved as <out>/<command>.json.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mac/errors.h"

namespace mac::cli {

struct Assertion {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string message;
};

class Report {
 public:
  explicit Report(std::string command) : command_(std::move(command)) {}

  const std::string& command() const { return command_; }

  void set_verdict(std::string verdict) { verdict_ = std::move(verdict); }
  const std::string& verdict() const { return verdict_; }

  void add_value(const std::string& name, nlohmann::json value);
  void add_margin(const std::string& name, double value);

  /// |actual − expected| ≤ tolerance.
  const Assertion& check_near(const std::string& name, double actual,
                              double expected, double tolerance);
  /// actual ≤ bound.
  const Assertion& check_at_most(const std::string& name, double actual,
                                 double bound);
  /// actual > bound.
  const Assertion& check_above(const std::string& name, double actual,
                               double bound);
  const Assertion& check(const std::string& name, bool passed,
                         std::string message);

  void add_artifact(const std::filesystem::path& path);
  void add_note(std::string note) { notes_.push_back(std::move(note)); }

  const std::vector<Assertion>& assertions() const { return assertions_; }
  bool all_passed() const;

  nlohmann::json to_json() const;
  /// Aligned table of failing assertions, for stderr.
  void write_failures(std::ostream& out) const;

 private:
  std::string command_;
  std::string verdict_ = "n/a";
  nlohmann::json values_ = nlohmann::json::array();
  nlohmann::json margins_ = nlohmann::json::array();
  std::vector<Assertion> assertions_;
  std::vector<std::string> artifacts_;
  std::vector<std::string> notes_;
};

/// {"error": {"kind": ..., "message": ..., "value": ...}}.
nlohmann::json error_json(const Error& e);
nlohmann::json error_json(std::string_view kind, const std::string& message);

}  // namespace mac::cli
