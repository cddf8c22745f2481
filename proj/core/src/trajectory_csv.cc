#include "mac/trajectory_csv.h"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "mac/errors.h"

namespace mac {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) {
    throw Error(ErrorKind::kNumericalError, "cannot format double");
  }
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  if (traj.states.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "empty trajectory");
  }
  const Eigen::Index n = traj.states.front().size();
  const Eigen::Index m = traj.inputs.empty() ? 0 : traj.inputs.front().size();

  out << "t";
  for (Eigen::Index j = 0; j < n; ++j) out << ",x_" << j;
  for (Eigen::Index j = 0; j < m; ++j) out << ",u_" << j;
  for (Eigen::Index j = 0; j < n; ++j) out << ",w_" << j;
  out << ",payoff_prefix\n";

  const int horizon = traj.horizon();
  for (int t = 0; t <= horizon; ++t) {
    out << t;
    for (Eigen::Index j = 0; j < n; ++j) out << ',' << format_double(traj.states[t](j));
    if (t < horizon) {
      for (Eigen::Index j = 0; j < m; ++j) out << ',' << format_double(traj.inputs[t](j));
      for (Eigen::Index j = 0; j < n; ++j) {
        out << ',' << format_double(traj.disturbances[t](j));
      }
      out << ',' << format_double(traj.running_payoff[t]);
    } else {
      for (Eigen::Index j = 0; j < m + n + 1; ++j) out << ',';
    }
    out << '\n';
  }
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

double parse_cell(const std::string& cell, int line_no) {
  double value = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "line " + std::to_string(line_no) + ": bad number '" + cell + "'");
  }
  return value;
}

}  // namespace

ParsedTrajectory parse_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::kInvalidArgument, "missing CSV header");
  }
  const auto header = split(line);
  Eigen::Index n = 0, m = 0, nw = 0;
  for (const auto& h : header) {
    if (h.rfind("x_", 0) == 0) ++n;
    if (h.rfind("u_", 0) == 0) ++m;
    if (h.rfind("w_", 0) == 0) ++nw;
  }
  const std::size_t width = static_cast<std::size_t>(2 + n + m + nw);
  if (header.empty() || header.front() != "t" || header.back() != "payoff_prefix" ||
      nw != n || header.size() != width) {
    throw Error(ErrorKind::kInvalidArgument, "unrecognised CSV header");
  }

  ParsedTrajectory parsed;
  int line_no = 1;
  bool final_row_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (final_row_seen) {
      throw Error(ErrorKind::kInvalidArgument, "rows after the final state row");
    }
    const auto cells = split(line);
    if (cells.size() != width) {
      throw Error(ErrorKind::kInvalidArgument,
                  "line " + std::to_string(line_no) + ": wrong column count");
    }
    Vector x(n);
    for (Eigen::Index j = 0; j < n; ++j) x(j) = parse_cell(cells[1 + j], line_no);
    parsed.states.push_back(std::move(x));
    if (cells.back().empty()) {
      final_row_seen = true;
      continue;
    }
    Vector u(m), w(n);
    for (Eigen::Index j = 0; j < m; ++j) u(j) = parse_cell(cells[1 + n + j], line_no);
    for (Eigen::Index j = 0; j < n; ++j) {
      w(j) = parse_cell(cells[1 + n + m + j], line_no);
    }
    parsed.inputs.push_back(std::move(u));
    parsed.disturbances.push_back(std::move(w));
    parsed.running_payoff.push_back(parse_cell(cells.back(), line_no));
  }
  if (!final_row_seen) {
    throw Error(ErrorKind::kInvalidArgument, "missing final state row");
  }
  return parsed;
}

}  // namespace mac
