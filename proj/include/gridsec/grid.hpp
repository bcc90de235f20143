#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gridsec {

struct Branch {
  int from = 0;
  int to = 0;
  double reactance = 0.0;  // per-unit, > 0
};

/// DC grid description: topology, branch reactances and the slack bus.
/// Validated on construction paths (parse/convert): connected graph,
/// positive reactances, endpoints and slack must be known buses.
struct GridCase {
  std::string name;
  std::vector<int> buses;  // sorted ascending, unique
  std::vector<Branch> branches;
  int slack = 0;

  int bus_index(int bus_id) const;  // position in `buses`, throws if unknown
};

/// Measurement Jacobian of the DC model. Rows: all bus injections in bus-id
/// order, then per branch the from->to flow followed by the to->from flow.
/// Columns: voltage angles of the non-slack buses in bus-id order.
struct Jacobian {
  Eigen::MatrixXd matrix;               // m x n
  std::vector<std::string> row_labels;  // "injection@<bus>" | "flow <f>-><t>"
  std::vector<int> state_labels;        // non-slack bus ids

  Eigen::Index m() const { return matrix.rows(); }
  Eigen::Index n() const { return matrix.cols(); }
};

/// Parse error with 1-based line/column position.
struct CaseParseError : std::runtime_error {
  int line;
  int column;
  CaseParseError(const std::string& msg, int line_, int column_);
};

/// Parse the native line-oriented case grammar:
///   case <name>
///   bus <id>
///   branch <from> <to> <reactance>
///   slack <id>
/// with '#' comments. Validates all GridCase invariants.
GridCase parse_case(const std::string& text);

/// Extract ids, reactances and the slack designation from MATPOWER-style
/// case text (the mpc.bus / mpc.branch tables). Everything else in the file
/// is ignored.
GridCase convert_matpower(const std::string& text);

/// Load from file; MATPOWER-style content (contains an mpc.bus table) is
/// converted, anything else goes through the native parser.
GridCase load_case_file(const std::string& path);

/// Build the DC measurement Jacobian. m = |buses| + 2|branches|,
/// n = |buses| - 1 (slack angle fixed at zero and its column removed).
Jacobian build_jacobian(const GridCase& grid);

}  // namespace gridsec
