#include "gridsec/grid.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

namespace gridsec {

CaseParseError::CaseParseError(const std::string& msg, int line_, int column_)
    : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                         std::to_string(column_) + ")"),
      line(line_),
      column(column_) {}

int GridCase::bus_index(int bus_id) const {
  auto it = std::lower_bound(buses.begin(), buses.end(), bus_id);
  if (it == buses.end() || *it != bus_id) {
    throw std::invalid_argument("unknown bus id " + std::to_string(bus_id));
  }
  return static_cast<int>(it - buses.begin());
}

namespace {

void validate_case(GridCase& grid) {
  if (grid.buses.empty()) {
    throw std::invalid_argument("case has no buses");
  }
  std::sort(grid.buses.begin(), grid.buses.end());
  if (std::adjacent_find(grid.buses.begin(), grid.buses.end()) != grid.buses.end()) {
    throw std::invalid_argument("duplicate bus id");
  }
  const int n_bus = static_cast<int>(grid.buses.size());
  std::vector<std::vector<int>> adj(n_bus);
  for (const Branch& b : grid.branches) {
    if (b.from == b.to) {
      throw std::invalid_argument("self-loop branch at bus " + std::to_string(b.from));
    }
    if (!(b.reactance > 0.0)) {
      throw std::invalid_argument("non-positive reactance on branch " +
                                  std::to_string(b.from) + "-" + std::to_string(b.to));
    }
    const int fi = grid.bus_index(b.from);
    const int ti = grid.bus_index(b.to);
    adj[fi].push_back(ti);
    adj[ti].push_back(fi);
  }
  grid.bus_index(grid.slack);  // throws "unknown slack" equivalent
  // Connectivity (BFS from bus 0).
  std::vector<char> seen(n_bus, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push(v);
      }
    }
  }
  if (count != n_bus) {
    throw std::invalid_argument("disconnected graph: " +
                                std::to_string(n_bus - count) + " bus(es) unreachable");
  }
}

}  // namespace

GridCase parse_case(const std::string& text) {
  GridCase grid;
  bool have_name = false;
  bool have_slack = false;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = raw.substr(0, raw.find('#'));
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;  // blank / comment-only
    auto col_of = [&](const std::string& token) {
      auto pos = line.find(token);
      return pos == std::string::npos ? 1 : static_cast<int>(pos) + 1;
    };
    if (kw == "case") {
      if (!(ls >> grid.name)) {
        throw CaseParseError("case header missing name", line_no, col_of(kw));
      }
      have_name = true;
    } else if (kw == "bus") {
      int id;
      if (!(ls >> id)) {
        throw CaseParseError("bus line missing id", line_no, col_of(kw));
      }
      grid.buses.push_back(id);
    } else if (kw == "branch") {
      Branch b;
      if (!(ls >> b.from >> b.to >> b.reactance)) {
        throw CaseParseError("branch line needs <from> <to> <reactance>", line_no,
                             col_of(kw));
      }
      grid.branches.push_back(b);
    } else if (kw == "slack") {
      if (!(ls >> grid.slack)) {
        throw CaseParseError("slack line missing id", line_no, col_of(kw));
      }
      have_slack = true;
    } else {
      throw CaseParseError("unknown keyword '" + kw + "'", line_no, col_of(kw));
    }
    std::string extra;
    if (ls >> extra) {
      throw CaseParseError("trailing token '" + extra + "'", line_no, col_of(extra));
    }
  }
  if (!have_name) throw CaseParseError("missing 'case <name>' header", 1, 1);
  if (!have_slack) throw CaseParseError("missing 'slack <id>' line", line_no, 1);
  validate_case(grid);
  return grid;
}

namespace {

// Reads the numeric rows of "mpc.<table> = [ ... ];".
std::vector<std::vector<double>> matpower_table(const std::string& text,
                                                const std::string& table) {
  const std::string key = "mpc." + table;
  auto start = text.find(key);
  if (start == std::string::npos) {
    throw std::invalid_argument("MATPOWER text has no " + key + " table");
  }
  auto open = text.find('[', start);
  auto close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos) {
    throw std::invalid_argument("malformed " + key + " table");
  }
  std::vector<std::vector<double>> rows;
  std::istringstream body(text.substr(open + 1, close - open - 1));
  std::string line;
  while (std::getline(body, line)) {
    // Strip MATLAB comments and row terminators.
    auto pc = line.find('%');
    if (pc != std::string::npos) line.resize(pc);
    std::replace(line.begin(), line.end(), ';', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

GridCase convert_matpower(const std::string& text) {
  GridCase grid;
  grid.name = "matpower";
  auto fn = text.find("function mpc = ");
  if (fn != std::string::npos) {
    std::istringstream ns(text.substr(fn + 15));
    ns >> grid.name;
  }
  bool have_slack = false;
  for (const auto& row : matpower_table(text, "bus")) {
    if (row.size() < 2) {
      throw std::invalid_argument("mpc.bus row needs at least id and type");
    }
    const int id = static_cast<int>(row[0]);
    grid.buses.push_back(id);
    if (static_cast<int>(row[1]) == 3) {  // reference bus
      grid.slack = id;
      have_slack = true;
    }
  }
  if (!have_slack) {
    throw std::invalid_argument("mpc.bus table has no type-3 (slack) bus");
  }
  for (const auto& row : matpower_table(text, "branch")) {
    if (row.size() < 4) {
      throw std::invalid_argument("mpc.branch row needs fbus, tbus, r, x");
    }
    Branch b;
    b.from = static_cast<int>(row[0]);
    b.to = static_cast<int>(row[1]);
    b.reactance = row[3];
    grid.branches.push_back(b);
  }
  validate_case(grid);
  return grid;
}

GridCase load_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open case file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (text.find("mpc.bus") != std::string::npos) {
    return convert_matpower(text);
  }
  return parse_case(text);
}

Jacobian build_jacobian(const GridCase& grid) {
  const int n_bus = static_cast<int>(grid.buses.size());
  const int n_br = static_cast<int>(grid.branches.size());
  const int m = n_bus + 2 * n_br;
  const int slack_col = grid.bus_index(grid.slack);

  // Full (all-angle) rows first, then drop the slack column.
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(m, n_bus);
  Jacobian jac;
  jac.row_labels.reserve(m);
  for (int i = 0; i < n_bus; ++i) {
    jac.row_labels.push_back("injection@" + std::to_string(grid.buses[i]));
  }
  for (const Branch& b : grid.branches) {
    const int fi = grid.bus_index(b.from);
    const int ti = grid.bus_index(b.to);
    const double w = 1.0 / b.reactance;
    full(fi, fi) += w;
    full(fi, ti) -= w;
    full(ti, ti) += w;
    full(ti, fi) -= w;
  }
  int row = n_bus;
  for (const Branch& b : grid.branches) {
    const int fi = grid.bus_index(b.from);
    const int ti = grid.bus_index(b.to);
    const double w = 1.0 / b.reactance;
    full(row, fi) = w;
    full(row, ti) = -w;
    jac.row_labels.push_back("flow " + std::to_string(b.from) + "->" +
                             std::to_string(b.to));
    ++row;
    full(row, ti) = w;
    full(row, fi) = -w;
    jac.row_labels.push_back("flow " + std::to_string(b.to) + "->" +
                             std::to_string(b.from));
    ++row;
  }

  jac.matrix.resize(m, n_bus - 1);
  int col = 0;
  for (int j = 0; j < n_bus; ++j) {
    if (j == slack_col) continue;
    jac.matrix.col(col++) = full.col(j);
    jac.state_labels.push_back(grid.buses[j]);
  }
  return jac;
}

}  // namespace gridsec
