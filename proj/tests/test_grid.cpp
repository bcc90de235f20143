#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include <Eigen/SVD>

#include "gridsec/grid.hpp"

using namespace gridsec;

namespace {

std::string cases_dir() { return GRIDSEC_CASES_DIR; }

const char* kTwoBus =
    "case twobus\nbus 0\nbus 1\nbranch 0 1 1.0\nslack 0\n";

int svd_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-8) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

}  // namespace

TEST_CASE("parse minimal two-bus case") {
  const GridCase g = parse_case(kTwoBus);
  CHECK(g.buses.size() == 2);
  CHECK(g.branches.size() == 1);
  CHECK(g.slack == 0);
  CHECK(g.name == "twobus");
}

TEST_CASE("parse errors") {
  CHECK_THROWS_WITH_AS(
      parse_case("case x\nbus 0\nbus 1\nbranch 0 1 -1\nslack 0\n"),
      doctest::Contains("non-positive reactance"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      parse_case("case x\nbus 0\nbus 1\nbus 2\nbranch 0 1 1\nslack 0\n"),
      doctest::Contains("disconnected"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_case("case x\nbus 0\nbus 1\nbranch 0 1 1\nslack 7\n"),
                       doctest::Contains("unknown bus"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_case("case x\nbus 0\nbranch 0 0 1\nslack 0\n"),
                       doctest::Contains("self-loop"), std::invalid_argument);
  // Syntax errors carry line/column.
  try {
    parse_case("case x\nbus 0\nbogus 1 2\nslack 0\n");
    FAIL("expected CaseParseError");
  } catch (const CaseParseError& e) {
    CHECK(e.line == 3);
    CHECK(e.column >= 1);
  }
  CHECK_THROWS_AS(parse_case("case x\nbus 0\n"), CaseParseError);  // no slack
}

TEST_CASE("ieee14 case file") {
  const GridCase g = load_case_file(cases_dir() + "/ieee14.case");
  CHECK(g.buses.size() == 14);
  CHECK(g.branches.size() == 20);
  CHECK(g.slack == 1);
}

TEST_CASE("two-bus jacobian is the analytic column") {
  const Jacobian jac = build_jacobian(parse_case(kTwoBus));
  REQUIRE(jac.m() == 4);
  REQUIRE(jac.n() == 1);
  CHECK(jac.matrix(0, 0) == -1.0);  // injection@0
  CHECK(jac.matrix(1, 0) == 1.0);   // injection@1
  CHECK(jac.matrix(2, 0) == -1.0);  // flow 0->1
  CHECK(jac.matrix(3, 0) == 1.0);   // flow 1->0
  CHECK(jac.row_labels[0] == "injection@0");
  CHECK(jac.row_labels[2] == "flow 0->1");
  CHECK(jac.state_labels == std::vector<int>{1});
}

TEST_CASE("three-bus path injection rows are the reduced laplacian") {
  const GridCase g = parse_case(
      "case path\nbus 0\nbus 1\nbus 2\nbranch 0 1 1\nbranch 1 2 1\nslack 0\n");
  const Jacobian jac = build_jacobian(g);
  REQUIRE(jac.m() == 7);
  REQUIRE(jac.n() == 2);
  CHECK(jac.matrix(0, 0) == -1.0);
  CHECK(jac.matrix(0, 1) == 0.0);
  CHECK(jac.matrix(1, 0) == 2.0);
  CHECK(jac.matrix(1, 1) == -1.0);
  CHECK(jac.matrix(2, 0) == -1.0);
  CHECK(jac.matrix(2, 1) == 1.0);
}

TEST_CASE("ieee14 jacobian dimensions and rank") {
  const Jacobian jac = build_jacobian(load_case_file(cases_dir() + "/ieee14.case"));
  CHECK(jac.m() == 54);  // 14 + 2*20
  CHECK(jac.n() == 13);
  CHECK(svd_rank(jac.matrix) == 13);
}

TEST_CASE("structural invariants on every shipped case") {
  for (const char* name : {"twobus", "threebus", "ieee14", "ieee30"}) {
    const GridCase g = load_case_file(cases_dir() + "/" + name + ".case");
    const Jacobian jac = build_jacobian(g);
    const int n_bus = static_cast<int>(g.buses.size());
    const int n_br = static_cast<int>(g.branches.size());
    REQUIRE(jac.m() == n_bus + 2 * n_br);
    REQUIRE(jac.n() == n_bus - 1);
    // Flow row pairs cancel exactly.
    for (int b = 0; b < n_br; ++b) {
      const Eigen::VectorXd sum = jac.matrix.row(n_bus + 2 * b).transpose() +
                                  jac.matrix.row(n_bus + 2 * b + 1).transpose();
      CHECK(sum.cwiseAbs().maxCoeff() == 0.0);
    }
    // Energy balance: injection rows sum to zero in every column. Exact for
    // unit reactances; bounded by accumulation roundoff otherwise (the
    // diagonal entries are themselves rounded sums of branch weights).
    const Eigen::VectorXd col_sums =
        jac.matrix.topRows(n_bus).colwise().sum().transpose();
    const double scale = jac.matrix.topRows(n_bus).cwiseAbs().maxCoeff();
    if (std::string(name) == "twobus" || std::string(name) == "threebus") {
      CHECK(col_sums.cwiseAbs().maxCoeff() == 0.0);
    } else {
      CHECK(col_sums.cwiseAbs().maxCoeff() <= 1e-13 * scale);
    }
    CHECK(svd_rank(jac.matrix) == jac.n());
  }
}

TEST_CASE("matpower converter matches the native ieee14 case") {
  const GridCase native = load_case_file(cases_dir() + "/ieee14.case");
  const GridCase converted = load_case_file(cases_dir() + "/case14.m");
  REQUIRE(converted.buses == native.buses);
  REQUIRE(converted.branches.size() == native.branches.size());
  CHECK(converted.slack == native.slack);
  for (std::size_t i = 0; i < native.branches.size(); ++i) {
    CHECK(converted.branches[i].from == native.branches[i].from);
    CHECK(converted.branches[i].to == native.branches[i].to);
    CHECK(converted.branches[i].reactance ==
          doctest::Approx(native.branches[i].reactance));
  }
  const Jacobian a = build_jacobian(native);
  const Jacobian b = build_jacobian(converted);
  CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() == 0.0);
}
