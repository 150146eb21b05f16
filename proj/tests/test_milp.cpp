#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lfen/driver.hpp"
#include "lfen/instance_io.hpp"
#include "lfen/solver.hpp"
#include "testgames.hpp"

using namespace lfen;
using lfen::testing::pennies_instance;

namespace {

// polymatrix coordination: followers want to match; the leader's payoff
// splits 8/2 across the pairwise matrices so the equilibria score 10, 0, 5
PolymatrixGame pm_coordination() {
  const std::vector<int> m{2, 2, 2};
  Matrix u01(2, 2, {1, 0, 0, 1});
  Matrix u10(2, 2, {1, 0, 0, 1});
  Matrix zero(2, 2);
  Matrix u20(2, 2, {8, 0, 8, 0});
  Matrix u21(2, 2, {2, 0, 2, 0});
  return PolymatrixGame(m, {u01, zero, u10, zero, u20, u21});
}

LeaderFollowerInstance random_pm(int m, std::uint64_t seed) {
  GeneratorSpec spec{GameClass::kPolymatrix, 3, m, 0.0, 100.0, seed};
  return LeaderFollowerInstance(generate(spec), 2);
}

}  // namespace

TEST_CASE("binary below a fractional cap rounds down") {
  Model m;
  m.add_binary("y");
  Polynomial cap;
  cap.add(1.0, {0});
  m.add_constraint(cap, Sense::kLe, 0.7, "cap");
  Polynomial obj;
  obj.add(1.0, {0});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  auto result = solve_milp(m);
  CHECK(result.status == SolveStatus::kOptimal);
  CHECK(result.lb == doctest::Approx(0.0));
}

TEST_CASE("tiny knapsack") {
  Model m;
  m.add_binary("a");
  m.add_binary("b");
  Polynomial cap;
  cap.add(1.0, {0}).add(1.0, {1});
  m.add_constraint(cap, Sense::kLe, 1.0, "cap");
  Polynomial obj;
  obj.add(3.0, {0}).add(2.0, {1});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  auto result = solve_milp(m);
  CHECK(result.status == SolveStatus::kOptimal);
  CHECK(result.lb == doctest::Approx(3.0));
}

TEST_CASE("quadratic objective terms with a binary factor are linearized") {
  Model m;
  const VarId x = m.add_binary("x");
  const VarId y = m.add_continuous("y", 0.0, 1.0);
  Polynomial cap;
  cap.add(1.0, {y});
  m.add_constraint(cap, Sense::kLe, 0.7, "cap");
  Polynomial obj;
  obj.add(1.0, {x, y}).add(-0.1, {x});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  auto result = solve_milp(m);
  CHECK(result.status == SolveStatus::kOptimal);
  CHECK(result.lb == doctest::Approx(0.6));
}

TEST_CASE("continuous-only quadratics are rejected") {
  Model m;
  const VarId x = m.add_continuous("x", 0.0, 1.0);
  Polynomial obj;
  obj.add(1.0, {x, x});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  CHECK_THROWS_AS(solve_milp(m), SolverError);
}

TEST_CASE("nonlinear constraints are rejected") {
  Model m;
  const VarId x = m.add_binary("x");
  Polynomial quad;
  quad.add(1.0, {x, x});
  m.add_constraint(quad, Sense::kLe, 1.0, "quad");
  Polynomial obj;
  obj.add(1.0, {x});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  CHECK_THROWS_AS(solve_milp(m), SolverError);
}

TEST_CASE("polymatrix second-level program spans the equilibrium set") {
  LeaderFollowerInstance inst(Game(pm_coordination()), 2);
  for (double d0 : {0.0, 0.5, 1.0}) {
    MixedStrategy delta(std::vector<double>{d0, 1.0 - d0});
    auto optimistic = solve_oracle_at(inst, delta, TieMode::kOptimistic);
    CHECK(optimistic.leader_value == doctest::Approx(10.0));
    auto pessimistic = solve_oracle_at(inst, delta, TieMode::kPessimistic);
    CHECK(pessimistic.leader_value == doctest::Approx(0.0));
  }
}

TEST_CASE("pennies second-level value is forced by the unique equilibrium") {
  auto inst = pennies_instance();
  MixedStrategy delta(std::vector<double>{0.2, 0.8});
  auto sol = solve_oracle_at(inst, delta, TieMode::kOptimistic);
  CHECK(sol.leader_value == doctest::Approx(0.4));
  CHECK(sol.solve.status == SolveStatus::kOptimal);
}

TEST_CASE("pure-commitment program agrees between the two engines") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto inst = random_pm(2 + static_cast<int>(seed % 2), 800 + seed);
    auto built = build_opm_lpfm3(inst);
    SolveConfig cfg;
    cfg.rel_gap_tol = 1e-7;
    cfg.add_gap_tol = 1e-9;
    auto by_milp = solve_milp(built.model, cfg);
    auto by_spatial = solve_spatial(built.model, cfg);
    REQUIRE(by_milp.status == SolveStatus::kOptimal);
    REQUIRE(by_spatial.status == SolveStatus::kOptimal);
    CHECK(by_milp.lb == doctest::Approx(by_spatial.lb).epsilon(1e-7));
  }
}

TEST_CASE("infeasible binary systems are reported") {
  Model m;
  m.add_binary("x");
  Polynomial row;
  row.add(1.0, {0});
  m.add_constraint(row, Sense::kGe, 0.5, "ge");
  m.add_constraint(row, Sense::kLe, 0.4, "le");
  Polynomial obj;
  obj.add(1.0, {0});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  auto result = solve_milp(m);
  CHECK(result.status == SolveStatus::kInfeasible);
}
