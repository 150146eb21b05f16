#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lfen/driver.hpp"
#include "lfen/instance_io.hpp"
#include "lfen/meta.hpp"
#include "lfen/nash_oracles.hpp"
#include "lfen/solver.hpp"
#include "testgames.hpp"

using namespace lfen;
using lfen::testing::coord_instance;
using lfen::testing::pennies_instance;

namespace {

Model bilinear_toy() {
  Model m;
  const VarId x = m.add_continuous("x", 0.0, 1.0);
  const VarId y = m.add_continuous("y", 0.0, 1.0);
  const VarId w = m.add_continuous("w", 0.0, 1.0);
  Polynomial def;
  def.add(1.0, {w}).add(-1.0, {x, y});
  m.add_constraint(def, Sense::kEq, 0.0, "w_def");
  Polynomial mass;
  mass.add(1.0, {x}).add(1.0, {y});
  m.add_constraint(mass, Sense::kEq, 1.0, "mass");
  Polynomial obj;
  obj.add(1.0, {w});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  return m;
}

LeaderFollowerInstance random_instance(GameClass cls, int m, std::uint64_t seed) {
  GeneratorSpec spec{cls, 3, m, 0.0, 100.0, seed};
  return LeaderFollowerInstance(generate(spec), 2);
}

SolveConfig tight_config() {
  SolveConfig cfg;
  cfg.rel_gap_tol = 2.5e-7;
  cfg.add_gap_tol = 2.5e-7;
  cfg.time_limit_s = 120.0;
  return cfg;
}

}  // namespace

TEST_CASE("registry decomposition of a triple product") {
  Model m;
  const VarId x = m.add_continuous("x", 0.0, 1.0);
  const VarId y = m.add_continuous("y", 0.0, 1.0);
  const VarId z = m.add_continuous("z", 0.0, 1.0);
  Polynomial obj;
  obj.add(1.0, {x, y, z});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  auto relaxed = relax(m);
  CHECK(relaxed.products.size() == 2);  // chained pair
  CHECK(relaxed.variables.size() == 5);
}

TEST_CASE("unbounded variables are rejected by the relaxation") {
  Model m;
  m.add_continuous("x", 0.0, kInf);
  Polynomial obj;
  obj.add(1.0, {0, 0});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  CHECK_THROWS_AS(relax(m), SolverError);
}

TEST_CASE("root relaxation bound of the symmetric bilinear toy") {
  Model m = bilinear_toy();
  SolveConfig cfg;
  cfg.node_limit = 1;  // stop after the root
  auto result = solve_spatial(m, cfg);
  CHECK(result.ub == doctest::Approx(0.5));
}

TEST_CASE("bilinear toy solves to the symmetric optimum") {
  Model m = bilinear_toy();
  SolveConfig cfg;
  cfg.rel_gap_tol = 1e-6;
  auto result = solve_spatial(m, cfg);
  CHECK(result.status == SolveStatus::kOptimal);
  CHECK(result.lb == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(result.nodes <= 50);
  REQUIRE(result.incumbent.has_value());
  CHECK((*result.incumbent)[0] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("mccormick envelope is exact at fixed factors") {
  // x fixed by bounds, product forced through the envelope rows alone
  Model m;
  const VarId x = m.add_continuous("x", 1.0, 1.0);
  const VarId y = m.add_continuous("y", 0.0, 1.0);
  const VarId w = m.add_continuous("w", 0.0, 1.0);
  Polynomial def;
  def.add(1.0, {w}).add(-1.0, {x, y});
  m.add_constraint(def, Sense::kEq, 0.0, "w_def");
  Polynomial cap;
  cap.add(1.0, {y});
  m.add_constraint(cap, Sense::kLe, 0.7, "cap");
  Polynomial obj;
  obj.add(1.0, {w});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  auto result = solve_spatial(m);
  CHECK(result.status == SolveStatus::kOptimal);
  CHECK(result.lb == doctest::Approx(0.7));
  CHECK(result.nodes == 1);  // envelope exact, no branching needed
}

TEST_CASE("coordination game solves through every mixed formulation") {
  auto inst = coord_instance();
  for (FormulationId id : {FormulationId::kOnf1, FormulationId::kOnf2, FormulationId::kOnf3}) {
    auto sol = solve_formulation(inst, id, tight_config());
    CAPTURE(to_string(id));
    CHECK(sol.certified);
    CHECK(sol.solve.status == SolveStatus::kOptimal);
    CHECK(sol.leader_value == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(sol.max_regret <= 1e-6);
  }
}

TEST_CASE("pennies polymatrix formulations agree at two") {
  auto inst = pennies_instance();
  for (FormulationId id : {FormulationId::kOpm1, FormulationId::kOpm2, FormulationId::kOpm3}) {
    auto sol = solve_formulation(inst, id, tight_config());
    CAPTURE(to_string(id));
    CHECK(sol.certified);
    CHECK(sol.leader_value == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(sol.delta.probs[0] == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("cross-formulation agreement on seeded instances") {
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    auto inst = random_instance(GameClass::kNormalForm, 2, 600 + seed);
    auto cfg = tight_config();
    auto a = solve_formulation(inst, FormulationId::kOnf1, cfg);
    auto b = solve_formulation(inst, FormulationId::kOnf3, cfg);
    REQUIRE(a.certified);
    REQUIRE(b.certified);
    CHECK(a.leader_value == doctest::Approx(b.leader_value).epsilon(5e-7));
    // certified lower bound from the lattice oracle
    auto grid = grid_search_lmfm(inst, 0.25, TieMode::kOptimistic);
    CHECK(a.leader_value >= grid.value - 1e-7);
  }
}

TEST_CASE("fixed-commitment solves match the enumeration oracle") {
  SUBCASE("coordination spans the equilibrium set") {
    auto inst = coord_instance();
    for (double d0 : {0.0, 0.4, 1.0}) {
      MixedStrategy delta(std::vector<double>{d0, 1.0 - d0});
      auto optimistic = solve_oracle_at(inst, delta, TieMode::kOptimistic, tight_config());
      CHECK(optimistic.leader_value == doctest::Approx(10.0).epsilon(1e-7));
      auto pessimistic = solve_oracle_at(inst, delta, TieMode::kPessimistic, tight_config());
      CHECK(pessimistic.leader_value == doctest::Approx(1.0).epsilon(1e-7));
    }
  }
  SUBCASE("random instances at random commitments") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto inst = random_instance(GameClass::kNormalForm, 2, 700 + seed);
      MixedStrategy delta(std::vector<double>{0.3, 0.7});
      auto sol = solve_oracle_at(inst, delta, TieMode::kOptimistic, tight_config());
      REQUIRE(sol.certified);
      REQUIRE(sol.enumeration_cross_check.has_value());
      CHECK(sol.leader_value == doctest::Approx(*sol.enumeration_cross_check).epsilon(1e-6));
    }
  }
}

TEST_CASE("node log stream captures the search") {
  std::ostringstream log;
  SolveConfig cfg;
  cfg.node_log = &log;
  auto result = solve_spatial(bilinear_toy(), cfg);
  CHECK(result.status == SolveStatus::kOptimal);
  std::string first_line = log.str().substr(0, log.str().find('\n'));
  CHECK(first_line.find("0,0,") == 0);  // root id and depth
}

TEST_CASE("pure linear models solve at the root") {
  Model m;
  m.add_continuous("x", 0.0, 1.0);
  Polynomial obj;
  obj.add(1.0, {0});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  auto result = solve_spatial(m);
  CHECK(result.status == SolveStatus::kOptimal);
  CHECK(result.lb == doctest::Approx(1.0));
  CHECK(result.nodes == 1);
}

TEST_CASE("time limit returns valid bounds") {
  auto inst = random_instance(GameClass::kNormalForm, 3, 900);
  SolveConfig cfg;
  cfg.time_limit_s = 0.0;  // immediate stop after the root
  auto result = solve_spatial(build_onf1(inst).model, cfg);
  if (result.status == SolveStatus::kTimeLimit && result.incumbent) {
    CHECK(result.lb <= result.ub + 1e-9);
  }
}
