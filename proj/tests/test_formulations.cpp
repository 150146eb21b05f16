#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lfen/formulations.hpp"
#include "lfen/instance_io.hpp"
#include "lfen/nash_oracles.hpp"
#include "testgames.hpp"

using namespace lfen;
using lfen::testing::coord_instance;
using lfen::testing::pennies_instance;

namespace {

LeaderFollowerInstance random_instance(GameClass cls, int m, std::uint64_t seed) {
  GeneratorSpec spec{cls, 3, m, 0.0, 100.0, seed};
  return LeaderFollowerInstance(generate(spec), 2);
}

LeaderFollowerInstance embedded_pennies() {
  auto pm = lfen::testing::pennies_game();
  return LeaderFollowerInstance(Game(embed_as_normal_form(pm)), 2);
}

}  // namespace

TEST_CASE("first formulation census") {
  auto inst = coord_instance();
  auto built = build_onf1(inst);
  const Model& m = built.model;
  CHECK(m.num_variables() == 2 + 2 + 2 + 2);  // d, r, r, v
  CHECK(m.num_binaries() == 0);
  CHECK(m.objective().degree() == 3);
  CHECK(m.num_constraints_of_degree(3) == 2);  // one complementarity per follower
  CHECK(m.num_constraints_of_degree(2) == 4);  // best-response rows
}

TEST_CASE("second formulation census") {
  auto inst = coord_instance();
  auto built = build_onf2(inst);
  const Model& m = built.model;
  CHECK(m.num_binaries() == 4);
  CHECK(m.objective().degree() == 3);
  CHECK(m.num_constraints_of_degree(2) == 4);  // u definitions
  CHECK(m.num_constraints_of_degree(3) == 0);
  // big-M rows carry the payoff range of each follower
  const double mf = big_m(inst.game, 0);
  bool found = false;
  for (const auto& c : m.constraints()) {
    if (c.tag == "supp_reg_0_0") {
      for (const auto& t : c.polynomial.terms) {
        if (t.degree() == 1 && m.variable(t.factors[0]).name == "s_0_0") {
          CHECK(t.coefficient == doctest::Approx(-mf));
          found = true;
        }
      }
    }
  }
  CHECK(found);
}

TEST_CASE("third formulation census") {
  auto inst = coord_instance();
  auto built = build_onf3(inst);
  const Model& m = built.model;
  CHECK(m.objective().degree() == 1);
  // y definitions: ml*(m1+m2) = 8; z definitions: ml*m1*m2 = 8
  CHECK(m.num_constraints_of_degree(2) == 16);
  CHECK(m.find_variable("y_0_1_1") >= 0);
  CHECK(m.find_variable("z_1_0_1") >= 0);
  CHECK(m.degree() == 2);
}

TEST_CASE("polymatrix formulation degrees") {
  auto inst = pennies_instance();
  SUBCASE("first: two quadratic constraints, quadratic objective") {
    auto built = build_opm1(inst);
    CHECK(built.model.objective().degree() == 2);
    CHECK(built.model.num_constraints_of_degree(2) == 2);
    CHECK(built.model.num_binaries() == 0);
  }
  SUBCASE("second: linear constraints only, quadratic objective") {
    auto built = build_opm2(inst);
    CHECK(built.model.objective().degree() == 2);
    CHECK(built.model.num_constraints_of_degree(2) == 0);
    CHECK(built.model.num_binaries() == 4);
  }
  SUBCASE("third: linear objective, y definitions quadratic") {
    auto built = build_opm3(inst);
    CHECK(built.model.objective().degree() == 1);
    CHECK(built.model.num_constraints_of_degree(2) == 8);
  }
  SUBCASE("pure-leader third is fully linear") {
    auto built = build_opm_lpfm3(inst);
    CHECK(built.model.degree() == 1);
    CHECK(built.model.num_binaries() == 4 + 2);  // support flags + commitment
  }
}

TEST_CASE("wrong game class is rejected") {
  CHECK_THROWS_AS(build_onf1(pennies_instance()), WrongGameClass);
  CHECK_THROWS_AS(build_opm1(coord_instance()), WrongGameClass);
  CHECK_THROWS_AS(build_onf_lpfm3(pennies_instance()), WrongGameClass);
  CHECK_THROWS_AS(build_opm_lpfm3(coord_instance()), WrongGameClass);
}

TEST_CASE("equilibria lift to feasible points of every mixed formulation") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto inst = random_instance(GameClass::kNormalForm, 3, 400 + seed);
    auto delta = MixedStrategy(std::vector<double>{0.5, 0.2, 0.3});
    auto records = enumerate_nes(induced_follower_game(inst, delta));
    REQUIRE(!records.empty());
    for (FormulationId id : {FormulationId::kOnf1, FormulationId::kOnf2, FormulationId::kOnf3}) {
      auto built = build_formulation(inst, id);
      for (const auto& record : records) {
        auto assignment = lift_assignment(built, inst, delta, {record.rho1, record.rho2});
        auto report = built.model.evaluate(assignment);
        CHECK(report.max_constraint_violation < 1e-7);
        CHECK(report.max_bound_violation < 1e-9);
      }
    }
  }
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto inst = random_instance(GameClass::kPolymatrix, 3, 500 + seed);
    auto delta = MixedStrategy::uniform(3);
    auto records = enumerate_nes(induced_follower_game(inst, delta));
    REQUIRE(!records.empty());
    for (FormulationId id : {FormulationId::kOpm1, FormulationId::kOpm2, FormulationId::kOpm3}) {
      auto built = build_formulation(inst, id);
      for (const auto& record : records) {
        auto assignment = lift_assignment(built, inst, delta, {record.rho1, record.rho2});
        auto report = built.model.evaluate(assignment);
        CHECK(report.max_constraint_violation < 1e-7);
      }
    }
  }
}

TEST_CASE("lifted products take their defining values") {
  auto inst = coord_instance();
  auto built = build_onf3(inst);
  MixedStrategy delta = MixedStrategy::pure(2, 0);
  MixedStrategy half = MixedStrategy::uniform(2);
  auto assignment = lift_assignment(built, inst, delta, {half, half});
  const Model& m = built.model;
  CHECK(assignment[m.require_variable("y_0_0_0")] == doctest::Approx(0.5));
  CHECK(assignment[m.require_variable("y_0_0_1")] == doctest::Approx(0.5));
  CHECK(assignment[m.require_variable("y_0_1_0")] == doctest::Approx(0.0));
  CHECK(assignment[m.require_variable("z_0_1_1")] == doctest::Approx(0.25));
  // sum of each follower's products is one at any lifted point
  double total = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) total += assignment[m.require_variable("y_1_" + std::to_string(i) + "_" + std::to_string(j))];
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("second-level models at a fixed commitment") {
  SUBCASE("polymatrix oracle is a pure binary linear program") {
    auto built = build_oracle(pennies_instance(), MixedStrategy(std::vector<double>{0.2, 0.8}),
                              TieMode::kOptimistic);
    CHECK(built.id == FormulationId::kOraclePm);
    CHECK(built.model.degree() == 1);
    CHECK(built.model.num_binaries() == 4);
    CHECK(built.fixed_delta.has_value());
  }
  SUBCASE("normal-form oracle keeps only the strategy-product quadratics") {
    auto built =
        build_oracle(coord_instance(), MixedStrategy::uniform(2), TieMode::kPessimistic);
    CHECK(built.id == FormulationId::kOracleNf);
    CHECK(built.model.objective().degree() == 1);
    CHECK(built.model.num_constraints_of_degree(2) == 4);  // w definitions
    CHECK(built.model.direction() == Direction::kMinimize);
  }
  SUBCASE("more than two followers is rejected") {
    GeneratorSpec spec{GameClass::kNormalForm, 4, 2, 0.0, 1.0, 3};
    LeaderFollowerInstance inst(generate(spec), 3);
    CHECK_THROWS_AS(build_oracle(inst, MixedStrategy::uniform(2), TieMode::kOptimistic),
                    GameError);
  }
}

TEST_CASE("extraction renormalizes, recomputes and certifies") {
  auto inst = embedded_pennies();
  auto built = build_onf2(inst);
  MixedStrategy delta = MixedStrategy::pure(2, 0);
  MixedStrategy half = MixedStrategy::uniform(2);
  auto assignment = lift_assignment(built, inst, delta, {half, half});

  SUBCASE("clean point certifies at the known value") {
    auto extracted = extract_solution(built, assignment, inst);
    CHECK(extracted.leader_value == doctest::Approx(2.0));
    CHECK(extracted.max_regret <= 1e-9);
    CHECK(extracted.objective_value == doctest::Approx(2.0));
  }
  SUBCASE("slightly off-simplex strategies are renormalized") {
    assignment.values[built.model.require_variable("r_0_0")] += 1e-10;
    auto extracted = extract_solution(built, assignment, inst);
    CHECK(extracted.rhos[0].valid(1e-12));
  }
  SUBCASE("a regret violation raises a certification error") {
    // follower 0 deviates to a pure action against a mismatched opponent
    auto bad = lift_assignment(built, inst, delta,
                               {MixedStrategy::pure(2, 0), MixedStrategy::pure(2, 0)});
    // pennies follower 1 strictly prefers to mismatch: regret 1 on support
    CHECK_THROWS_AS(extract_solution(built, bad, inst), CertificationError);
    try {
      extract_solution(built, bad, inst);
    } catch (const CertificationError& e) {
      CHECK(e.violation == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("four-follower chain formulation stays consistent") {
  // followers with strictly dominant actions pin the equilibrium
  const int n = 4;
  std::vector<int> m(n, 2);
  std::vector<PayoffTensor> payoffs;
  for (int agent = 0; agent < n; ++agent) payoffs.emplace_back(m);
  for_each_action_tuple(m, [&](std::span<const int> t) {
    for (int f = 0; f < 3; ++f) payoffs[f].at(t) = t[f] == 0 ? 1.0 : 0.0;  // action 0 dominant
    payoffs[3].at(t) = (t[0] == 0 && t[1] == 0 && t[2] == 0) ? (t[3] == 1 ? 7.0 : 3.0) : 0.0;
  });
  LeaderFollowerInstance inst(Game(NormalFormGame(m, payoffs)), 3);
  auto built = build_onf3(inst);
  CHECK(built.model.degree() == 2);
  // lifted dominant profile is feasible and scores the leader payoff
  std::vector<MixedStrategy> rhos(3, MixedStrategy::pure(2, 0));
  auto assignment = lift_assignment(built, inst, MixedStrategy::pure(2, 1), rhos);
  auto report = built.model.evaluate(assignment);
  CHECK(report.max_constraint_violation < 1e-9);
  CHECK(report.objective == doctest::Approx(7.0));
}
