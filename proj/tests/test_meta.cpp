#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lfen/instance_io.hpp"
#include "lfen/meta.hpp"
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

// pennies with asymmetric commitment payoffs so the second action's bound
// falls below the first action's exact value
LeaderFollowerInstance skewed_pennies() {
  auto pm = lfen::testing::pennies_game();
  pm.pairwise_mutable(2, 0) = Matrix(2, 2, {4, 0, 0.8, 0});
  return LeaderFollowerInstance(Game(std::move(pm)), 2);
}

}  // namespace

TEST_CASE("implicit enumeration prunes the coordination game after one call") {
  auto result = implicit_enumeration(coord_instance());
  CHECK(result.value == doctest::Approx(10.0));
  CHECK(result.ub_table[0] == doctest::Approx(10.0));
  CHECK(result.ub_table[1] == doctest::Approx(10.0));
  CHECK(result.oracle_calls == 1);
  CHECK(result.pruned == 1);  // the tie prunes
  CHECK(result.best.certified);
}

TEST_CASE("bound ordering and pruning on skewed pennies") {
  auto inst = skewed_pennies();
  auto result = implicit_enumeration(inst);
  CHECK(result.ub_table[0] == doctest::Approx(2.0));
  CHECK(result.ub_table[1] == doctest::Approx(0.4));
  CHECK(result.best_action == 0);
  CHECK(result.value == doctest::Approx(2.0));
  CHECK(result.oracle_calls == 1);
  CHECK(result.pruned == 1);
}

TEST_CASE("constant games enumerate to the constant") {
  const std::vector<int> m{2, 2, 2};
  PayoffTensor c(m, std::vector<double>(8, 6.5));
  LeaderFollowerInstance inst(Game(NormalFormGame(m, {c, c, c})), 2);
  auto result = implicit_enumeration(inst);
  CHECK(result.value == doctest::Approx(6.5));
}

TEST_CASE("implicit enumeration equals exhaustive pure-commitment search") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (GameClass cls : {GameClass::kNormalForm, GameClass::kPolymatrix}) {
      auto inst = random_instance(cls, 3, 1000 + seed);
      auto result = implicit_enumeration(inst);
      double exhaustive = -kInf;
      for (int i = 0; i < 3; ++i) {
        auto sol = solve_oracle_at(inst, MixedStrategy::pure(3, i), TieMode::kOptimistic);
        exhaustive = std::max(exhaustive, sol.leader_value);
      }
      CHECK(result.value == doctest::Approx(exhaustive).epsilon(1e-9));
      // pruning soundness
      for (int i = 0; i < 3; ++i) {
        if (i != result.best_action) continue;
        CHECK(result.ub_table[i] >= result.value - 1e-7);
      }
    }
  }
}

TEST_CASE("surrogate search hits the pennies optimum from the vertex design") {
  BlackBoxConfig cfg;
  cfg.eval_budget = 20;
  cfg.seed = 5;
  auto result = blackbox_lfen(pennies_instance(), cfg);
  CHECK(result.value == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(result.evaluations == 20);
  CHECK(result.best.certified);
  // anytime trace is non-decreasing
  double prev = -kInf;
  for (const auto& row : result.trace) {
    CHECK(row.best_so_far >= prev - 1e-12);
    prev = row.best_so_far;
  }
}

TEST_CASE("pessimistic surrogate search is flat on the coordination game") {
  BlackBoxConfig cfg;
  cfg.eval_budget = 8;
  cfg.mode = TieMode::kPessimistic;
  cfg.seed = 3;
  auto result = blackbox_lfen(coord_instance(), cfg);
  CHECK(result.value == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("single-action committers evaluate exactly once per budget point") {
  const std::vector<int> m{2, 2, 1};
  PayoffTensor u0(m), u1(m), ul(m);
  for_each_action_tuple(m, [&](std::span<const int> t) {
    u0.at(t) = t[0] == t[1] ? 1.0 : 0.0;
    u1.at(t) = t[0] == t[1] ? 1.0 : 0.0;
    ul.at(t) = t[0] == 0 && t[1] == 0 ? 3.0 : 1.0;
  });
  LeaderFollowerInstance inst(Game(NormalFormGame(m, {u0, u1, ul})), 2);
  BlackBoxConfig cfg;
  cfg.eval_budget = 10;
  auto result = blackbox_lfen(inst, cfg);
  CHECK(result.evaluations == 1);
  CHECK(result.value == doctest::Approx(3.0));
}

TEST_CASE("pessimistic value never exceeds optimistic at the returned point") {
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    auto inst = random_instance(GameClass::kPolymatrix, 3, 1100 + seed);
    BlackBoxConfig cfg;
    cfg.eval_budget = 12;
    cfg.seed = seed;
    cfg.mode = TieMode::kPessimistic;
    auto pes = blackbox_lfen(inst, cfg);
    auto opt = solve_oracle_at(inst, pes.best.delta, TieMode::kOptimistic);
    CHECK(pes.value <= opt.leader_value + 1e-9);
  }
}

TEST_CASE("vertex design dominates the best pure commitment") {
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    auto inst = random_instance(GameClass::kPolymatrix, 2, 1200 + seed);
    BlackBoxConfig cfg;
    cfg.eval_budget = 10;
    cfg.seed = seed;
    auto result = blackbox_lfen(inst, cfg);
    auto pure = implicit_enumeration(inst);
    CHECK(result.value >= pure.value - 1e-7);
  }
}
