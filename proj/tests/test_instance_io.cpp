#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "lfen/game.hpp"
#include "lfen/instance_io.hpp"
#include "testgames.hpp"

using namespace lfen;

namespace {

bool games_equal(const Game& a, const Game& b) {
  if (is_normal_form(a) != is_normal_form(b)) return false;
  if (action_counts(a) != action_counts(b)) return false;
  if (is_normal_form(a)) {
    const auto& x = std::get<NormalFormGame>(a);
    const auto& y = std::get<NormalFormGame>(b);
    for (int agent = 0; agent < x.num_agents(); ++agent) {
      if (x.payoff(agent).values() != y.payoff(agent).values()) return false;
    }
    return true;
  }
  const auto& x = std::get<PolymatrixGame>(a);
  const auto& y = std::get<PolymatrixGame>(b);
  for (int i = 0; i < x.num_agents(); ++i) {
    for (int j = 0; j < x.num_agents(); ++j) {
      if (i != j && x.pairwise(i, j).v != y.pairwise(i, j).v) return false;
    }
  }
  return true;
}

Game roundtrip(const Game& g, int leader, int* leader_out = nullptr) {
  std::stringstream ss;
  write_game(g, leader, ss);
  auto loaded = read_game(ss);
  if (leader_out) *leader_out = loaded.leader;
  return loaded.game;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  GeneratorSpec spec{GameClass::kNormalForm, 3, 2, 0.0, 100.0, 1};
  auto a = generate(spec);
  auto b = generate(spec);
  CHECK(games_equal(a, b));
  spec.seed = 2;
  CHECK_FALSE(games_equal(a, generate(spec)));
}

TEST_CASE("polymatrix generation fills every pair within range") {
  GeneratorSpec spec{GameClass::kPolymatrix, 3, 5, 0.0, 100.0, 7};
  auto g = generate(spec);
  const auto& pm = std::get<PolymatrixGame>(g);
  int matrices = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      ++matrices;
      for (double v : pm.pairwise(i, j).v) {
        CHECK(v >= 0.0);
        CHECK(v <= 100.0);
      }
    }
  }
  CHECK(matrices == 6);
}

TEST_CASE("degenerate payoff range yields a constant game") {
  GeneratorSpec spec{GameClass::kNormalForm, 3, 4, 5.0, 5.0, 123};
  auto g = generate(spec);
  const auto& nf = std::get<NormalFormGame>(g);
  for (double v : nf.payoff(2).values()) CHECK(v == 5.0);
}

TEST_CASE("oversized requests hit the memory cap") {
  GeneratorSpec spec{GameClass::kNormalForm, 3, 9, 0.0, 100.0, 5};
  CHECK_THROWS_AS(generate(spec, /*entry_cap=*/100), GameError);
}

TEST_CASE("round trips are bit exact") {
  SUBCASE("fixture games") {
    Game pennies(lfen::testing::pennies_game());
    int leader = -1;
    CHECK(games_equal(pennies, roundtrip(pennies, 2, &leader)));
    CHECK(leader == 2);
    Game coord(lfen::testing::coord_game());
    CHECK(games_equal(coord, roundtrip(coord, 2)));
  }
  SUBCASE("generated batch over many seeds") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      GeneratorSpec spec{seed % 2 == 0 ? GameClass::kNormalForm : GameClass::kPolymatrix,
                         3, 1 + static_cast<int>(seed % 4), 0.0, 100.0, seed};
      auto g = generate(spec);
      CHECK(games_equal(g, roundtrip(g, 2)));
    }
  }
}

TEST_CASE("parse errors carry locations and context") {
  SUBCASE("wrong arity payoff row") {
    std::stringstream ss("kind nf\nn 2\nm 2 2\nleader 1\ntensor 0\n1 2 3\n");
    CHECK_THROWS_WITH_AS(read_game(ss), doctest::Contains("agent 0"), ParseError);
  }
  SUBCASE("pm file with a tensor block") {
    std::stringstream ss("kind pm\nn 2\nm 2 2\nleader 1\ntensor 0\n1 2 3 4\n");
    CHECK_THROWS_WITH_AS(read_game(ss), doctest::Contains("tensor block in a polymatrix"),
                         ParseError);
  }
  SUBCASE("nf file with a matrix block") {
    std::stringstream ss("kind nf\nn 2\nm 2 2\nleader 0\nmatrix 0 1\n1 2 3 4\n");
    CHECK_THROWS_AS(read_game(ss), ParseError);
  }
  SUBCASE("unknown kind") {
    std::stringstream ss("kind zero-sum\n");
    CHECK_THROWS_AS(read_game(ss), ParseError);
  }
  SUBCASE("bad leader index") {
    std::stringstream ss("kind nf\nn 2\nm 2 2\nleader 5\n");
    CHECK_THROWS_AS(read_game(ss), ParseError);
  }
  SUBCASE("line numbers are reported") {
    std::stringstream ss("kind nf\nn 2\nm 2 oops\n");
    try {
      read_game(ss);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line == 3);
    }
  }
}

TEST_CASE("comments and blank lines are tolerated") {
  std::stringstream ss(
      "# tiny game\nkind nf\n\nn 2\nm 1 1\nleader 1\n"
      "tensor 0\n4\n"
      "tensor 1 # payoffs follow\n2.5\n");
  auto loaded = read_game(ss);
  CHECK(loaded.leader == 1);
  const auto& nf = std::get<NormalFormGame>(loaded.game);
  CHECK(nf.payoff(1).flat(0) == 2.5);
}
