#pragma once

// Shared fixture games used across the test suites.
//
//  coord_game(): three agents, agent 2 commits. The two followers play a
//  2x2 coordination game (1 on matching actions, 0 otherwise) regardless of
//  the committer's action; the committer scores 10 on (a0, a0), 1 on
//  (a1, a1), 0 otherwise. Follower equilibria: both pure matches plus the
//  uniform mixed profile, with committer values 10, 1 and 2.75.
//
//  pennies_game(): polymatrix, three agents, agent 2 commits. Followers
//  play matching pennies against each other (unique equilibrium: both
//  uniform); the committer earns 4 when agent 0 matches its own action 0.

#include <vector>

#include "lfen/game.hpp"

namespace lfen::testing {

inline NormalFormGame coord_game() {
  const std::vector<int> m{2, 2, 2};
  PayoffTensor u0(m), u1(m), u2(m);
  for (int a0 = 0; a0 < 2; ++a0) {
    for (int a1 = 0; a1 < 2; ++a1) {
      for (int al = 0; al < 2; ++al) {
        const std::vector<int> t{a0, a1, al};
        u0.at(t) = a0 == a1 ? 1.0 : 0.0;
        u1.at(t) = a0 == a1 ? 1.0 : 0.0;
        u2.at(t) = (a0 == 0 && a1 == 0) ? 10.0 : (a0 == 1 && a1 == 1 ? 1.0 : 0.0);
      }
    }
  }
  return NormalFormGame(m, {u0, u1, u2});
}

inline PolymatrixGame pennies_game() {
  const std::vector<int> m{2, 2, 2};
  Matrix u01(2, 2, {1, 0, 0, 1});   // follower 0 wants to match follower 1
  Matrix u10(2, 2, {0, 1, 1, 0});   // follower 1 wants to mismatch
  Matrix u02(2, 2);                 // leader does not affect the followers
  Matrix u12(2, 2);
  Matrix u20(2, 2, {4, 0, 0, 0});   // leader scores on (own 0, follower-0 0)
  Matrix u21(2, 2);
  // order: (0,1) (0,2) (1,0) (1,2) (2,0) (2,1)
  return PolymatrixGame(m, {u01, u02, u10, u12, u20, u21});
}

inline LeaderFollowerInstance coord_instance() {
  return LeaderFollowerInstance(coord_game(), 2);
}

inline LeaderFollowerInstance pennies_instance() {
  return LeaderFollowerInstance(pennies_game(), 2);
}

}  // namespace lfen::testing
