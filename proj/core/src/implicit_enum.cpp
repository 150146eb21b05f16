#include <algorithm>
#include <cmath>
#include <numeric>

#include "lfen/meta.hpp"
#include "lfen/nash_oracles.hpp"

namespace lfen {

ImplicitEnumResult implicit_enumeration(const LeaderFollowerInstance& instance,
                                        const SolveConfig& config) {
  if (instance.num_followers() != 2) {
    throw GameError("implicit enumeration requires exactly two followers");
  }
  const int ml = instance.leader_actions();
  ImplicitEnumResult result;
  result.ub_table.resize(ml);
  for (int i = 0; i < ml; ++i) result.ub_table[i] = best_ce_for_leader(instance, i);

  std::vector<int> order(ml);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return result.ub_table[a] > result.ub_table[b]; });

  double lb = -kInf;
  for (int i : order) {
    if (!(result.ub_table[i] > lb)) {  // ties prune
      ++result.pruned;
      continue;
    }
    ++result.oracle_calls;
    LfenSolution sol = solve_oracle_at(instance, MixedStrategy::pure(ml, i),
                                       TieMode::kOptimistic, config);
    if (!sol.certified || !solved_to_tolerance(sol.solve)) {
      throw SolverError("second-level solve failed at pure commitment " + std::to_string(i));
    }
    if (sol.enumeration_cross_check &&
        std::abs(*sol.enumeration_cross_check - sol.leader_value) > 1e-5) {
      throw SolverError("second-level value disagrees with the enumeration oracle at action " +
                        std::to_string(i));
    }
    if (sol.leader_value > lb) {
      lb = sol.leader_value;
      result.best = std::move(sol);
      result.best_action = i;
    }
  }
  result.value = lb;
  return result;
}

}  // namespace lfen
