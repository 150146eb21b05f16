#pragma once

#include <optional>

#include "lfen/formulations.hpp"
#include "lfen/solver.hpp"

namespace lfen {

// End-to-end result of one equilibrium computation: the commitment, the
// follower profile backing the reported bound, and its certification.
struct LfenSolution {
  FormulationId method{};
  TieMode mode = TieMode::kOptimistic;
  MixedStrategy delta;
  std::vector<MixedStrategy> rhos;
  double leader_value = 0.0;
  double max_regret = 0.0;
  bool certified = false;
  // best/worst equilibrium value at delta from the support-enumeration
  // oracle, when the instance is small enough to enumerate
  std::optional<double> enumeration_cross_check;
  SolveResult solve;
};

// Solves one first-level formulation with the matching engine (LP-based
// branch-and-bound for the purely linear binary models, spatial
// branch-and-bound otherwise). Two-follower instances get an incumbent hook
// that reads the relaxation's commitment, renormalizes it, asks the
// support-enumeration oracle for the best equilibrium and lifts it to a
// feasible point.
LfenSolution solve_formulation(const LeaderFollowerInstance& instance, FormulationId id,
                               const SolveConfig& config = {}, double eps = kNeEps);

// Solves the second-level model at a fixed commitment (MILP backend for
// polymatrix games, spatial for normal form), certifies the result and
// cross-checks it against the support-enumeration oracle when enumerable.
LfenSolution solve_oracle_at(const LeaderFollowerInstance& instance, const MixedStrategy& delta,
                             TieMode mode, const SolveConfig& config = {}, double eps = kNeEps);

// True when the solve closed its gap (optimal, or stopped at the configured
// gap tolerances).
bool solved_to_tolerance(const SolveResult& result);

}  // namespace lfen
