#pragma once

#include <cstdint>
#include <vector>

#include "lfen/driver.hpp"

namespace lfen {

// --- implicit enumeration over pure commitments ------------------------------

struct ImplicitEnumResult {
  LfenSolution best;            // at the winning pure commitment
  int best_action = -1;
  double value = 0.0;
  std::vector<double> ub_table;  // correlated-equilibrium bound per action
  int oracle_calls = 0;
  int pruned = 0;
};

// Bounds every pure commitment by the leader value of the best correlated
// equilibrium, sorts actions by bound, and evaluates the second-level model
// only while the bound strictly exceeds the best value found. Two followers.
ImplicitEnumResult implicit_enumeration(const LeaderFollowerInstance& instance,
                                        const SolveConfig& config = {});

// --- surrogate-guided search over mixed commitments ---------------------------

struct BlackBoxConfig {
  int eval_budget = 0;       // total oracle evaluations; 0 means 50 * m_leader
  int init_design_size = 0;  // 0 means 2 * m_leader + 1
  int candidate_pool = 500;
  std::uint64_t seed = 1;
  TieMode mode = TieMode::kOptimistic;
  SolveConfig oracle_config{};
};

struct BlackBoxTraceRow {
  int iteration = 0;  // 0-based evaluation index
  std::vector<double> delta;
  double value = 0.0;
  double best_so_far = 0.0;
  double oracle_time_s = 0.0;
  bool failed = false;
};

struct BlackBoxResult {
  LfenSolution best;
  double value = 0.0;
  int evaluations = 0;
  std::vector<BlackBoxTraceRow> trace;
};

// Evaluates the second-level value over the commitment simplex: an initial
// design (the vertices plus seeded Dirichlet samples), then a loop fitting a
// cubic radial-basis interpolant with a linear tail in the dropped-last-
// coordinate chart, scoring a seeded Dirichlet candidate pool by
// surrogate value minus an annealed distance penalty, and evaluating the
// best candidate until the budget is spent. Every evaluation is certified.
BlackBoxResult blackbox_lfen(const LeaderFollowerInstance& instance,
                             const BlackBoxConfig& config = {});

}  // namespace lfen
