#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lfen/model.hpp"
#include "lfen/simplex.hpp"

namespace lfen {

struct SolverError : ModelError {
  using ModelError::ModelError;
};

enum class BranchingRule { kMostViolatedProduct, kPseudoCost };
enum class NodeOrder { kBestFirst };

struct SolveConfig {
  // multiplicative gap threshold in the same percent units as
  // compute_gaps; 1e-6 means (UB-LB)/LB <= 1e-8
  double rel_gap_tol = 1e-6;
  // additive gap threshold; also the safety valve when LB <= 0 keeps the
  // multiplicative gap pinned at its cap
  double add_gap_tol = 1e-9;
  double time_limit_s = 600.0;
  long node_limit = 50'000'000;
  std::size_t memory_cap_bytes = std::size_t{4} << 30;
  BranchingRule branching = BranchingRule::kMostViolatedProduct;
  NodeOrder node_order = NodeOrder::kBestFirst;
  // node log stream (CSV: node id, depth, LB, UB, gap, branch variable)
  std::ostream* node_log = nullptr;
};

enum class SolveStatus { kOptimal, kGapLimit, kTimeLimit, kInfeasible, kMemory };

const char* to_string(SolveStatus s);

struct Gaps {
  double mult = 0.0;  // min{(UB-LB)/LB * 100, 1e5} percent
  double add = 0.0;   // UB - LB
};

// Gap conventions for nonnegative-value problems: the multiplicative gap is
// clamped to 1e5 whenever LB <= 0. Throws on UB < LB - 1e-9.
Gaps compute_gaps(double lb, double ub);

inline constexpr double kMultGapCap = 1e5;

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  // bounds on the optimal value: lb <= opt <= ub. The incumbent attains lb
  // for maximization and ub for minimization.
  double lb = 0.0;
  double ub = 0.0;
  Gaps gaps;
  std::optional<Assignment> incumbent;
  double incumbent_objective = 0.0;
  long nodes = 0;
  long lp_iterations = 0;
  double wall_time_s = 0.0;
};

// --- McCormick relaxation ---------------------------------------------------

// One registered bilinear identity: product == a * b.
struct ProductEntry {
  VarId product = -1;
  VarId a = -1;
  VarId b = -1;
};

// Linear skeleton of a polynomial model: every monomial of degree >= 2 is
// decomposed into a chain of bilinear products over auxiliary variables, and
// constraints of the shape "var = x * y" are registered directly. The
// McCormick inequalities themselves are generated per node from the current
// bounds, so they are not part of the skeleton.
struct RelaxedModel {
  const Model* source = nullptr;
  // variable census: source variables first, auxiliaries after
  std::vector<Variable> variables;
  std::vector<ProductEntry> products;
  // linearized rows (product variables substituted)
  std::vector<LpRow> rows;
  std::vector<std::string> row_tags;
  std::vector<LinearTerm> objective;  // in the source direction
  double objective_offset = 0.0;
  bool maximize = true;
  std::vector<bool> is_binary;
  int num_source_vars = 0;
};

// Requires every variable bounded; throws otherwise.
RelaxedModel relax(const Model& model);

// The four McCormick inequalities for product = a*b over the given box,
// appended to `lp` (which must follow the RelaxedModel variable order).
void append_mccormick_rows(DenseLp* lp, const ProductEntry& product,
                           const std::vector<double>& lower, const std::vector<double>& upper);

// --- engines ----------------------------------------------------------------

// Proposes a feasible point near a relaxation solution; returns the full
// assignment over the source model's variables, or nullopt.
using IncumbentHook =
    std::function<std::optional<Assignment>(const std::vector<double>& relaxation_values)>;

// Spatial branch-and-bound on the McCormick relaxation: best-first nodes,
// binaries branched 0/1 first, then the registry product with the largest
// violation |w - a*b|, split at the relaxation value clamped to the central
// 60% of the box; feasibility-based bound tightening at every node.
SolveResult solve_spatial(const Model& model, const SolveConfig& config = {},
                          const IncumbentHook& hook = nullptr);

// LP-based branch-and-bound for models that are linear apart from binaries;
// quadratic objective monomials with at least one binary factor are
// linearized exactly through their McCormick envelopes.
SolveResult solve_milp(const Model& model, const SolveConfig& config = {});

}  // namespace lfen
