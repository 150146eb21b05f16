#pragma once

#include <limits>
#include <vector>

#include "lfen/model.hpp"

namespace lfen {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearTerm {
  int var = 0;
  double coef = 0.0;
};

struct LpRow {
  std::vector<LinearTerm> terms;
  Sense sense = Sense::kLe;
  double rhs = 0.0;
};

// Linear program over bounded variables. Bounds may be +/-infinity, but the
// models built here always have finite ranges.
struct DenseLp {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> objective;
  bool maximize = false;
  std::vector<LpRow> rows;
  // optional warm-start values: nonbasic variables start at the bound
  // nearest the hint instead of their lower bound
  std::vector<double> start_hint;

  int num_vars() const { return static_cast<int>(lower.size()); }
  int add_var(double lo, double hi, double obj = 0.0) {
    lower.push_back(lo);
    upper.push_back(hi);
    objective.push_back(obj);
    return num_vars() - 1;
  }
  void add_row(std::vector<LinearTerm> terms, Sense sense, double rhs) {
    rows.push_back(LpRow{std::move(terms), sense, rhs});
  }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterLimit };

struct LpSolution {
  LpStatus status = LpStatus::kIterLimit;
  double objective = 0.0;  // in the problem's own direction
  std::vector<double> x;
  long iterations = 0;
  bool dual_feasible = false;  // reduced costs within 1e-9 of optimality sign
};

// Two-phase dense primal simplex on bounded variables. Dantzig pricing with
// Bland's rule as the anti-cycling fallback after a degenerate stall;
// finishes with one step of iterative refinement on the basic values.
LpSolution solve_lp(const DenseLp& lp, long iteration_limit = 200000);

// Wraps a degree <= 1 model (binaries treated as their [0,1] relaxation
// unless `relax_binaries` is false, in which case they must not be present).
LpSolution solve_lp(const Model& model, bool relax_binaries = true);
DenseLp lp_from_model(const Model& model, bool relax_binaries = true);

}  // namespace lfen
