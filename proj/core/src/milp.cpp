#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <queue>

#include "lfen/solver.hpp"

namespace lfen {
namespace {

constexpr double kIntegralityTol = 1e-6;
using Clock = std::chrono::steady_clock;

// Model flattened to an LP skeleton: quadratic objective monomials are
// replaced by auxiliary variables tied down with static McCormick rows,
// exact once their binary factor is integral.
struct MilpSkeleton {
  DenseLp base;  // bounds/rows/objective over model vars + auxiliaries
  std::vector<int> binaries;  // model variable ids
  int num_model_vars = 0;
  double objective_offset = 0.0;
  bool maximize = true;
};

MilpSkeleton build_skeleton(const Model& model) {
  MilpSkeleton s;
  s.maximize = model.direction() == Direction::kMaximize;
  s.num_model_vars = model.num_variables();
  for (const auto& v : model.variables()) {
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) {
      throw SolverError("variable '" + v.name + "' must be bounded");
    }
    s.base.add_var(v.lower, v.upper);
    if (v.kind == VarKind::kBinary) s.binaries.push_back(s.base.num_vars() - 1);
  }
  for (const auto& c : model.constraints()) {
    if (c.polynomial.degree() > 1) {
      throw SolverError("constraint '" + c.tag + "' is nonlinear; only binaries plus linear rows");
    }
    LpRow row;
    row.sense = c.sense;
    double shift = 0.0;
    for (const auto& t : c.polynomial.terms) {
      if (t.degree() == 0) shift += t.coefficient;
      else row.terms.push_back({t.factors[0], t.coefficient});
    }
    row.rhs = c.rhs - shift;
    s.base.rows.push_back(std::move(row));
  }
  std::map<std::pair<VarId, VarId>, int> product_cache;
  for (const auto& t : model.objective().terms) {
    if (t.degree() == 0) {
      s.objective_offset += t.coefficient;
      continue;
    }
    if (t.degree() == 1) {
      s.base.objective[t.factors[0]] += t.coefficient;
      continue;
    }
    if (t.degree() > 2) throw SolverError("objective degree above two is not supported here");
    VarId x = t.factors[0];
    VarId y = t.factors[1];
    if (model.variable(x).kind != VarKind::kBinary) std::swap(x, y);
    if (model.variable(x).kind != VarKind::kBinary) {
      throw SolverError("quadratic objective term without a binary factor");
    }
    const auto key = std::make_pair(x, y);
    auto it = product_cache.find(key);
    int w;
    if (it != product_cache.end()) {
      w = it->second;
    } else {
      const double ylo = std::min(0.0, model.variable(y).lower);
      const double yhi = std::max(0.0, model.variable(y).upper);
      w = s.base.add_var(ylo, yhi);
      product_cache.emplace(key, w);
      const double l = model.variable(y).lower;
      const double u = model.variable(y).upper;
      // w = x*y with x binary: w <= u x, w >= l x, w <= y - l(1-x), w >= y - u(1-x)
      s.base.add_row({{w, 1.0}, {x, -u}}, Sense::kLe, 0.0);
      s.base.add_row({{w, 1.0}, {x, -l}}, Sense::kGe, 0.0);
      s.base.add_row({{w, 1.0}, {y, -1.0}, {x, -l}}, Sense::kLe, -l);
      s.base.add_row({{w, 1.0}, {y, -1.0}, {x, -u}}, Sense::kGe, -u);
    }
    s.base.objective[w] += t.coefficient;
  }
  return s;
}

struct MilpNode {
  std::vector<double> lo, hi;  // binaries only, indexed by binary position
  double bound = 0.0;          // internal max
  std::vector<double> x;
  long id = 0;
  int depth = 0;
};

struct Cmp {
  bool operator()(const MilpNode& a, const MilpNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

class MilpEngine {
 public:
  MilpEngine(const Model& model, const SolveConfig& config)
      : model_(model), cfg_(config), skel_(build_skeleton(model)) {
    sign_ = skel_.maximize ? 1.0 : -1.0;
  }

  SolveResult run() {
    start_ = Clock::now();
    const int nb = static_cast<int>(skel_.binaries.size());
    MilpNode root;
    root.lo.assign(nb, 0.0);
    root.hi.assign(nb, 1.0);
    for (int k = 0; k < nb; ++k) {
      root.lo[k] = model_.variable(skel_.binaries[k]).lower;
      root.hi[k] = model_.variable(skel_.binaries[k]).upper;
    }
    root.id = next_id_++;

    std::vector<MilpNode> open;
    const Cmp cmp;
    auto push_node = [&](MilpNode&& n) {
      open.push_back(std::move(n));
      std::push_heap(open.begin(), open.end(), cmp);
    };
    auto pop_node = [&] {
      std::pop_heap(open.begin(), open.end(), cmp);
      MilpNode n = std::move(open.back());
      open.pop_back();
      return n;
    };

    if (evaluate(&root)) push_node(std::move(root));
    SolveStatus status = SolveStatus::kOptimal;
    double global_ub = open.empty() ? lb_ : std::max(open.front().bound, lb_);
    while (!open.empty()) {
      global_ub = std::min(global_ub, std::max(open.front().bound, lb_));
      if (gap_reached(global_ub)) {
        status = SolveStatus::kGapLimit;
        break;
      }
      if (elapsed() > cfg_.time_limit_s || nodes_ >= cfg_.node_limit) {
        status = SolveStatus::kTimeLimit;
        break;
      }
      MilpNode node = pop_node();
      if (node.bound <= lb_ + prune_eps()) continue;

      // most fractional binary, ties lowest index
      int pick = -1;
      double best_frac = kIntegralityTol;
      for (int k = 0; k < static_cast<int>(skel_.binaries.size()); ++k) {
        if (node.lo[k] >= node.hi[k]) continue;
        const double v = node.x[skel_.binaries[k]];
        const double frac = std::min(v, 1.0 - v);
        if (frac > best_frac) {
          best_frac = frac;
          pick = k;
        }
      }
      if (pick < 0) continue;  // integral node was recorded as incumbent in evaluate()
      for (double fix : {0.0, 1.0}) {
        MilpNode child;
        child.lo = node.lo;
        child.hi = node.hi;
        child.lo[pick] = child.hi[pick] = fix;
        child.depth = node.depth + 1;
        child.id = next_id_++;
        if (evaluate(&child)) {
          child.bound = std::min(child.bound, node.bound);
          if (child.bound > lb_ + prune_eps()) push_node(std::move(child));
        }
      }
    }
    if (open.empty()) global_ub = lb_;
    else global_ub = std::min(global_ub, std::max(open.front().bound, lb_));

    SolveResult result;
    result.nodes = nodes_;
    result.lp_iterations = lp_iterations_;
    result.wall_time_s = elapsed();
    const bool exhausted = open.empty();
    if (exhausted && !have_incumbent_) {
      result.status = SolveStatus::kInfeasible;
      return result;
    }
    result.lb = skel_.maximize ? lb_ : -global_ub;
    result.ub = skel_.maximize ? std::max(global_ub, lb_) : -std::min(lb_, global_ub);
    result.ub = std::max(result.ub, result.lb);
    result.gaps = compute_gaps(result.lb, result.ub);
    if (have_incumbent_) {
      result.incumbent = best_;
      result.incumbent_objective = sign_ * lb_;
    }
    if (exhausted) {
      result.status = SolveStatus::kOptimal;
    } else if (status == SolveStatus::kOptimal || status == SolveStatus::kGapLimit) {
      result.status =
          result.gaps.mult <= cfg_.rel_gap_tol ? SolveStatus::kOptimal : SolveStatus::kGapLimit;
    } else {
      result.status = status;
    }
    return result;
  }

 private:
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }
  double prune_eps() const {
    return have_incumbent_ ? 1e-10 * std::max(1.0, std::abs(lb_)) : 0.0;
  }

  bool gap_reached(double internal_ub) const {
    if (!have_incumbent_) return false;
    const double lo = skel_.maximize ? lb_ : -internal_ub;
    const double hi = skel_.maximize ? std::max(internal_ub, lb_) : -std::min(lb_, internal_ub);
    const Gaps g = compute_gaps(std::min(lo, hi), std::max(lo, hi));
    return g.add <= cfg_.add_gap_tol || g.mult <= cfg_.rel_gap_tol;
  }

  bool evaluate(MilpNode* node) {
    ++nodes_;
    DenseLp lp = skel_.base;
    lp.maximize = true;
    if (!skel_.maximize) {
      for (double& c : lp.objective) c = -c;
    }
    for (std::size_t k = 0; k < skel_.binaries.size(); ++k) {
      lp.lower[skel_.binaries[k]] = node->lo[k];
      lp.upper[skel_.binaries[k]] = node->hi[k];
    }
    const LpSolution sol = solve_lp(lp);
    lp_iterations_ += sol.iterations;
    if (sol.status == LpStatus::kInfeasible) return false;
    if (sol.status != LpStatus::kOptimal) throw SolverError("node LP did not solve");
    node->bound = sol.objective + sign_ * skel_.objective_offset;
    node->x = sol.x;

    bool integral = true;
    for (int b : skel_.binaries) {
      if (std::min(sol.x[b], 1.0 - sol.x[b]) > kIntegralityTol) {
        integral = false;
        break;
      }
    }
    if (integral) {
      // clean re-solve with binaries pinned at their rounded values
      DenseLp fixed = lp;
      for (int b : skel_.binaries) {
        const double v = std::round(sol.x[b]);
        fixed.lower[b] = fixed.upper[b] = v;
      }
      const LpSolution clean = solve_lp(fixed);
      lp_iterations_ += clean.iterations;
      if (clean.status == LpStatus::kOptimal) {
        Assignment candidate;
        candidate.values.assign(clean.x.begin(), clean.x.begin() + skel_.num_model_vars);
        const EvalReport report = model_.evaluate(candidate);
        if (report.max_constraint_violation <= 1e-7 && report.max_bound_violation <= 1e-7) {
          const double value = sign_ * report.objective;
          if (!have_incumbent_ || value > lb_) {
            lb_ = value;
            best_ = candidate;
            have_incumbent_ = true;
          }
        }
      }
      return false;  // nothing left to branch under this node
    }
    return node->bound > lb_ + prune_eps();
  }

  const Model& model_;
  SolveConfig cfg_;
  MilpSkeleton skel_;
  double sign_ = 1.0;
  Clock::time_point start_;
  long next_id_ = 0;
  long nodes_ = 0;
  long lp_iterations_ = 0;
  double lb_ = -kInf;
  bool have_incumbent_ = false;
  Assignment best_;
};

}  // namespace

SolveResult solve_milp(const Model& model, const SolveConfig& config) {
  MilpEngine engine(model, config);
  return engine.run();
}

}  // namespace lfen
