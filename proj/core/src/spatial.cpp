#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <optional>
#include <queue>

#include "lfen/solver.hpp"

namespace lfen {
namespace {

constexpr double kProductTol = 1e-9;
constexpr double kIntegralityTol = 1e-6;
constexpr double kIncumbentFeasTol = 1e-7;
constexpr double kBranchClampFraction = 0.2;

using Clock = std::chrono::steady_clock;

struct Node {
  std::vector<double> lo, hi;
  std::vector<double> x;  // relaxation point
  double bound = 0.0;     // internal-max objective bound
  long id = 0;
  int depth = 0;
};

struct NodeOrderCmp {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // max-heap on bound
    return a.id > b.id;                                // ties: oldest first
  }
};

class SpatialEngine {
 public:
  SpatialEngine(const Model& model, const SolveConfig& config, const IncumbentHook& hook)
      : model_(model), cfg_(config), hook_(hook), relaxed_(relax(model)) {
    nvars_ = static_cast<int>(relaxed_.variables.size());
    sign_ = relaxed_.maximize ? 1.0 : -1.0;
    original_width_.resize(nvars_);
    for (int j = 0; j < nvars_; ++j) {
      original_width_[j] =
          std::max(relaxed_.variables[j].upper - relaxed_.variables[j].lower, 1e-12);
    }
    obj_.assign(nvars_, 0.0);
    for (const auto& t : relaxed_.objective) obj_[t.var] += sign_ * t.coef;
    obj_offset_ = sign_ * relaxed_.objective_offset;
  }

  SolveResult run() {
    start_ = Clock::now();
    Node root;
    root.lo.resize(nvars_);
    root.hi.resize(nvars_);
    for (int j = 0; j < nvars_; ++j) {
      root.lo[j] = relaxed_.variables[j].lower;
      root.hi[j] = relaxed_.variables[j].upper;
    }
    root.id = next_id_++;
    root.depth = 0;

    std::vector<Node> open;  // binary max-heap on bound
    const NodeOrderCmp cmp;
    auto push_node = [&](Node&& n) {
      open.push_back(std::move(n));
      std::push_heap(open.begin(), open.end(), cmp);
    };
    auto pop_node = [&]() {
      std::pop_heap(open.begin(), open.end(), cmp);
      Node n = std::move(open.back());
      open.pop_back();
      return n;
    };
    bool root_alive = evaluate_node(&root);
    if (root_alive && !relaxed_.products.empty()) {
      tighten_root(&root);
      Node refreshed;
      refreshed.lo = root.lo;
      refreshed.hi = root.hi;
      refreshed.id = root.id;
      refreshed.depth = 0;
      root_alive = evaluate_node(&refreshed);
      root = std::move(refreshed);
    }
    if (root_alive) push_node(std::move(root));

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
      const std::size_t node_bytes = sizeof(Node) + 3 * sizeof(double) * nvars_;
      if (open.size() * node_bytes > cfg_.memory_cap_bytes) {
        status = SolveStatus::kMemory;
        break;
      }

      Node node = pop_node();
      if (node.bound <= lb_ + prune_eps()) continue;

      branch(node, [&](Node&& child) {
        child.bound = std::min(child.bound, node.bound);
        if (child.bound > lb_ + prune_eps()) push_node(std::move(child));
      });
    }
    if (open.empty()) {
      global_ub = lb_;
    } else {
      global_ub = std::min(global_ub, std::max(open.front().bound, lb_));
    }

    SolveResult result;
    result.nodes = nodes_;
    result.lp_iterations = lp_iterations_;
    result.wall_time_s = elapsed();
    const bool exhausted = open.empty();
    if (exhausted && !have_incumbent_) {
      result.status = SolveStatus::kInfeasible;
      return result;
    }
    result.lb = relaxed_.maximize ? lb_ : -global_ub;
    result.ub = relaxed_.maximize ? std::max(global_ub, lb_) : -std::min(lb_, global_ub);
    result.ub = std::max(result.ub, result.lb);
    result.gaps = compute_gaps(result.lb, result.ub);
    if (have_incumbent_) {
      result.incumbent = best_assignment_;
      result.incumbent_objective = sign_ * lb_;
    }
    if (exhausted) {
      // proven exact; the multiplicative gap may still sit at its cap when
      // the optimal value is nonpositive
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
    const double lo = relaxed_.maximize ? lb_ : -internal_ub;
    const double hi = relaxed_.maximize ? std::max(internal_ub, lb_) : -std::min(lb_, internal_ub);
    const Gaps g = compute_gaps(std::min(lo, hi), std::max(lo, hi));
    return g.add <= cfg_.add_gap_tol || g.mult <= cfg_.rel_gap_tol;
  }

  static void interval_product(double alo, double ahi, double blo, double bhi, double* lo,
                               double* hi) {
    const double c1 = alo * blo, c2 = alo * bhi, c3 = ahi * blo, c4 = ahi * bhi;
    *lo = std::min(std::min(c1, c2), std::min(c3, c4));
    *hi = std::max(std::max(c1, c2), std::max(c3, c4));
  }

  static bool reverse_divide(double wlo, double whi, double blo, double bhi, double* alo,
                             double* ahi, bool* changed) {
    if (blo <= 1e-12 && bhi >= -1e-12) return true;  // divisor box straddles zero
    const double c1 = wlo / blo, c2 = wlo / bhi, c3 = whi / blo, c4 = whi / bhi;
    const double qlo = std::min(std::min(c1, c2), std::min(c3, c4));
    const double qhi = std::max(std::max(c1, c2), std::max(c3, c4));
    if (qlo > *alo + 1e-12) {
      *alo = qlo;
      *changed = true;
    }
    if (qhi < *ahi - 1e-12) {
      *ahi = qhi;
      *changed = true;
    }
    return *alo <= *ahi + 1e-9;
  }

  bool tighten_row(const LpRow& row, std::vector<double>* lo_ptr, std::vector<double>* hi_ptr,
                   bool* changed) const {
    auto& lo = *lo_ptr;
    auto& hi = *hi_ptr;
    double min_act = 0.0, max_act = 0.0;
    for (const auto& t : row.terms) {
      if (t.coef > 0.0) {
        min_act += t.coef * lo[t.var];
        max_act += t.coef * hi[t.var];
      } else {
        min_act += t.coef * hi[t.var];
        max_act += t.coef * lo[t.var];
      }
    }
    const bool upper_active = row.sense != Sense::kGe;  // lhs <= rhs
    const bool lower_active = row.sense != Sense::kLe;  // lhs >= rhs
    if (upper_active && min_act > row.rhs + 1e-7) return false;
    if (lower_active && max_act < row.rhs - 1e-7) return false;
    for (const auto& t : row.terms) {
      const double contrib_min = t.coef > 0.0 ? t.coef * lo[t.var] : t.coef * hi[t.var];
      const double contrib_max = t.coef > 0.0 ? t.coef * hi[t.var] : t.coef * lo[t.var];
      if (upper_active) {
        const double slack = row.rhs - (min_act - contrib_min);
        if (t.coef > 0.0) {
          const double new_hi = slack / t.coef;
          if (new_hi < lo[t.var] - 1e-9) return false;
          if (new_hi < hi[t.var] - 1e-12) {
            hi[t.var] = std::max(new_hi, lo[t.var]);
            *changed = true;
          }
        } else {
          const double new_lo = slack / t.coef;
          if (new_lo > hi[t.var] + 1e-9) return false;
          if (new_lo > lo[t.var] + 1e-12) {
            lo[t.var] = std::min(new_lo, hi[t.var]);
            *changed = true;
          }
        }
      }
      if (lower_active) {
        const double slack = row.rhs - (max_act - contrib_max);
        if (t.coef > 0.0) {
          const double new_lo = slack / t.coef;
          if (new_lo > hi[t.var] + 1e-9) return false;
          if (new_lo > lo[t.var] + 1e-12) {
            lo[t.var] = std::min(new_lo, hi[t.var]);
            *changed = true;
          }
        } else {
          const double new_hi = slack / t.coef;
          if (new_hi < lo[t.var] - 1e-9) return false;
          if (new_hi < hi[t.var] - 1e-12) {
            hi[t.var] = std::max(new_hi, lo[t.var]);
            *changed = true;
          }
        }
      }
    }
    return true;
  }

  bool fbbt(std::vector<double>* lo_ptr, std::vector<double>* hi_ptr) const {
    auto& lo = *lo_ptr;
    auto& hi = *hi_ptr;
    for (int round = 0; round < 4; ++round) {
      bool changed = false;
      for (const auto& row : relaxed_.rows) {
        if (!tighten_row(row, &lo, &hi, &changed)) return false;
      }
      for (const auto& p : relaxed_.products) {
        double plo, phi;
        interval_product(lo[p.a], hi[p.a], lo[p.b], hi[p.b], &plo, &phi);
        if (plo > hi[p.product] + 1e-9 || phi < lo[p.product] - 1e-9) return false;
        if (plo > lo[p.product] + 1e-12) {
          lo[p.product] = plo;
          changed = true;
        }
        if (phi < hi[p.product] - 1e-12) {
          hi[p.product] = phi;
          changed = true;
        }
        if (!reverse_divide(lo[p.product], hi[p.product], lo[p.b], hi[p.b], &lo[p.a], &hi[p.a],
                            &changed) ||
            !reverse_divide(lo[p.product], hi[p.product], lo[p.a], hi[p.a], &lo[p.b], &hi[p.b],
                            &changed)) {
          return false;
        }
      }
      for (int j = 0; j < nvars_; ++j) {
        if (!relaxed_.is_binary[j]) continue;
        if (lo[j] > 1e-9 && lo[j] < 1.0) {
          lo[j] = 1.0;
          changed = true;
        }
        if (hi[j] < 1.0 - 1e-9 && hi[j] > 0.0) {
          hi[j] = 0.0;
          changed = true;
        }
        if (lo[j] > hi[j] + 1e-9) return false;
      }
      if (!changed) break;
    }
    return true;
  }

  // Folds variables pinned by branching/FBBT into constants and drops rows
  // already implied by the box; returns false when the node is infeasible.
  bool build_reduced_lp(const Node& node, DenseLp* lp, std::vector<int>* map,
                        double* fixed_obj) const {
    constexpr double kFixedTol = 1e-12;
    map->assign(nvars_, -1);
    *fixed_obj = obj_offset_;
    for (int j = 0; j < nvars_; ++j) {
      if (node.hi[j] - node.lo[j] <= kFixedTol) {
        *fixed_obj += obj_[j] * 0.5 * (node.lo[j] + node.hi[j]);
      } else {
        (*map)[j] = lp->add_var(node.lo[j], node.hi[j], obj_[j]);
      }
    }
    auto fold_row = [&](const LpRow& row) -> std::optional<bool> {
      // returns nullopt: infeasible; false: redundant; true: row appended
      LpRow folded;
      folded.sense = row.sense;
      folded.rhs = row.rhs;
      double min_act = 0.0, max_act = 0.0;
      double scale = 1.0;
      for (const auto& t : row.terms) {
        scale = std::max(scale, std::abs(t.coef));
        const int v = (*map)[t.var];
        if (v < 0) {
          folded.rhs -= t.coef * 0.5 * (node.lo[t.var] + node.hi[t.var]);
          continue;
        }
        folded.terms.push_back({v, t.coef});
        if (t.coef > 0.0) {
          min_act += t.coef * node.lo[t.var];
          max_act += t.coef * node.hi[t.var];
        } else {
          min_act += t.coef * node.hi[t.var];
          max_act += t.coef * node.lo[t.var];
        }
      }
      const double feas_eps = 1e-7 * scale;
      const bool upper_active = row.sense != Sense::kGe;
      const bool lower_active = row.sense != Sense::kLe;
      if (upper_active && min_act > folded.rhs + feas_eps) return std::nullopt;
      if (lower_active && max_act < folded.rhs - feas_eps) return std::nullopt;
      const bool upper_redundant = !upper_active || max_act <= folded.rhs + 1e-12;
      const bool lower_redundant = !lower_active || min_act >= folded.rhs - 1e-12;
      if ((upper_redundant && lower_redundant) || folded.terms.empty()) return false;
      lp->rows.push_back(std::move(folded));
      return true;
    };
    for (const auto& row : relaxed_.rows) {
      if (!fold_row(row)) return false;
    }
    DenseLp envelope;
    for (const auto& p : relaxed_.products) {
      envelope.rows.clear();
      append_mccormick_rows(&envelope, p, node.lo, node.hi);
      for (const auto& row : envelope.rows) {
        if (!fold_row(row)) return false;
      }
    }
    return true;
  }

  // Optimality-based tightening at the root: minimize and maximize every
  // product-involved variable over the relaxation intersected with the
  // incumbent's objective cut; optimal points survive, so the tightened box
  // is valid for the search.
  void tighten_root(Node* node) {
    std::vector<char> involved(nvars_, 0);
    for (const auto& p : relaxed_.products) {
      involved[p.a] = involved[p.b] = 1;
      involved[p.product] = 1;
    }
    DenseLp lp;
    lp.maximize = true;
    std::vector<int> map;
    double fixed_obj = 0.0;
    if (!build_reduced_lp(*node, &lp, &map, &fixed_obj)) return;
    if (have_incumbent_) {
      // objective >= lb - margin
      std::vector<LinearTerm> cut;
      for (int j = 0; j < nvars_; ++j) {
        if (map[j] >= 0 && obj_[j] != 0.0) cut.push_back({map[j], obj_[j]});
      }
      const double margin = std::max(1e-7, 1e-9 * std::abs(lb_));
      if (!cut.empty()) lp.add_row(std::move(cut), Sense::kGe, lb_ - fixed_obj - margin);
    }
    for (int j = 0; j < nvars_; ++j) {
      if (!involved[j] || map[j] < 0) continue;
      for (bool maximize : {false, true}) {
        std::fill(lp.objective.begin(), lp.objective.end(), 0.0);
        lp.objective[map[j]] = maximize ? 1.0 : -1.0;
        const LpSolution sol = solve_lp(lp);
        lp_iterations_ += sol.iterations;
        if (sol.status != LpStatus::kOptimal) continue;
        if (maximize) {
          const double new_hi = sol.objective + 1e-9 * std::max(1.0, std::abs(sol.objective));
          if (new_hi < node->hi[j]) node->hi[j] = std::max(new_hi, node->lo[j]);
        } else {
          const double new_lo = -sol.objective - 1e-9 * std::max(1.0, std::abs(sol.objective));
          if (new_lo > node->lo[j]) node->lo[j] = std::min(new_lo, node->hi[j]);
        }
        lp.lower[map[j]] = node->lo[j];
        lp.upper[map[j]] = node->hi[j];
      }
    }
  }

  // FBBT + LP; fills bound and relaxation point. False when prunable.
  // An LP that fails on its iteration limit keeps the node alive with an
  // inherited bound and no relaxation point (midpoint branching follows).
  bool evaluate_node(Node* node, const std::vector<double>* hint = nullptr) {
    ++nodes_;
    if (!fbbt(&node->lo, &node->hi)) return false;

    DenseLp lp;
    lp.maximize = true;
    std::vector<int> map;
    double fixed_obj = 0.0;
    if (!build_reduced_lp(*node, &lp, &map, &fixed_obj)) return false;
    if (hint && !hint->empty()) {
      lp.start_hint.resize(lp.num_vars());
      for (int j = 0; j < nvars_; ++j) {
        if (map[j] >= 0) lp.start_hint[map[j]] = (*hint)[j];
      }
    }

    const LpSolution sol = solve_lp(lp);
    lp_iterations_ += sol.iterations;
    if (sol.status == LpStatus::kInfeasible) return false;
    if (sol.status != LpStatus::kOptimal) {
      node->bound = kInf;  // clamped to the parent bound by the caller
      node->x.clear();
      return true;
    }
    node->bound = sol.objective + fixed_obj;
    node->x.resize(nvars_);
    for (int j = 0; j < nvars_; ++j) {
      (*node).x[j] = map[j] >= 0 ? sol.x[map[j]] : 0.5 * (node->lo[j] + node->hi[j]);
    }

    try_lp_incumbent(node->x);
    maybe_call_hook(*node, node->x);
    return node->bound > lb_ + prune_eps();
  }

  void try_lp_incumbent(const std::vector<double>& x) {
    for (const auto& p : relaxed_.products) {
      if (std::abs(x[p.product] - x[p.a] * x[p.b]) > 1e-7) return;
    }
    for (int j = 0; j < nvars_; ++j) {
      if (relaxed_.is_binary[j] && std::min(x[j], 1.0 - x[j]) > kIntegralityTol) return;
    }
    Assignment candidate;
    candidate.values.assign(x.begin(), x.begin() + relaxed_.num_source_vars);
    offer_incumbent(candidate);
  }

  void maybe_call_hook(const Node& node, const std::vector<double>& x) {
    if (!hook_) return;
    if (node.depth > 3 && node.id % 5 != 0) return;
    auto proposal = hook_(x);
    if (proposal) offer_incumbent(*proposal);
  }

  void offer_incumbent(const Assignment& candidate) {
    const EvalReport report = model_.evaluate(candidate);
    if (report.max_constraint_violation > kIncumbentFeasTol ||
        report.max_bound_violation > kIncumbentFeasTol ||
        report.max_integrality_violation > kIntegralityTol) {
      return;
    }
    const double value = sign_ * report.objective;
    if (!have_incumbent_ || value > lb_) {
      lb_ = value;
      best_assignment_ = candidate;
      have_incumbent_ = true;
    }
  }

  void log_node(const Node& node, const std::string& branch_var) const {
    if (!cfg_.node_log) return;
    const double lo = relaxed_.maximize ? lb_ : -node.bound;
    const double hi = relaxed_.maximize ? node.bound : -lb_;
    Gaps g;
    if (have_incumbent_) g = compute_gaps(std::min(lo, hi), std::max(lo, hi));
    else g.mult = kMultGapCap, g.add = kInf;
    *cfg_.node_log << node.id << ',' << node.depth << ',' << (have_incumbent_ ? lo : -kInf) << ','
                   << hi << ',' << g.mult << ',' << branch_var << '\n';
  }

  // Midpoint branching on the widest product box, used when the node LP
  // failed and no relaxation point exists.
  template <typename Sink>
  void branch_without_point(const Node& node, Sink&& sink) {
    for (int j = 0; j < nvars_; ++j) {
      if (relaxed_.is_binary[j] && node.lo[j] < node.hi[j]) {
        log_node(node, relaxed_.variables[j].name);
        for (double fix : {0.0, 1.0}) {
          Node child;
          child.lo = node.lo;
          child.hi = node.hi;
          child.lo[j] = child.hi[j] = fix;
          child.depth = node.depth + 1;
          child.id = next_id_++;
          if (evaluate_node(&child)) sink(std::move(child));
        }
        return;
      }
    }
    int best = -1;
    double best_area = 1e-18;
    for (std::size_t k = 0; k < relaxed_.products.size(); ++k) {
      const auto& p = relaxed_.products[k];
      const double area = (node.hi[p.a] - node.lo[p.a]) * (node.hi[p.b] - node.lo[p.b]);
      if (area > best_area) {
        best_area = area;
        best = static_cast<int>(k);
      }
    }
    if (best < 0) {
      log_node(node, "-");
      return;
    }
    const auto& p = relaxed_.products[best];
    const double rel_a = (node.hi[p.a] - node.lo[p.a]) / original_width_[p.a];
    const double rel_b = (node.hi[p.b] - node.lo[p.b]) / original_width_[p.b];
    const VarId var = rel_a >= rel_b ? p.a : p.b;
    const double split = 0.5 * (node.lo[var] + node.hi[var]);
    log_node(node, relaxed_.variables[var].name);
    for (int side = 0; side < 2; ++side) {
      Node child;
      child.lo = node.lo;
      child.hi = node.hi;
      (side == 0 ? child.hi : child.lo)[var] = split;
      child.depth = node.depth + 1;
      child.id = next_id_++;
      if (evaluate_node(&child)) sink(std::move(child));
    }
  }

  template <typename Sink>
  void branch(const Node& node, Sink&& sink) {
    if (node.x.empty()) {
      branch_without_point(node, sink);
      return;
    }
    const std::vector<double>& x = node.x;

    // binaries first, split 0/1
    int best_binary = -1;
    double best_frac = kIntegralityTol;
    for (int j = 0; j < nvars_; ++j) {
      if (!relaxed_.is_binary[j] || node.lo[j] >= node.hi[j]) continue;
      const double frac = std::min(std::max(x[j], 0.0), std::max(1.0 - x[j], 0.0));
      if (frac > best_frac) {
        best_frac = frac;
        best_binary = j;
      }
    }
    if (best_binary >= 0) {
      log_node(node, relaxed_.variables[best_binary].name);
      for (double fix : {0.0, 1.0}) {
        Node child;
        child.lo = node.lo;
        child.hi = node.hi;
        child.lo[best_binary] = fix;
        child.hi[best_binary] = fix;
        child.depth = node.depth + 1;
        child.id = next_id_++;
        if (evaluate_node(&child, &node.x)) sink(std::move(child));
      }
      return;
    }

    // most-violated product, ties by registry order
    int best_product = -1;
    double best_violation = kProductTol;
    for (std::size_t k = 0; k < relaxed_.products.size(); ++k) {
      const auto& p = relaxed_.products[k];
      const double violation = std::abs(x[p.product] - x[p.a] * x[p.b]);
      if (violation > best_violation) {
        best_violation = violation;
        best_product = static_cast<int>(k);
      }
    }
    if (best_product < 0) {
      log_node(node, "-");
      return;  // relaxation point feasible; leaf
    }

    const auto& p = relaxed_.products[best_product];
    // split the factor with the larger width relative to its original box;
    // absolute width would chase wide payoff-valued variables forever while
    // the envelope turns exact as soon as a strategy factor is pinned
    const double width_a = node.hi[p.a] - node.lo[p.a];
    const double width_b = node.hi[p.b] - node.lo[p.b];
    const double rel_a = width_a / original_width_[p.a];
    const double rel_b = width_b / original_width_[p.b];
    const VarId var = rel_a >= rel_b ? p.a : p.b;
    const double width = node.hi[var] - node.lo[var];
    if (width <= 1e-12) {
      log_node(node, "-");
      return;
    }
    const double lo = node.lo[var];
    const double hi = node.hi[var];
    const double split =
        std::clamp(x[var], lo + kBranchClampFraction * width, hi - kBranchClampFraction * width);
    log_node(node, relaxed_.variables[var].name);
    for (int side = 0; side < 2; ++side) {
      Node child;
      child.lo = node.lo;
      child.hi = node.hi;
      (side == 0 ? child.hi : child.lo)[var] = split;
      child.depth = node.depth + 1;
      child.id = next_id_++;
      if (evaluate_node(&child, &node.x)) sink(std::move(child));
    }
  }

  const Model& model_;
  SolveConfig cfg_;
  IncumbentHook hook_;
  RelaxedModel relaxed_;
  int nvars_ = 0;
  double sign_ = 1.0;
  std::vector<double> obj_;
  double obj_offset_ = 0.0;
  Clock::time_point start_;

  std::vector<double> original_width_;
  long next_id_ = 0;
  long nodes_ = 0;
  long lp_iterations_ = 0;
  double lb_ = -kInf;
  bool have_incumbent_ = false;
  Assignment best_assignment_;
};

}  // namespace

SolveResult solve_spatial(const Model& model, const SolveConfig& config, const IncumbentHook& hook) {
  SpatialEngine engine(model, config, hook);
  return engine.run();
}

}  // namespace lfen
