#include "lfen/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace lfen {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasibilityTol = 1e-9;
// Consecutive degenerate pivots before switching from Dantzig pricing to
// Bland's anti-cycling rule.
constexpr int kStallLimit = 60;

enum class VarState : unsigned char { kBasic, kAtLower, kAtUpper, kFreeZero };

class Tableau {
 public:
  Tableau(const DenseLp& lp, long iteration_limit)
      : lp_(lp), iteration_limit_(iteration_limit) {
    build();
  }

  LpSolution run() {
    LpSolution result;
    if (bad_bounds_) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    if (needs_phase1_) {
      set_phase_costs(/*phase1=*/true);
      if (!iterate()) {
        result.status = LpStatus::kIterLimit;
        result.iterations = iterations_;
        return result;
      }
      double infeasibility = 0.0;
      for (int a : artificial_cols_) infeasibility += std::abs(value_of(a));
      if (infeasibility > kFeasibilityTol * scale_ * 10.0) {
        result.status = LpStatus::kInfeasible;
        result.iterations = iterations_;
        return result;
      }
    }
    lock_artificials();
    set_phase_costs(/*phase1=*/false);
    const bool finished = iterate();
    result.iterations = iterations_;
    if (!finished) {
      result.status = LpStatus::kIterLimit;
      return result;
    }
    if (unbounded_) {
      result.status = LpStatus::kUnbounded;
      return result;
    }
    refine();
    result.status = LpStatus::kOptimal;
    result.x.resize(lp_.num_vars());
    for (int j = 0; j < lp_.num_vars(); ++j) result.x[j] = value_of(j);
    result.dual_feasible = dual_feasible();
    return result;
  }

 private:
  int rows() const { return static_cast<int>(lp_.rows.size()); }

  double& at(int r, int c) { return tab_[static_cast<std::size_t>(r) * ncols_ + c]; }
  double at(int r, int c) const { return tab_[static_cast<std::size_t>(r) * ncols_ + c]; }

  double value_of(int j) const {
    switch (state_[j]) {
      case VarState::kBasic: return beta_[basic_row_[j]];
      case VarState::kAtLower: return lo_[j];
      case VarState::kAtUpper: return up_[j];
      case VarState::kFreeZero: return 0.0;
    }
    return 0.0;
  }

  void build() {
    const int m = rows();
    const int n = lp_.num_vars();
    // row equilibration: divide each row by its largest structural
    // coefficient so payoff-scaled and unit rows pivot comparably
    rows_.resize(m);
    for (int i = 0; i < m; ++i) {
      rows_[i] = lp_.rows[i];
      double scale = 0.0;
      for (const auto& t : rows_[i].terms) scale = std::max(scale, std::abs(t.coef));
      if (scale > 1.0) {
        const double inv = 1.0 / scale;
        for (auto& t : rows_[i].terms) t.coef *= inv;
        rows_[i].rhs *= inv;
      }
    }
    int n_slack = 0;
    for (const auto& r : rows_) n_slack += r.sense == Sense::kEq ? 0 : 1;
    ncols_ = n + n_slack + m;
    tab_.assign(static_cast<std::size_t>(m) * ncols_, 0.0);
    beta_.assign(m, 0.0);
    lo_.assign(ncols_, 0.0);
    up_.assign(ncols_, 0.0);
    cost_.assign(ncols_, 0.0);
    state_.assign(ncols_, VarState::kAtLower);
    basic_row_.assign(ncols_, -1);
    basic_var_.assign(m, -1);
    art_sign_.assign(m, 1.0);
    slack_col_.assign(m, -1);
    artificial_cols_.clear();
    artificial_cols_.reserve(m);

    scale_ = 1.0;
    for (int j = 0; j < n; ++j) {
      lo_[j] = lp_.lower[j];
      up_[j] = lp_.upper[j];
      if (lo_[j] > up_[j] + kFeasibilityTol) bad_bounds_ = true;
      if (std::isfinite(lo_[j])) {
        state_[j] = VarState::kAtLower;
      } else if (std::isfinite(up_[j])) {
        state_[j] = VarState::kAtUpper;
      } else {
        state_[j] = VarState::kFreeZero;
      }
      if (!lp_.start_hint.empty() && std::isfinite(lo_[j]) && std::isfinite(up_[j])) {
        const double hint = lp_.start_hint[j];
        state_[j] = std::abs(hint - up_[j]) < std::abs(hint - lo_[j]) ? VarState::kAtUpper
                                                                      : VarState::kAtLower;
      }
    }
    if (bad_bounds_) return;

    int next = n;
    for (int i = 0; i < m; ++i) {
      const auto& row = rows_[i];
      for (const auto& t : row.terms) at(i, t.var) += t.coef;
      scale_ = std::max(scale_, std::abs(row.rhs));
      if (row.sense != Sense::kEq) {
        const int s = next++;
        slack_col_[i] = s;
        at(i, s) = row.sense == Sense::kLe ? 1.0 : -1.0;
        lo_[s] = 0.0;
        up_[s] = kInf;
        state_[s] = VarState::kAtLower;
      }
    }

    needs_phase1_ = false;
    // artificial columns only where the slack cannot start basic; the
    // column block was sized for the worst case, unused space is trimmed
    for (int i = 0; i < m; ++i) {
      double lhs = 0.0;
      for (const auto& t : rows_[i].terms) lhs += t.coef * value_of(t.var);
      const double residual = rows_[i].rhs - lhs;

      const int s = slack_col_[i];
      const double slack_value = s >= 0 ? residual * at(i, s) : -1.0;
      if (s >= 0 && slack_value >= -kFeasibilityTol) {
        make_basic(s, i, std::max(slack_value, 0.0));
      } else {
        const int a = next++;
        artificial_cols_.push_back(a);
        art_row_.push_back(i);
        art_sign_[i] = residual < 0.0 ? -1.0 : 1.0;
        at(i, a) = art_sign_[i];
        lo_[a] = 0.0;
        up_[a] = kInf;
        make_basic(a, i, std::abs(residual));
        if (std::abs(residual) > kFeasibilityTol) needs_phase1_ = true;
      }
    }
    ncols_used_ = next;
    col_entries_.assign(ncols_used_, {});
    for (int i = 0; i < m; ++i) {
      for (const auto& t : rows_[i].terms) col_entries_[t.var].push_back({i, t.coef});
      if (slack_col_[i] >= 0) {
        col_entries_[slack_col_[i]].push_back({i, rows_[i].sense == Sense::kLe ? 1.0 : -1.0});
      }
    }
    for (std::size_t k = 0; k < artificial_cols_.size(); ++k) {
      col_entries_[artificial_cols_[k]].push_back({art_row_[k], art_sign_[art_row_[k]]});
    }
    // normalize rows whose basic column (a -1 slack or artificial) is negative
    for (int i = 0; i < m; ++i) {
      if (at(i, basic_var_[i]) == -1.0) {
        double* row = &tab_[static_cast<std::size_t>(i) * ncols_];
        for (int j = 0; j < ncols_used_; ++j) row[j] = -row[j];
      }
    }
  }

  void make_basic(int var, int row, double value) {
    state_[var] = VarState::kBasic;
    basic_row_[var] = row;
    basic_var_[row] = var;
    beta_[row] = value;
  }

  void set_phase_costs(bool phase1) {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    if (phase1) {
      for (int a : artificial_cols_) cost_[a] = 1.0;
    } else {
      const double sign = lp_.maximize ? -1.0 : 1.0;
      for (int j = 0; j < lp_.num_vars(); ++j) cost_[j] = sign * lp_.objective[j];
    }
    compute_reduced_costs();
  }

  void compute_reduced_costs() {
    const int m = rows();
    red_.assign(ncols_, 0.0);
    std::vector<double> cb(m);
    bool any = false;
    for (int i = 0; i < m; ++i) {
      cb[i] = cost_[basic_var_[i]];
      any = any || cb[i] != 0.0;
    }
    for (int j = 0; j < ncols_used_; ++j) red_[j] = cost_[j];
    if (!any) return;
    for (int i = 0; i < m; ++i) {
      const double c = cb[i];
      if (c == 0.0) continue;
      const double* row = &tab_[static_cast<std::size_t>(i) * ncols_];
      for (int j = 0; j < ncols_used_; ++j) red_[j] -= c * row[j];
    }
  }

  void lock_artificials() {
    for (int a : artificial_cols_) {
      lo_[a] = up_[a] = 0.0;
      if (state_[a] != VarState::kBasic) state_[a] = VarState::kAtLower;
    }
  }

  bool eligible(int j, int* direction) const {
    const VarState s = state_[j];
    if (s == VarState::kBasic) return false;
    if (lo_[j] == up_[j] && s != VarState::kFreeZero) return false;
    const double z = red_[j];
    if (s == VarState::kAtLower && z < -kCostTol) {
      *direction = +1;
      return true;
    }
    if (s == VarState::kAtUpper && z > kCostTol) {
      *direction = -1;
      return true;
    }
    if (s == VarState::kFreeZero && std::abs(z) > kCostTol) {
      *direction = z < 0.0 ? +1 : -1;
      return true;
    }
    return false;
  }

  bool iterate() {
    unbounded_ = false;
    int stall = 0;
    bool bland = false;
    for (;;) {
      if (iterations_ >= iteration_limit_) return false;

      int enter = -1;
      int dir = 0;
      if (!bland) {
        double best = kCostTol;
        for (int j = 0; j < ncols_used_; ++j) {
          int d = 0;
          if (!eligible(j, &d)) continue;
          const double magnitude = std::abs(red_[j]);
          if (magnitude > best) {
            best = magnitude;
            enter = j;
            dir = d;
          }
        }
      } else {
        for (int j = 0; j < ncols_used_; ++j) {
          int d = 0;
          if (eligible(j, &d)) {
            enter = j;
            dir = d;
            break;
          }
        }
      }
      if (enter < 0) return true;

      // ratio test
      const int m = rows();
      double limit = kInf;
      if (std::isfinite(lo_[enter]) && std::isfinite(up_[enter])) limit = up_[enter] - lo_[enter];
      int leave_row = -1;
      double leave_bound = 0.0;
      for (int i = 0; i < m; ++i) {
        const double a = at(i, enter) * dir;
        if (std::abs(a) <= kPivotTol) continue;
        const int bv = basic_var_[i];
        double ratio;
        double bound;
        if (a > 0.0) {
          if (!std::isfinite(lo_[bv])) continue;
          ratio = (beta_[i] - lo_[bv]) / a;
          bound = lo_[bv];
        } else {
          if (!std::isfinite(up_[bv])) continue;
          ratio = (beta_[i] - up_[bv]) / a;
          bound = up_[bv];
        }
        if (ratio < 0.0) ratio = 0.0;
        const bool strictly_better = ratio < limit - 1e-12;
        const bool tie = !strictly_better && ratio <= limit + 1e-12 && leave_row >= 0;
        bool take = strictly_better || (ratio < limit && leave_row < 0);
        if (tie) {
          if (bland) {
            take = basic_var_[i] < basic_var_[leave_row];
          } else {
            take = std::abs(at(i, enter)) > std::abs(at(leave_row, enter));
          }
        }
        if (take) {
          leave_row = i;
          leave_bound = bound;
          limit = std::min(limit, ratio);
        }
      }
      if (!std::isfinite(limit)) {
        unbounded_ = true;
        return true;
      }
      ++iterations_;
      if (leave_row < 0) {
        // bound flip across the entering variable's whole range
        const double step = limit * dir;
        for (int i = 0; i < m; ++i) {
          const double a = at(i, enter);
          if (a != 0.0) beta_[i] -= a * step;
        }
        state_[enter] = dir > 0 ? VarState::kAtUpper : VarState::kAtLower;
        stall = 0;
        continue;
      }
      if (limit <= 1e-12) {
        if (++stall >= kStallLimit) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
      pivot(leave_row, enter, limit * dir, leave_bound);
    }
  }

  void pivot(int leave_row, int enter, double step, double leave_bound) {
    const int m = rows();
    const int out_var = basic_var_[leave_row];
    const double enter_old = value_of(enter);

    // move the current point, then swap basis roles
    for (int i = 0; i < m; ++i) {
      const double a = at(i, enter);
      if (a != 0.0) beta_[i] -= a * step;
    }
    beta_[leave_row] = leave_bound;  // exact landing for the leaving variable

    const double piv = at(leave_row, enter);
    const double inv = 1.0 / piv;
    double* prow = &tab_[static_cast<std::size_t>(leave_row) * ncols_];
    for (int j = 0; j < ncols_used_; ++j) prow[j] *= inv;

    for (int i = 0; i < m; ++i) {
      if (i == leave_row) continue;
      double* row = &tab_[static_cast<std::size_t>(i) * ncols_];
      const double factor = row[enter];
      if (factor == 0.0) continue;
      for (int j = 0; j < ncols_used_; ++j) row[j] -= factor * prow[j];
      row[enter] = 0.0;
    }
    const double zr = red_[enter];
    if (zr != 0.0) {
      for (int j = 0; j < ncols_used_; ++j) red_[j] -= zr * prow[j];
    }
    red_[enter] = 0.0;

    state_[out_var] =
        (lo_[out_var] != up_[out_var] && leave_bound == up_[out_var]) ? VarState::kAtUpper
                                                                      : VarState::kAtLower;
    basic_row_[out_var] = -1;
    make_basic(enter, leave_row, enter_old + step);
  }

  // Recomputes the basic values exactly when the tableau has drifted:
  // residual check first, then one dense LU solve of the basis system.
  void refine() {
    const int m = rows();
    if (m == 0) return;
    std::vector<double> lhs(m, 0.0);
    for (int j = 0; j < ncols_used_; ++j) {
      const double v = value_of(j);
      if (v == 0.0) continue;
      for (const auto& [row, coef] : col_entries_[j]) lhs[row] += coef * v;
    }
    double worst = 0.0;
    std::vector<double> residual(m);
    for (int i = 0; i < m; ++i) {
      residual[i] = rows_[i].rhs - lhs[i];
      worst = std::max(worst, std::abs(residual[i]));
    }
    if (worst <= 0.5e-9 * std::max(1.0, scale_)) return;

    // solve B dx = r by Gaussian elimination with partial pivoting
    std::vector<double> b(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
      for (const auto& [row, coef] : col_entries_[basic_var_[i]]) {
        b[static_cast<std::size_t>(row) * m + i] = coef;
      }
    }
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    for (int col = 0; col < m; ++col) {
      int piv = col;
      for (int r = col + 1; r < m; ++r) {
        if (std::abs(b[static_cast<std::size_t>(perm[r]) * m + col]) >
            std::abs(b[static_cast<std::size_t>(perm[piv]) * m + col])) {
          piv = r;
        }
      }
      std::swap(perm[col], perm[piv]);
      const double diag = b[static_cast<std::size_t>(perm[col]) * m + col];
      if (std::abs(diag) < 1e-12) return;  // leave the tableau solution as is
      for (int r = col + 1; r < m; ++r) {
        double& entry = b[static_cast<std::size_t>(perm[r]) * m + col];
        if (entry == 0.0) continue;
        const double f = entry / diag;
        entry = 0.0;
        for (int c2 = col + 1; c2 < m; ++c2) {
          b[static_cast<std::size_t>(perm[r]) * m + c2] -=
              f * b[static_cast<std::size_t>(perm[col]) * m + c2];
        }
        residual[perm[r]] -= f * residual[perm[col]];
      }
    }
    std::vector<double> dx(m, 0.0);
    for (int col = m - 1; col >= 0; --col) {
      double v = residual[perm[col]];
      for (int c2 = col + 1; c2 < m; ++c2) {
        v -= b[static_cast<std::size_t>(perm[col]) * m + c2] * dx[c2];
      }
      dx[col] = v / b[static_cast<std::size_t>(perm[col]) * m + col];
    }
    for (int i = 0; i < m; ++i) beta_[i] += dx[i];
  }

  bool dual_feasible() const {
    for (int j = 0; j < ncols_used_; ++j) {
      if (state_[j] == VarState::kBasic) continue;
      if (lo_[j] == up_[j]) continue;
      if (state_[j] == VarState::kAtLower && red_[j] < -1e-9) return false;
      if (state_[j] == VarState::kAtUpper && red_[j] > 1e-9) return false;
      if (state_[j] == VarState::kFreeZero && std::abs(red_[j]) > 1e-9) return false;
    }
    return true;
  }

  const DenseLp& lp_;
  std::vector<LpRow> rows_;
  long iteration_limit_;
  long iterations_ = 0;
  int ncols_ = 0;
  bool needs_phase1_ = false;
  bool unbounded_ = false;
  bool bad_bounds_ = false;
  double scale_ = 1.0;
  std::vector<double> tab_;
  std::vector<double> beta_;
  std::vector<double> lo_, up_, cost_, red_;
  std::vector<VarState> state_;
  std::vector<int> basic_row_;
  std::vector<int> basic_var_;
  std::vector<int> slack_col_;
  std::vector<int> artificial_cols_;
  std::vector<int> art_row_;
  std::vector<double> art_sign_;
  std::vector<std::vector<std::pair<int, double>>> col_entries_;
  int ncols_used_ = 0;
};

}  // namespace

LpSolution solve_lp(const DenseLp& lp, long iteration_limit) {
  Tableau tableau(lp, iteration_limit);
  LpSolution solution = tableau.run();
  if (solution.status == LpStatus::kOptimal) {
    double obj = 0.0;
    for (int j = 0; j < lp.num_vars(); ++j) obj += lp.objective[j] * solution.x[j];
    solution.objective = obj;
  }
  return solution;
}

DenseLp lp_from_model(const Model& model, bool relax_binaries) {
  if (model.degree() > 1) throw ModelError("model is not linear");
  DenseLp lp;
  lp.maximize = model.direction() == Direction::kMaximize;
  for (const auto& v : model.variables()) {
    if (v.kind == VarKind::kBinary && !relax_binaries) {
      throw ModelError("binary variable '" + v.name + "' in a purely continuous solve");
    }
    lp.add_var(v.lower, v.upper);
  }
  for (const auto& t : model.objective().terms) {
    if (t.degree() == 0) continue;
    lp.objective[t.factors[0]] += t.coefficient;
  }
  for (const auto& c : model.constraints()) {
    std::vector<LinearTerm> terms;
    double shift = 0.0;
    for (const auto& t : c.polynomial.terms) {
      if (t.degree() == 0) {
        shift += t.coefficient;
      } else {
        terms.push_back(LinearTerm{t.factors[0], t.coefficient});
      }
    }
    lp.add_row(std::move(terms), c.sense, c.rhs - shift);
  }
  return lp;
}

LpSolution solve_lp(const Model& model, bool relax_binaries) {
  DenseLp lp = lp_from_model(model, relax_binaries);
  LpSolution solution = solve_lp(lp);
  double offset = 0.0;
  for (const auto& t : model.objective().terms) {
    if (t.degree() == 0) offset += t.coefficient;
  }
  if (solution.status == LpStatus::kOptimal) solution.objective += offset;
  return solution;
}

}  // namespace lfen
