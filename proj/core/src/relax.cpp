#include <algorithm>
#include <cmath>
#include <map>

#include "lfen/solver.hpp"

namespace lfen {
namespace {

struct InfoCollector {
  const Model& model;
  RelaxedModel out;
  // chains keyed by sorted factor multiset
  std::map<std::vector<VarId>, VarId> chain_cache;

  explicit InfoCollector(const Model& m) : model(m) {
    out.source = &m;
    out.maximize = m.direction() == Direction::kMaximize;
    out.num_source_vars = m.num_variables();
    for (const auto& v : m.variables()) {
      if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) {
        throw SolverError("variable '" + v.name + "' must be bounded for the relaxation");
      }
      out.variables.push_back(v);
      out.is_binary.push_back(v.kind == VarKind::kBinary);
    }
  }

  static void interval_product(double alo, double ahi, double blo, double bhi, double* lo,
                               double* hi) {
    const double c1 = alo * blo, c2 = alo * bhi, c3 = ahi * blo, c4 = ahi * bhi;
    *lo = std::min(std::min(c1, c2), std::min(c3, c4));
    *hi = std::max(std::max(c1, c2), std::max(c3, c4));
  }

  VarId fresh_product_var(VarId a, VarId b) {
    double lo, hi;
    interval_product(out.variables[a].lower, out.variables[a].upper, out.variables[b].lower,
                     out.variables[b].upper, &lo, &hi);
    Variable v;
    v.name = "aux" + std::to_string(out.variables.size() - out.num_source_vars) + "_" +
             out.variables[a].name + "_" + out.variables[b].name;
    v.kind = VarKind::kContinuous;
    v.lower = lo;
    v.upper = hi;
    out.variables.push_back(v);
    out.is_binary.push_back(false);
    const VarId id = static_cast<VarId>(out.variables.size()) - 1;
    out.products.push_back(ProductEntry{id, a, b});
    return id;
  }

  // variable carrying the value of the (degree >= 1) factor product
  VarId chain_for(std::vector<VarId> factors) {
    std::sort(factors.begin(), factors.end());
    if (factors.size() == 1) return factors[0];
    auto it = chain_cache.find(factors);
    if (it != chain_cache.end()) return it->second;
    std::vector<VarId> head(factors.begin(), factors.end() - 1);
    const VarId left = chain_for(head);
    const VarId right = factors.back();
    const VarId product = fresh_product_var(left, right);
    chain_cache.emplace(std::move(factors), product);
    return product;
  }

  void linearize(const Polynomial& poly, std::vector<LinearTerm>* terms, double* offset) {
    std::map<VarId, double> acc;
    for (const auto& term : poly.terms) {
      if (term.degree() == 0) {
        *offset += term.coefficient;
        continue;
      }
      const VarId v = term.degree() == 1 ? term.factors[0] : chain_for(term.factors);
      acc[v] += term.coefficient;
    }
    for (const auto& [v, c] : acc) {
      if (c != 0.0) terms->push_back(LinearTerm{v, c});
    }
  }

  RelaxedModel run() {
    // pre-register explicit product identities: rows of the exact shape
    //   (+-1) w (-+1) x*y = 0
    std::vector<bool> consumed(model.constraints().size(), false);
    for (std::size_t ci = 0; ci < model.constraints().size(); ++ci) {
      const auto& c = model.constraints()[ci];
      if (c.sense != Sense::kEq || c.rhs != 0.0 || c.polynomial.terms.size() != 2) continue;
      const auto& t0 = c.polynomial.terms[0];
      const auto& t1 = c.polynomial.terms[1];
      const Monomial* lin = nullptr;
      const Monomial* quad = nullptr;
      if (t0.degree() == 1 && t1.degree() == 2) {
        lin = &t0;
        quad = &t1;
      } else if (t1.degree() == 1 && t0.degree() == 2) {
        lin = &t1;
        quad = &t0;
      } else {
        continue;
      }
      if (std::abs(lin->coefficient + quad->coefficient) > 1e-15) continue;
      if (std::abs(lin->coefficient) != 1.0) continue;
      std::vector<VarId> key = quad->factors;
      std::sort(key.begin(), key.end());
      if (chain_cache.contains(key)) continue;  // keep the first identity, linearize the rest
      out.products.push_back(ProductEntry{lin->factors[0], key[0], key[1]});
      chain_cache.emplace(std::move(key), lin->factors[0]);
      consumed[ci] = true;
    }

    linearize(model.objective(), &out.objective, &out.objective_offset);
    for (std::size_t ci = 0; ci < model.constraints().size(); ++ci) {
      if (consumed[ci]) continue;
      const auto& c = model.constraints()[ci];
      LpRow row;
      row.sense = c.sense;
      double offset = 0.0;
      linearize(c.polynomial, &row.terms, &offset);
      row.rhs = c.rhs - offset;
      out.rows.push_back(std::move(row));
      out.row_tags.push_back(c.tag);
    }
    return std::move(out);
  }
};

}  // namespace

RelaxedModel relax(const Model& model) {
  InfoCollector collector(model);
  return collector.run();
}

void append_mccormick_rows(DenseLp* lp, const ProductEntry& product,
                           const std::vector<double>& lower, const std::vector<double>& upper) {
  const VarId w = product.product;
  const VarId a = product.a;
  const VarId b = product.b;
  const double al = lower[a], au = upper[a];
  const double bl = lower[b], bu = upper[b];
  // w >= al*b + bl*a - al*bl ; w >= au*b + bu*a - au*bu
  lp->add_row({{w, 1.0}, {b, -al}, {a, -bl}}, Sense::kGe, -al * bl);
  lp->add_row({{w, 1.0}, {b, -au}, {a, -bu}}, Sense::kGe, -au * bu);
  // w <= au*b + bl*a - au*bl ; w <= al*b + bu*a - al*bu
  lp->add_row({{w, 1.0}, {b, -au}, {a, -bl}}, Sense::kLe, -au * bl);
  lp->add_row({{w, 1.0}, {b, -al}, {a, -bu}}, Sense::kLe, -al * bu);
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kGapLimit: return "gap_limit";
    case SolveStatus::kTimeLimit: return "time_limit";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kMemory: return "memory";
  }
  return "?";
}

Gaps compute_gaps(double lb, double ub) {
  if (ub < lb - 1e-9) throw SolverError("bound inversion: UB < LB");
  Gaps g;
  g.add = ub - lb;
  if (lb <= 0.0) {
    g.mult = kMultGapCap;
  } else {
    g.mult = std::min((ub - lb) / lb * 100.0, kMultGapCap);
  }
  return g;
}

}  // namespace lfen
