#include "lfen/formulations.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lfen {
namespace {

std::string dn(int i) { return "d_" + std::to_string(i); }
std::string rn(int f, int j) { return "r_" + std::to_string(f) + "_" + std::to_string(j); }
std::string un(int f, int j) { return "u_" + std::to_string(f) + "_" + std::to_string(j); }
std::string vn(int f) { return "v_" + std::to_string(f); }
std::string regn(int f, int j) { return "reg_" + std::to_string(f) + "_" + std::to_string(j); }
std::string sn(int f, int j) { return "s_" + std::to_string(f) + "_" + std::to_string(j); }
std::string yn(int f, int i, int j) {
  return "y_" + std::to_string(f) + "_" + std::to_string(i) + "_" + std::to_string(j);
}
std::string wn(int j, int k) { return "w_" + std::to_string(j) + "_" + std::to_string(k); }

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

Range follower_payoff_range(const Game& game, int follower_agent) {
  if (is_normal_form(game)) {
    const auto& t = std::get<NormalFormGame>(game).payoff(follower_agent);
    return {t.min_value(), t.max_value()};
  }
  const auto& pm = std::get<PolymatrixGame>(game);
  Range r{0.0, 0.0};
  for (int j = 0; j < pm.num_agents(); ++j) {
    if (j == follower_agent) continue;
    r.lo += pm.pairwise(follower_agent, j).min_value();
    r.hi += pm.pairwise(follower_agent, j).max_value();
  }
  return r;
}

// Shared state while assembling one formulation.
struct Ctx {
  const LeaderFollowerInstance& inst;
  Model model;
  int ml = 0;
  std::vector<VarId> d;
  std::vector<std::vector<VarId>> r;    // [follower position][action]
  std::vector<std::vector<VarId>> u;    // [pos][action]
  std::vector<VarId> v;                 // [pos]
  std::vector<std::vector<VarId>> reg;  // [pos][action]
  std::vector<std::vector<VarId>> s;    // [pos][action]
  std::vector<std::vector<std::vector<VarId>>> y;  // [pos][i][j]

  explicit Ctx(const LeaderFollowerInstance& instance) : inst(instance) {
    ml = inst.leader_actions();
  }
  const std::vector<int>& m() const { return inst.action_counts(); }
  int nf_count() const { return inst.num_followers(); }
  int agent(int pos) const { return inst.followers()[pos]; }
  int actions(int pos) const { return m()[agent(pos)]; }
};

void require_class(const LeaderFollowerInstance& inst, bool polymatrix, const char* id) {
  if (is_polymatrix(inst.game) != polymatrix) {
    throw WrongGameClass(std::string(id) + ": game class mismatch (" +
                         (polymatrix ? "polymatrix" : "normal-form") + " required)");
  }
}

void add_delta(Ctx& c, bool binary) {
  c.d.resize(c.ml);
  for (int i = 0; i < c.ml; ++i) {
    c.d[i] = binary ? c.model.add_binary(dn(i)) : c.model.add_continuous(dn(i), 0.0, 1.0);
  }
  Polynomial mass;
  for (VarId v : c.d) mass.add(1.0, {v});
  c.model.add_constraint(mass, Sense::kEq, 1.0, "d_simplex");
}

void add_rho(Ctx& c) {
  c.r.resize(c.nf_count());
  for (int p = 0; p < c.nf_count(); ++p) {
    const int fa = c.agent(p);
    c.r[p].resize(c.actions(p));
    for (int j = 0; j < c.actions(p); ++j) {
      c.r[p][j] = c.model.add_continuous(rn(fa, j), 0.0, 1.0);
    }
    Polynomial mass;
    for (VarId v : c.r[p]) mass.add(1.0, {v});
    c.model.add_constraint(mass, Sense::kEq, 1.0, "r_simplex_" + std::to_string(fa));
  }
}

void add_u_v(Ctx& c) {
  c.u.resize(c.nf_count());
  c.v.resize(c.nf_count());
  for (int p = 0; p < c.nf_count(); ++p) {
    const int fa = c.agent(p);
    const Range range = follower_payoff_range(c.inst.game, fa);
    c.u[p].resize(c.actions(p));
    for (int j = 0; j < c.actions(p); ++j) {
      c.u[p][j] = c.model.add_continuous(un(fa, j), range.lo, range.hi);
    }
    c.v[p] = c.model.add_continuous(vn(fa), range.lo, range.hi);
  }
}

void add_v_only(Ctx& c) {
  c.v.resize(c.nf_count());
  for (int p = 0; p < c.nf_count(); ++p) {
    const int fa = c.agent(p);
    const Range range = follower_payoff_range(c.inst.game, fa);
    c.v[p] = c.model.add_continuous(vn(fa), range.lo, range.hi);
  }
}

// regret / support-flag machinery shared by every formulation except the
// complementarity ones: v >= u, reg = v - u, rho <= 1 - s, reg <= M s.
void add_support_machinery(Ctx& c) {
  c.reg.resize(c.nf_count());
  c.s.resize(c.nf_count());
  for (int p = 0; p < c.nf_count(); ++p) {
    const int fa = c.agent(p);
    const double m_f = big_m(c.inst.game, fa);
    c.reg[p].resize(c.actions(p));
    c.s[p].resize(c.actions(p));
    for (int j = 0; j < c.actions(p); ++j) {
      c.reg[p][j] = c.model.add_continuous(regn(fa, j), 0.0, m_f);
      c.s[p][j] = c.model.add_binary(sn(fa, j));
    }
    for (int j = 0; j < c.actions(p); ++j) {
      const std::string suffix = "_" + std::to_string(fa) + "_" + std::to_string(j);
      Polynomial br;
      br.add(1.0, {c.v[p]}).add(-1.0, {c.u[p][j]});
      c.model.add_constraint(br, Sense::kGe, 0.0, "br" + suffix);
      Polynomial def;
      def.add(1.0, {c.reg[p][j]}).add(-1.0, {c.v[p]}).add(1.0, {c.u[p][j]});
      c.model.add_constraint(def, Sense::kEq, 0.0, "reg_def" + suffix);
      Polynomial off;
      off.add(1.0, {c.r[p][j]}).add(1.0, {c.s[p][j]});
      c.model.add_constraint(off, Sense::kLe, 1.0, "supp_rho" + suffix);
      Polynomial link;
      link.add(1.0, {c.reg[p][j]}).add(-m_f, {c.s[p][j]});
      c.model.add_constraint(link, Sense::kLe, 0.0, "supp_reg" + suffix);
    }
  }
}

// --- normal-form pieces -------------------------------------------------

const PayoffTensor& tensor_of(const Ctx& c, int agent) {
  return std::get<NormalFormGame>(c.inst.game).payoff(agent);
}

// leader objective as the full degree-n product
Polynomial nf_leader_product(const Ctx& c) {
  Polynomial obj;
  const auto& t = tensor_of(c, c.inst.leader);
  for_each_action_tuple(c.m(), [&](std::span<const int> tuple) {
    const double coef = t.at(tuple);
    if (coef == 0.0) return;
    std::vector<VarId> factors{c.d[tuple[c.inst.leader]]};
    for (int p = 0; p < c.nf_count(); ++p) factors.push_back(c.r[p][tuple[c.agent(p)]]);
    obj.add(coef, std::move(factors));
  });
  return obj;
}

// expected utility of follower `pos` playing action j, as a polynomial over
// delta and the co-followers (degree n-1)
Polynomial nf_action_utility_poly(const Ctx& c, int pos, int j) {
  Polynomial poly;
  const int fa = c.agent(pos);
  const auto& t = tensor_of(c, fa);
  for_each_action_tuple(c.m(), [&](std::span<const int> tuple) {
    if (tuple[fa] != j) return;
    const double coef = t.at(tuple);
    if (coef == 0.0) return;
    std::vector<VarId> factors{c.d[tuple[c.inst.leader]]};
    for (int p2 = 0; p2 < c.nf_count(); ++p2) {
      if (p2 != pos) factors.push_back(c.r[p2][tuple[c.agent(p2)]]);
    }
    poly.add(coef, std::move(factors));
  });
  return poly;
}

// --- polymatrix pieces ---------------------------------------------------

const PolymatrixGame& pm_of(const Ctx& c) { return std::get<PolymatrixGame>(c.inst.game); }

Polynomial pm_leader_objective(const Ctx& c) {
  Polynomial obj;
  const auto& pm = pm_of(c);
  for (int p = 0; p < c.nf_count(); ++p) {
    const Matrix& ulf = pm.pairwise(c.inst.leader, c.agent(p));
    for (int i = 0; i < c.ml; ++i) {
      for (int j = 0; j < c.actions(p); ++j) {
        if (ulf(i, j) != 0.0) obj.add(ulf(i, j), {c.d[i], c.r[p][j]});
      }
    }
  }
  return obj;
}

Polynomial pm_action_utility_poly(const Ctx& c, int pos, int j) {
  Polynomial poly;
  const auto& pm = pm_of(c);
  const int fa = c.agent(pos);
  const Matrix& vs_leader = pm.pairwise(fa, c.inst.leader);
  for (int i = 0; i < c.ml; ++i) {
    if (vs_leader(j, i) != 0.0) poly.add(vs_leader(j, i), {c.d[i]});
  }
  for (int p2 = 0; p2 < c.nf_count(); ++p2) {
    if (p2 == pos) continue;
    const Matrix& vs = pm.pairwise(fa, c.agent(p2));
    for (int k = 0; k < c.actions(p2); ++k) {
      if (vs(j, k) != 0.0) poly.add(vs(j, k), {c.r[p2][k]});
    }
  }
  return poly;
}

// --- complementarity (formulation I) --------------------------------------

void add_complementarity(Ctx& c, bool polymatrix) {
  for (int p = 0; p < c.nf_count(); ++p) {
    const int fa = c.agent(p);
    // best-response rows: v_f >= u-expression(j)
    for (int j = 0; j < c.actions(p); ++j) {
      Polynomial br;
      br.add(1.0, {c.v[p]});
      Polynomial expr = polymatrix ? pm_action_utility_poly(c, p, j) : nf_action_utility_poly(c, p, j);
      for (auto& term : expr.terms) br.add(-term.coefficient, std::move(term.factors));
      c.model.add_constraint(br, Sense::kGe, 0.0,
                             "br_" + std::to_string(fa) + "_" + std::to_string(j));
    }
    // sum_j rho_f^j (v_f - u-expression(j)) = 0
    Polynomial comp;
    for (int j = 0; j < c.actions(p); ++j) {
      comp.add(1.0, {c.r[p][j], c.v[p]});
      Polynomial expr = polymatrix ? pm_action_utility_poly(c, p, j) : nf_action_utility_poly(c, p, j);
      for (auto& term : expr.terms) {
        term.factors.push_back(c.r[p][j]);
        comp.add(-term.coefficient, std::move(term.factors));
      }
    }
    c.model.add_constraint(comp, Sense::kEq, 0.0, "comp_" + std::to_string(fa));
  }
}

// --- product variables ----------------------------------------------------

void add_y_vars(Ctx& c, bool mccormick) {
  c.y.resize(c.nf_count());
  for (int p = 0; p < c.nf_count(); ++p) {
    const int fa = c.agent(p);
    c.y[p].assign(c.ml, std::vector<VarId>(c.actions(p), -1));
    for (int i = 0; i < c.ml; ++i) {
      for (int j = 0; j < c.actions(p); ++j) {
        c.y[p][i][j] = c.model.add_continuous(yn(fa, i, j), 0.0, 1.0);
      }
    }
    for (int i = 0; i < c.ml; ++i) {
      for (int j = 0; j < c.actions(p); ++j) {
        const std::string suffix =
            "_" + std::to_string(fa) + "_" + std::to_string(i) + "_" + std::to_string(j);
        if (mccormick) {
          Polynomial ub_d;
          ub_d.add(1.0, {c.y[p][i][j]}).add(-1.0, {c.d[i]});
          c.model.add_constraint(ub_d, Sense::kLe, 0.0, "mcc_d" + suffix);
          Polynomial ub_r;
          ub_r.add(1.0, {c.y[p][i][j]}).add(-1.0, {c.r[p][j]});
          c.model.add_constraint(ub_r, Sense::kLe, 0.0, "mcc_r" + suffix);
          Polynomial lb;
          lb.add(1.0, {c.y[p][i][j]}).add(-1.0, {c.d[i]}).add(-1.0, {c.r[p][j]});
          c.model.add_constraint(lb, Sense::kGe, -1.0, "mcc_lb" + suffix);
        } else {
          Polynomial def;
          def.add(1.0, {c.y[p][i][j]}).add(-1.0, {c.d[i], c.r[p][j]});
          c.model.add_constraint(def, Sense::kEq, 0.0, "y_def" + suffix);
        }
      }
    }
    Polynomial total;
    for (int i = 0; i < c.ml; ++i) {
      for (int j = 0; j < c.actions(p); ++j) total.add(1.0, {c.y[p][i][j]});
    }
    c.model.add_constraint(total, Sense::kEq, 1.0, "y_sum_" + std::to_string(fa));
  }
}

// Chained products of delta with the followers in `positions`, built one
// follower at a time. Level 1 reuses the y grid; later levels introduce
// fresh variables with a quadratic definition and a sum-to-one row.
// Returns the final level as a flat grid over (i, j_0, ..., j_last).
std::vector<VarId> add_chain(Ctx& c, const std::vector<int>& positions, const std::string& base) {
  std::vector<VarId> level;  // flat over (i, j_0, ..)
  std::vector<int> dims{c.ml};
  for (std::size_t depth = 0; depth < positions.size(); ++depth) {
    const int p = positions[depth];
    dims.push_back(c.actions(p));
    std::size_t count = 1;
    for (int dsize : dims) count *= static_cast<std::size_t>(dsize);
    if (depth == 0) {
      level.resize(count);
      for (int i = 0; i < c.ml; ++i) {
        for (int j = 0; j < c.actions(p); ++j) {
          level[static_cast<std::size_t>(i) * c.actions(p) + j] = c.y[p][i][j];
        }
      }
      continue;
    }
    std::vector<VarId> next(count);
    Polynomial total;
    std::vector<int> idx(dims.size(), 0);
    for (std::size_t flat = 0; flat < count; ++flat) {
      // decode indices from flat
      std::size_t rest = flat;
      for (int q = static_cast<int>(dims.size()) - 1; q >= 0; --q) {
        idx[q] = static_cast<int>(rest % dims[q]);
        rest /= dims[q];
      }
      std::string name = base;
      for (int component : idx) name += "_" + std::to_string(component);
      const VarId var = c.model.add_continuous(name, 0.0, 1.0);
      next[flat] = var;
      const std::size_t prev_flat = flat / dims.back();
      Polynomial def;
      def.add(1.0, {var}).add(-1.0, {level[prev_flat], c.r[p][idx.back()]});
      c.model.add_constraint(def, Sense::kEq, 0.0, base + "_def" + [&] {
        std::string suffix;
        for (int component : idx) suffix += "_" + std::to_string(component);
        return suffix;
      }());
      total.add(1.0, {var});
    }
    c.model.add_constraint(total, Sense::kEq, 1.0,
                           base + "_sum_" + std::to_string(depth + 1));
    level = std::move(next);
  }
  return level;
}

// u definition rows for formulation III: linear in the co-follower chain
void add_u_def_linear_nf(Ctx& c) {
  const auto& m = c.m();
  for (int p = 0; p < c.nf_count(); ++p) {
    const int fa = c.agent(p);
    // chain over the co-followers of f (reuses y when only one co-follower)
    std::vector<int> co;
    for (int p2 = 0; p2 < c.nf_count(); ++p2) {
      if (p2 != p) co.push_back(p2);
    }
    std::vector<VarId> grid = add_chain(c, co, "q_" + std::to_string(fa));
    // grid dims: (i, actions of co[0], actions of co[1], ...)
    std::vector<int> dims{c.ml};
    for (int p2 : co) dims.push_back(c.actions(p2));

    const auto& tensor = tensor_of(c, fa);
    for (int j = 0; j < c.actions(p); ++j) {
      Polynomial def;
      def.add(1.0, {c.u[p][j]});
      std::vector<int> tuple(m.size(), 0);
      std::vector<int> idx(dims.size(), 0);
      std::size_t count = 1;
      for (int dsize : dims) count *= static_cast<std::size_t>(dsize);
      for (std::size_t flat = 0; flat < count; ++flat) {
        std::size_t rest = flat;
        for (int q = static_cast<int>(dims.size()) - 1; q >= 0; --q) {
          idx[q] = static_cast<int>(rest % dims[q]);
          rest /= dims[q];
        }
        tuple[c.inst.leader] = idx[0];
        for (std::size_t d2 = 0; d2 < co.size(); ++d2) tuple[c.agent(co[d2])] = idx[d2 + 1];
        tuple[fa] = j;
        const double coef = tensor.at(tuple);
        if (coef != 0.0) def.add(-coef, {grid[flat]});
      }
      c.model.add_constraint(def, Sense::kEq, 0.0,
                             "u_def_" + std::to_string(fa) + "_" + std::to_string(j));
    }
  }
}

void add_u_def_direct(Ctx& c, bool polymatrix) {
  for (int p = 0; p < c.nf_count(); ++p) {
    const int fa = c.agent(p);
    for (int j = 0; j < c.actions(p); ++j) {
      Polynomial def;
      def.add(1.0, {c.u[p][j]});
      Polynomial expr = polymatrix ? pm_action_utility_poly(c, p, j) : nf_action_utility_poly(c, p, j);
      for (auto& term : expr.terms) def.add(-term.coefficient, std::move(term.factors));
      c.model.add_constraint(def, Sense::kEq, 0.0,
                             "u_def_" + std::to_string(fa) + "_" + std::to_string(j));
    }
  }
}

BuiltFormulation finish(Ctx& c, FormulationId id, TieMode mode,
                        std::optional<MixedStrategy> fixed_delta = std::nullopt) {
  c.model.metadata_id = to_string(id);
  c.model.freeze();
  BuiltFormulation out;
  out.id = id;
  out.mode = mode;
  out.model = std::move(c.model);
  out.fixed_delta = std::move(fixed_delta);
  return out;
}

}  // namespace

const char* to_string(FormulationId id) {
  switch (id) {
    case FormulationId::kOnf1: return "onf1";
    case FormulationId::kOnf2: return "onf2";
    case FormulationId::kOnf3: return "onf3";
    case FormulationId::kOpm1: return "opm1";
    case FormulationId::kOpm2: return "opm2";
    case FormulationId::kOpm3: return "opm3";
    case FormulationId::kOracleNf: return "oracle-nf";
    case FormulationId::kOraclePm: return "oracle-pm";
    case FormulationId::kOnfLpfm3: return "onf-lpfm3";
    case FormulationId::kOpmLpfm3: return "opm-lpfm3";
  }
  return "?";
}

std::optional<FormulationId> formulation_from_string(const std::string& name) {
  for (FormulationId id :
       {FormulationId::kOnf1, FormulationId::kOnf2, FormulationId::kOnf3, FormulationId::kOpm1,
        FormulationId::kOpm2, FormulationId::kOpm3, FormulationId::kOracleNf,
        FormulationId::kOraclePm, FormulationId::kOnfLpfm3, FormulationId::kOpmLpfm3}) {
    if (name == to_string(id)) return id;
  }
  return std::nullopt;
}

bool is_polymatrix_formulation(FormulationId id) {
  switch (id) {
    case FormulationId::kOpm1:
    case FormulationId::kOpm2:
    case FormulationId::kOpm3:
    case FormulationId::kOraclePm:
    case FormulationId::kOpmLpfm3: return true;
    default: return false;
  }
}

bool is_leader_pure(FormulationId id) {
  return id == FormulationId::kOnfLpfm3 || id == FormulationId::kOpmLpfm3;
}

bool is_second_level(FormulationId id) {
  return id == FormulationId::kOracleNf || id == FormulationId::kOraclePm;
}

BuiltFormulation build_onf1(const LeaderFollowerInstance& inst) {
  require_class(inst, false, "onf1");
  Ctx c(inst);
  add_delta(c, false);
  add_rho(c);
  add_v_only(c);
  add_complementarity(c, false);
  c.model.set_objective(nf_leader_product(c), Direction::kMaximize);
  return finish(c, FormulationId::kOnf1, TieMode::kOptimistic);
}

BuiltFormulation build_onf2(const LeaderFollowerInstance& inst) {
  require_class(inst, false, "onf2");
  Ctx c(inst);
  add_delta(c, false);
  add_rho(c);
  add_u_v(c);
  add_u_def_direct(c, false);
  add_support_machinery(c);
  c.model.set_objective(nf_leader_product(c), Direction::kMaximize);
  return finish(c, FormulationId::kOnf2, TieMode::kOptimistic);
}

namespace {

BuiltFormulation build_nf3_impl(const LeaderFollowerInstance& inst, bool leader_pure) {
  require_class(inst, false, leader_pure ? "onf-lpfm3" : "onf3");
  Ctx c(inst);
  add_delta(c, leader_pure);
  add_rho(c);
  add_u_v(c);
  add_y_vars(c, /*mccormick=*/leader_pure);
  // objective chain over all followers
  std::vector<int> all(c.nf_count());
  for (int p = 0; p < c.nf_count(); ++p) all[p] = p;
  std::vector<VarId> z = add_chain(c, all, "z");
  add_u_def_linear_nf(c);
  add_support_machinery(c);

  Polynomial obj;
  const auto& tensor = tensor_of(c, inst.leader);
  const auto& m = c.m();
  std::vector<int> dims{c.ml};
  for (int p = 0; p < c.nf_count(); ++p) dims.push_back(c.actions(p));
  std::size_t count = 1;
  for (int dsize : dims) count *= static_cast<std::size_t>(dsize);
  std::vector<int> idx(dims.size(), 0);
  std::vector<int> tuple(m.size(), 0);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rest = flat;
    for (int q = static_cast<int>(dims.size()) - 1; q >= 0; --q) {
      idx[q] = static_cast<int>(rest % dims[q]);
      rest /= dims[q];
    }
    tuple[inst.leader] = idx[0];
    for (int p = 0; p < c.nf_count(); ++p) tuple[c.agent(p)] = idx[p + 1];
    const double coef = tensor.at(tuple);
    if (coef != 0.0) obj.add(coef, {z[flat]});
  }
  c.model.set_objective(obj, Direction::kMaximize);
  return finish(c, leader_pure ? FormulationId::kOnfLpfm3 : FormulationId::kOnf3,
                TieMode::kOptimistic);
}

BuiltFormulation build_pm3_impl(const LeaderFollowerInstance& inst, bool leader_pure) {
  require_class(inst, true, leader_pure ? "opm-lpfm3" : "opm3");
  Ctx c(inst);
  add_delta(c, leader_pure);
  add_rho(c);
  add_u_v(c);
  add_y_vars(c, /*mccormick=*/leader_pure);
  add_u_def_direct(c, true);
  add_support_machinery(c);

  Polynomial obj;
  const auto& pm = pm_of(c);
  for (int p = 0; p < c.nf_count(); ++p) {
    const Matrix& ulf = pm.pairwise(inst.leader, c.agent(p));
    for (int i = 0; i < c.ml; ++i) {
      for (int j = 0; j < c.actions(p); ++j) {
        if (ulf(i, j) != 0.0) obj.add(ulf(i, j), {c.y[p][i][j]});
      }
    }
  }
  c.model.set_objective(obj, Direction::kMaximize);
  return finish(c, leader_pure ? FormulationId::kOpmLpfm3 : FormulationId::kOpm3,
                TieMode::kOptimistic);
}

}  // namespace

BuiltFormulation build_onf3(const LeaderFollowerInstance& inst) {
  return build_nf3_impl(inst, false);
}

BuiltFormulation build_onf_lpfm3(const LeaderFollowerInstance& inst) {
  return build_nf3_impl(inst, true);
}

BuiltFormulation build_opm1(const LeaderFollowerInstance& inst) {
  require_class(inst, true, "opm1");
  Ctx c(inst);
  add_delta(c, false);
  add_rho(c);
  add_v_only(c);
  add_complementarity(c, true);
  c.model.set_objective(pm_leader_objective(c), Direction::kMaximize);
  return finish(c, FormulationId::kOpm1, TieMode::kOptimistic);
}

BuiltFormulation build_opm2(const LeaderFollowerInstance& inst) {
  require_class(inst, true, "opm2");
  Ctx c(inst);
  add_delta(c, false);
  add_rho(c);
  add_u_v(c);
  add_u_def_direct(c, true);
  add_support_machinery(c);
  c.model.set_objective(pm_leader_objective(c), Direction::kMaximize);
  return finish(c, FormulationId::kOpm2, TieMode::kOptimistic);
}

BuiltFormulation build_opm3(const LeaderFollowerInstance& inst) {
  return build_pm3_impl(inst, false);
}

BuiltFormulation build_opm_lpfm3(const LeaderFollowerInstance& inst) {
  return build_pm3_impl(inst, true);
}

BuiltFormulation build_oracle(const LeaderFollowerInstance& inst, const MixedStrategy& delta,
                              TieMode mode) {
  if (inst.num_followers() != 2) {
    throw GameError("the fixed-commitment model requires exactly two followers");
  }
  if (delta.size() != inst.leader_actions() || !delta.valid(1e-6)) {
    throw GameError("invalid commitment for the fixed-commitment model");
  }
  const bool polymatrix = is_polymatrix(inst.game);
  Ctx c(inst);
  const Direction direction = mode == TieMode::kOptimistic ? Direction::kMaximize : Direction::kMinimize;

  add_rho(c);
  add_u_v(c);

  if (polymatrix) {
    const auto& pm = pm_of(c);
    // u rows with the commitment folded into constants
    for (int p = 0; p < 2; ++p) {
      const int fa = c.agent(p);
      const Matrix& vs_leader = pm.pairwise(fa, inst.leader);
      const Matrix& vs_other = pm.pairwise(fa, c.agent(1 - p));
      for (int j = 0; j < c.actions(p); ++j) {
        double base = 0.0;
        for (int i = 0; i < c.ml; ++i) base += delta.probs[i] * vs_leader(j, i);
        Polynomial def;
        def.add(1.0, {c.u[p][j]});
        for (int k = 0; k < c.actions(1 - p); ++k) {
          if (vs_other(j, k) != 0.0) def.add(-vs_other(j, k), {c.r[1 - p][k]});
        }
        c.model.add_constraint(def, Sense::kEq, base,
                               "u_def_" + std::to_string(fa) + "_" + std::to_string(j));
      }
    }
    add_support_machinery(c);
    Polynomial obj;
    for (int p = 0; p < 2; ++p) {
      const Matrix& ulf = pm.pairwise(inst.leader, c.agent(p));
      for (int j = 0; j < c.actions(p); ++j) {
        double coef = 0.0;
        for (int i = 0; i < c.ml; ++i) coef += delta.probs[i] * ulf(i, j);
        if (coef != 0.0) obj.add(coef, {c.r[p][j]});
      }
    }
    c.model.set_objective(obj, direction);
    return finish(c, FormulationId::kOraclePm, mode, delta);
  }

  // normal form: product variables w^{jk} over the two followers
  const int m1 = c.actions(0);
  const int m2 = c.actions(1);
  std::vector<std::vector<VarId>> w(m1, std::vector<VarId>(m2));
  for (int j = 0; j < m1; ++j) {
    for (int k = 0; k < m2; ++k) w[j][k] = c.model.add_continuous(wn(j, k), 0.0, 1.0);
  }
  for (int j = 0; j < m1; ++j) {
    for (int k = 0; k < m2; ++k) {
      Polynomial def;
      def.add(1.0, {w[j][k]}).add(-1.0, {c.r[0][j], c.r[1][k]});
      c.model.add_constraint(def, Sense::kEq, 0.0,
                             "w_def_" + std::to_string(j) + "_" + std::to_string(k));
    }
  }
  {
    Polynomial total;
    for (int j = 0; j < m1; ++j) {
      for (int k = 0; k < m2; ++k) total.add(1.0, {w[j][k]});
    }
    c.model.add_constraint(total, Sense::kEq, 1.0, "w_sum");
  }
  // u rows: commitment folded into coefficients of the co-follower strategy
  std::vector<int> tuple(c.m().size(), 0);
  for (int p = 0; p < 2; ++p) {
    const int fa = c.agent(p);
    const int other = c.agent(1 - p);
    const auto& tensor = tensor_of(c, fa);
    for (int j = 0; j < c.actions(p); ++j) {
      Polynomial def;
      def.add(1.0, {c.u[p][j]});
      for (int k = 0; k < c.actions(1 - p); ++k) {
        double coef = 0.0;
        for (int i = 0; i < c.ml; ++i) {
          tuple[inst.leader] = i;
          tuple[fa] = j;
          tuple[other] = k;
          coef += delta.probs[i] * tensor.at(tuple);
        }
        if (coef != 0.0) def.add(-coef, {c.r[1 - p][k]});
      }
      c.model.add_constraint(def, Sense::kEq, 0.0,
                             "u_def_" + std::to_string(fa) + "_" + std::to_string(j));
    }
  }
  add_support_machinery(c);
  Polynomial obj;
  const auto& lt = tensor_of(c, inst.leader);
  for (int j = 0; j < m1; ++j) {
    for (int k = 0; k < m2; ++k) {
      double coef = 0.0;
      for (int i = 0; i < c.ml; ++i) {
        tuple[inst.leader] = i;
        tuple[c.agent(0)] = j;
        tuple[c.agent(1)] = k;
        coef += delta.probs[i] * lt.at(tuple);
      }
      if (coef != 0.0) obj.add(coef, {w[j][k]});
    }
  }
  c.model.set_objective(obj, direction);
  return finish(c, FormulationId::kOracleNf, mode, delta);
}

BuiltFormulation build_formulation(const LeaderFollowerInstance& inst, FormulationId id) {
  switch (id) {
    case FormulationId::kOnf1: return build_onf1(inst);
    case FormulationId::kOnf2: return build_onf2(inst);
    case FormulationId::kOnf3: return build_onf3(inst);
    case FormulationId::kOpm1: return build_opm1(inst);
    case FormulationId::kOpm2: return build_opm2(inst);
    case FormulationId::kOpm3: return build_opm3(inst);
    case FormulationId::kOnfLpfm3: return build_onf_lpfm3(inst);
    case FormulationId::kOpmLpfm3: return build_opm_lpfm3(inst);
    case FormulationId::kOracleNf:
    case FormulationId::kOraclePm:
      throw GameError("second-level models need a commitment; use build_oracle");
  }
  throw GameError("unknown formulation id");
}

// --- extraction ------------------------------------------------------------

ExtractedSolution extract_solution(const BuiltFormulation& built, const Assignment& assignment,
                                   const LeaderFollowerInstance& instance, double eps) {
  const Model& model = built.model;
  ExtractedSolution out;
  out.raw = assignment;

  if (built.fixed_delta) {
    out.delta = *built.fixed_delta;
  } else {
    std::vector<double> d(instance.leader_actions());
    for (int i = 0; i < instance.leader_actions(); ++i) {
      d[i] = assignment[model.require_variable("d_" + std::to_string(i))];
    }
    out.delta = MixedStrategy::normalized(std::move(d));
  }
  for (int p = 0; p < instance.num_followers(); ++p) {
    const int fa = instance.followers()[p];
    std::vector<double> rho(instance.action_counts()[fa]);
    for (std::size_t j = 0; j < rho.size(); ++j) {
      rho[j] = assignment[model.require_variable(rn(fa, static_cast<int>(j)))];
    }
    out.rhos.push_back(MixedStrategy::normalized(std::move(rho)));
  }

  StrategyProfile profile;
  profile.strategies.resize(instance.num_agents());
  profile.strategies[instance.leader] = out.delta;
  for (int p = 0; p < instance.num_followers(); ++p) {
    profile.strategies[instance.followers()[p]] = out.rhos[p];
  }
  out.leader_value = expected_utility(instance.game, profile, instance.leader);
  out.objective_value = model.evaluate_polynomial(model.objective(), assignment);

  const NeCheck check = is_epsilon_ne(instance, out.delta, out.rhos, eps);
  out.max_regret = check.max_violation;
  if (!check.is_ne) {
    throw CertificationError("follower equilibrium certification failed (violation " +
                                 std::to_string(check.max_violation) + ")",
                             check.max_violation);
  }
  return out;
}

Assignment lift_assignment(const BuiltFormulation& built, const LeaderFollowerInstance& instance,
                           const MixedStrategy& delta, const std::vector<MixedStrategy>& rhos) {
  const Model& model = built.model;
  const auto& followers = instance.followers();
  auto pos_of_agent = [&](int agent) {
    const auto it = std::lower_bound(followers.begin(), followers.end(), agent);
    if (it == followers.end() || *it != agent) throw GameError("not a follower agent");
    return static_cast<int>(it - followers.begin());
  };

  // per-follower action utilities at (delta, rhos)
  std::vector<std::vector<double>> utils(followers.size());
  std::vector<double> best(followers.size());
  for (std::size_t p = 0; p < followers.size(); ++p) {
    utils[p] = action_utilities(instance, delta, rhos, static_cast<int>(p));
    best[p] = *std::max_element(utils[p].begin(), utils[p].end());
  }

  auto split = [](const std::string& name) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= name.size()) {
      const std::size_t next = name.find('_', start);
      if (next == std::string::npos) {
        parts.push_back(name.substr(start));
        break;
      }
      parts.push_back(name.substr(start, next - start));
      start = next + 1;
    }
    return parts;
  };

  Assignment out;
  out.values.assign(model.num_variables(), 0.0);
  for (VarId id = 0; id < model.num_variables(); ++id) {
    const auto parts = split(model.variable(id).name);
    const std::string& kind = parts[0];
    auto arg = [&](std::size_t k) { return std::stoi(parts[k]); };
    double value = 0.0;
    if (kind == "d") {
      value = delta.probs[arg(1)];
    } else if (kind == "r") {
      value = rhos[pos_of_agent(arg(1))].probs[arg(2)];
    } else if (kind == "u") {
      value = utils[pos_of_agent(arg(1))][arg(2)];
    } else if (kind == "v") {
      value = best[pos_of_agent(arg(1))];
    } else if (kind == "reg") {
      const int p = pos_of_agent(arg(1));
      value = best[p] - utils[p][arg(2)];
    } else if (kind == "s") {
      value = rhos[pos_of_agent(arg(1))].probs[arg(2)] <= kFeasTol ? 1.0 : 0.0;
    } else if (kind == "y") {
      value = delta.probs[arg(2)] * rhos[pos_of_agent(arg(1))].probs[arg(3)];
    } else if (kind == "z") {
      value = delta.probs[arg(1)];
      for (std::size_t p = 0; p + 2 < parts.size(); ++p) {
        value *= rhos[p].probs[arg(p + 2)];
      }
    } else if (kind == "q") {
      const int skip = pos_of_agent(arg(1));
      value = delta.probs[arg(2)];
      int p = 0;
      for (std::size_t k = 3; k < parts.size(); ++k, ++p) {
        if (p == skip) ++p;
        value *= rhos[p].probs[arg(k)];
      }
    } else if (kind == "w") {
      value = rhos[0].probs[arg(1)] * rhos[1].probs[arg(2)];
    } else {
      throw GameError("cannot lift variable '" + model.variable(id).name + "'");
    }
    out.values[id] = value;
  }
  return out;
}

}  // namespace lfen
