#include "lfen/driver.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lfen {
namespace {

bool use_milp_backend(FormulationId id) {
  return id == FormulationId::kOpmLpfm3 || id == FormulationId::kOraclePm;
}

// Incumbent hook: normalize the relaxation's commitment (snapping to the
// best vertex for pure-leader models), find the best follower equilibrium
// there by enumeration and lift it to a full assignment. Proposals are
// cached on a fine commitment grid to avoid repeated enumeration.
class OracleIncumbentHook {
 public:
  OracleIncumbentHook(const LeaderFollowerInstance& instance, const BuiltFormulation& built)
      : instance_(instance), built_(built) {
    for (int i = 0; i < instance.leader_actions(); ++i) {
      delta_ids_.push_back(built.model.require_variable("d_" + std::to_string(i)));
    }
  }

  std::optional<Assignment> operator()(const std::vector<double>& x) {
    std::vector<double> d(delta_ids_.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < delta_ids_.size(); ++i) {
      d[i] = std::max(x[delta_ids_[i]], 0.0);
      sum += d[i];
    }
    if (sum <= 0.0) return std::nullopt;
    for (double& v : d) v /= sum;
    if (is_leader_pure(built_.id)) {
      const int best = static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
      std::fill(d.begin(), d.end(), 0.0);
      d[best] = 1.0;
    }
    std::vector<long> key(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) key[i] = std::lround(d[i] * 1e6);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    std::optional<Assignment> proposal;
    try {
      const MixedStrategy delta(std::move(d));
      const NeRecord record = best_worst_ne_for_leader(instance_, delta, TieMode::kOptimistic);
      proposal = lift_assignment(built_, instance_, delta, {record.rho1, record.rho2});
    } catch (const GameError&) {
      proposal = std::nullopt;
    }
    cache_.emplace(std::move(key), proposal);
    return proposal;
  }

 private:
  const LeaderFollowerInstance& instance_;
  const BuiltFormulation& built_;
  std::vector<VarId> delta_ids_;
  std::map<std::vector<long>, std::optional<Assignment>> cache_;
};

LfenSolution finish_solve(const LeaderFollowerInstance& instance, const BuiltFormulation& built,
                          SolveResult&& result, double eps) {
  LfenSolution out;
  out.method = built.id;
  out.mode = built.mode;
  out.solve = std::move(result);
  if (!out.solve.incumbent) return out;

  ExtractedSolution extracted = extract_solution(built, *out.solve.incumbent, instance, eps);
  out.delta = extracted.delta;
  out.rhos = extracted.rhos;
  out.leader_value = extracted.leader_value;
  out.max_regret = extracted.max_regret;
  out.certified = true;

  const bool enumerable = [&] {
    if (instance.num_followers() != 2) return false;
    for (int f : instance.followers()) {
      if (instance.action_counts()[f] > kEnumActionCap) return false;
    }
    return true;
  }();
  if (enumerable) {
    const NeRecord record = best_worst_ne_for_leader(instance, out.delta, built.mode);
    out.enumeration_cross_check = record.leader_value;
  }
  return out;
}

}  // namespace

bool solved_to_tolerance(const SolveResult& result) {
  return result.status == SolveStatus::kOptimal || result.status == SolveStatus::kGapLimit;
}

LfenSolution solve_formulation(const LeaderFollowerInstance& instance, FormulationId id,
                               const SolveConfig& config, double eps) {
  if (is_second_level(id)) {
    throw GameError("second-level models are solved through solve_oracle_at");
  }
  BuiltFormulation built = build_formulation(instance, id);

  SolveResult result;
  if (use_milp_backend(id)) {
    result = solve_milp(built.model, config);
  } else {
    std::optional<OracleIncumbentHook> hook;
    IncumbentHook fn;
    if (instance.num_followers() == 2) {
      bool enumerable = true;
      for (int f : instance.followers()) {
        enumerable = enumerable && instance.action_counts()[f] <= kEnumActionCap;
      }
      if (enumerable) {
        hook.emplace(instance, built);
        fn = [&hook](const std::vector<double>& x) { return (*hook)(x); };
      }
    }
    result = solve_spatial(built.model, config, fn);
  }
  return finish_solve(instance, built, std::move(result), eps);
}

LfenSolution solve_oracle_at(const LeaderFollowerInstance& instance, const MixedStrategy& delta,
                             TieMode mode, const SolveConfig& config, double eps) {
  BuiltFormulation built = build_oracle(instance, delta, mode);
  SolveResult result;
  if (use_milp_backend(built.id)) {
    result = solve_milp(built.model, config);
  } else {
    // static incumbent: the enumerated best/worst equilibrium at delta
    bool enumerable = true;
    for (int f : instance.followers()) {
      enumerable = enumerable && instance.action_counts()[f] <= kEnumActionCap;
    }
    std::optional<Assignment> proposal;
    if (enumerable) {
      try {
        const NeRecord record = best_worst_ne_for_leader(instance, delta, mode);
        proposal = lift_assignment(built, instance, delta, {record.rho1, record.rho2});
      } catch (const GameError&) {
        proposal = std::nullopt;
      }
    }
    IncumbentHook fn;
    if (proposal) {
      fn = [&proposal](const std::vector<double>&) { return proposal; };
    }
    result = solve_spatial(built.model, config, fn);
  }
  return finish_solve(instance, built, std::move(result), eps);
}

}  // namespace lfen
