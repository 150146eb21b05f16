#include "lfen/nash_oracles.hpp"

#include <algorithm>
#include <cmath>

#include "lfen/rng.hpp"
#include "lfen/simplex.hpp"

namespace lfen {
namespace {

constexpr double kDedupTol = 1e-7;

std::vector<int> support_of(const MixedStrategy& s) {
  std::vector<int> out;
  for (int j = 0; j < s.size(); ++j) {
    if (s.probs[j] > kFeasTol) out.push_back(j);
  }
  return out;
}

// Feasibility LP for one support pair: indifference on support,
// best-response inequalities off support, simplex rows. The objective
// maximizes the smallest on-support probability (so degenerate games return
// an interior representative) plus a tiny seeded tie-break.
std::optional<NeRecord> solve_support_pair(const BimatrixGame& game,
                                           const std::vector<int>& s1,
                                           const std::vector<int>& s2, Xoshiro256pp& rng) {
  const int m1 = game.a.rows;
  const int m2 = game.a.cols;
  DenseLp lp;
  lp.maximize = true;
  // rho1, rho2, v1, v2, t
  for (int j = 0; j < m1; ++j) lp.add_var(0.0, 0.0);
  for (int k = 0; k < m2; ++k) lp.add_var(0.0, 0.0);
  const double lo_pay = std::min(game.a.min_value(), game.b.min_value());
  const double hi_pay = std::max(game.a.max_value(), game.b.max_value());
  const int v1 = lp.add_var(lo_pay, hi_pay);
  const int v2 = lp.add_var(lo_pay, hi_pay);
  const int t = lp.add_var(0.0, 1.0, 1.0);
  for (int j : s1) lp.upper[j] = 1.0;
  for (int k : s2) lp.upper[m1 + k] = 1.0;
  for (int j : s1) lp.objective[j] = rng.uniform(0.0, 1e-6);
  for (int k : s2) lp.objective[m1 + k] = rng.uniform(0.0, 1e-6);

  // simplex rows
  {
    std::vector<LinearTerm> row;
    for (int j : s1) row.push_back({j, 1.0});
    lp.add_row(std::move(row), Sense::kEq, 1.0);
    std::vector<LinearTerm> row2;
    for (int k : s2) row2.push_back({m1 + k, 1.0});
    lp.add_row(std::move(row2), Sense::kEq, 1.0);
  }
  // on-support probabilities at least t
  for (int j : s1) lp.add_row({{j, 1.0}, {t, -1.0}}, Sense::kGe, 0.0);
  for (int k : s2) lp.add_row({{m1 + k, 1.0}, {t, -1.0}}, Sense::kGe, 0.0);

  // follower 1: (A rho2)_j = v1 on support, <= v1 off support
  for (int j = 0; j < m1; ++j) {
    std::vector<LinearTerm> row;
    for (int k = 0; k < m2; ++k) {
      if (game.a(j, k) != 0.0) row.push_back({m1 + k, game.a(j, k)});
    }
    row.push_back({v1, -1.0});
    const bool on = std::find(s1.begin(), s1.end(), j) != s1.end();
    lp.add_row(std::move(row), on ? Sense::kEq : Sense::kLe, 0.0);
  }
  // follower 2: (rho1^T B)_k = v2 on support, <= v2 off support
  for (int k = 0; k < m2; ++k) {
    std::vector<LinearTerm> row;
    for (int j = 0; j < m1; ++j) {
      if (game.b(j, k) != 0.0) row.push_back({j, game.b(j, k)});
    }
    row.push_back({v2, -1.0});
    const bool on = std::find(s2.begin(), s2.end(), k) != s2.end();
    lp.add_row(std::move(row), on ? Sense::kEq : Sense::kLe, 0.0);
  }

  auto sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) return std::nullopt;

  NeRecord record;
  record.rho1.probs.assign(sol.x.begin(), sol.x.begin() + m1);
  record.rho2.probs.assign(sol.x.begin() + m1, sol.x.begin() + m1 + m2);
  for (double& p : record.rho1.probs) p = std::max(p, 0.0);
  for (double& p : record.rho2.probs) p = std::max(p, 0.0);
  record.value1 = sol.x[v1];
  record.value2 = sol.x[v2];
  record.support1 = support_of(record.rho1);
  record.support2 = support_of(record.rho2);
  return record;
}

double max_regret(const BimatrixGame& game, const NeRecord& r) {
  const int m1 = game.a.rows;
  const int m2 = game.a.cols;
  double worst = 0.0;
  double v1 = -kInf, v2 = -kInf;
  std::vector<double> u1(m1, 0.0), u2(m2, 0.0);
  for (int j = 0; j < m1; ++j) {
    for (int k = 0; k < m2; ++k) u1[j] += game.a(j, k) * r.rho2.probs[k];
    v1 = std::max(v1, u1[j]);
  }
  for (int k = 0; k < m2; ++k) {
    for (int j = 0; j < m1; ++j) u2[k] += game.b(j, k) * r.rho1.probs[j];
    v2 = std::max(v2, u2[k]);
  }
  for (int j : r.support1) worst = std::max(worst, v1 - u1[j]);
  for (int k : r.support2) worst = std::max(worst, v2 - u2[k]);
  return worst;
}

bool close(const NeRecord& a, const NeRecord& b) {
  for (int j = 0; j < a.rho1.size(); ++j) {
    if (std::abs(a.rho1.probs[j] - b.rho1.probs[j]) > kDedupTol) return false;
  }
  for (int k = 0; k < a.rho2.size(); ++k) {
    if (std::abs(a.rho2.probs[k] - b.rho2.probs[k]) > kDedupTol) return false;
  }
  return true;
}

void all_nonempty_subsets(int m, std::vector<std::vector<int>>* out) {
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> subset;
    for (int j = 0; j < m; ++j) {
      if (mask & (1u << j)) subset.push_back(j);
    }
    out->push_back(std::move(subset));
  }
  std::sort(out->begin(), out->end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
}

}  // namespace

std::vector<NeRecord> enumerate_nes(const BimatrixGame& game, std::uint64_t seed) {
  const int m1 = game.a.rows;
  const int m2 = game.a.cols;
  if (m1 > kEnumActionCap || m2 > kEnumActionCap) {
    throw OracleError("support enumeration capped at " + std::to_string(kEnumActionCap) +
                      " actions per follower");
  }
  Xoshiro256pp rng(seed);
  std::vector<std::vector<int>> subsets1, subsets2;
  all_nonempty_subsets(m1, &subsets1);
  all_nonempty_subsets(m2, &subsets2);

  std::vector<NeRecord> found;
  for (const auto& s1 : subsets1) {
    for (const auto& s2 : subsets2) {
      auto record = solve_support_pair(game, s1, s2, rng);
      if (!record) continue;
      if (max_regret(game, *record) > 1e-8) continue;
      const bool duplicate =
          std::any_of(found.begin(), found.end(), [&](const NeRecord& r) { return close(r, *record); });
      if (!duplicate) found.push_back(std::move(*record));
    }
  }
  return found;
}

NeRecord best_worst_ne_for_leader(const LeaderFollowerInstance& instance,
                                  const MixedStrategy& delta, TieMode mode) {
  auto bimatrix = induced_follower_game(instance, delta);
  auto records = enumerate_nes(bimatrix);
  if (records.empty()) {
    throw OracleError("no equilibrium found on the induced game (numerically degenerate)");
  }
  for (auto& r : records) {
    StrategyProfile profile;
    profile.strategies.resize(instance.num_agents());
    profile.strategies[instance.leader] = delta;
    profile.strategies[instance.followers()[0]] = r.rho1;
    profile.strategies[instance.followers()[1]] = r.rho2;
    r.leader_value = expected_utility(instance.game, profile, instance.leader);
  }
  std::sort(records.begin(), records.end(), [](const NeRecord& a, const NeRecord& b) {
    if (a.support1 != b.support1) return a.support1 < b.support1;
    return a.support2 < b.support2;
  });
  const NeRecord* best = &records.front();
  for (const auto& r : records) {
    const bool better = mode == TieMode::kOptimistic ? r.leader_value > best->leader_value + 1e-12
                                                     : r.leader_value < best->leader_value - 1e-12;
    if (better) best = &r;
  }
  return *best;
}

double best_ce_for_leader(const LeaderFollowerInstance& instance, int leader_action) {
  if (instance.num_followers() != 2) {
    throw OracleError("correlated-equilibrium bound requires exactly two followers");
  }
  const int f1 = instance.followers()[0];
  const int f2 = instance.followers()[1];
  const auto& m = instance.action_counts();
  const int m1 = m[f1];
  const int m2 = m[f2];
  if (leader_action < 0 || leader_action >= m[instance.leader]) {
    throw OracleError("leader action out of range");
  }

  std::vector<int> tuple(instance.num_agents(), 0);
  tuple[instance.leader] = leader_action;
  auto pay = [&](int agent, int j, int k) {
    tuple[f1] = j;
    tuple[f2] = k;
    return pure_payoff(instance.game, tuple, agent);
  };

  DenseLp lp;
  lp.maximize = true;
  // joint distribution p(j, k), row-major
  for (int j = 0; j < m1; ++j) {
    for (int k = 0; k < m2; ++k) lp.add_var(0.0, 1.0, pay(instance.leader, j, k));
  }
  auto pvar = [&](int j, int k) { return j * m2 + k; };
  {
    std::vector<LinearTerm> mass;
    for (int v = 0; v < m1 * m2; ++v) mass.push_back({v, 1.0});
    lp.add_row(std::move(mass), Sense::kEq, 1.0);
  }
  // follower 1 deviations j -> j'
  for (int j = 0; j < m1; ++j) {
    for (int jp = 0; jp < m1; ++jp) {
      if (jp == j) continue;
      std::vector<LinearTerm> row;
      for (int k = 0; k < m2; ++k) {
        const double gain = pay(f1, j, k) - pay(f1, jp, k);
        if (gain != 0.0) row.push_back({pvar(j, k), gain});
      }
      if (!row.empty()) lp.add_row(std::move(row), Sense::kGe, 0.0);
    }
  }
  // follower 2 deviations k -> k'
  for (int k = 0; k < m2; ++k) {
    for (int kp = 0; kp < m2; ++kp) {
      if (kp == k) continue;
      std::vector<LinearTerm> row;
      for (int j = 0; j < m1; ++j) {
        const double gain = pay(f2, j, k) - pay(f2, j, kp);
        if (gain != 0.0) row.push_back({pvar(j, k), gain});
      }
      if (!row.empty()) lp.add_row(std::move(row), Sense::kGe, 0.0);
    }
  }

  auto sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw OracleError("correlated-equilibrium LP did not solve (internal error)");
  }
  return sol.objective;
}

std::vector<MixedStrategy> simplex_lattice(int dim, double step) {
  if (dim < 1) throw OracleError("lattice dimension must be positive");
  const double inv = 1.0 / step;
  const long ticks = std::lround(inv);
  if (std::abs(inv - static_cast<double>(ticks)) > 1e-9 || ticks < 1) {
    throw OracleError("lattice step must divide 1");
  }
  std::vector<MixedStrategy> out;
  std::vector<long> counts(dim, 0);
  // compositions of `ticks` into dim parts, first coordinate descending
  auto rec = [&](auto&& self, int level, long remaining) -> void {
    if (level == dim - 1) {
      counts[level] = remaining;
      std::vector<double> p(dim);
      for (int i = 0; i < dim; ++i) {
        p[i] = static_cast<double>(counts[i]) / static_cast<double>(ticks);
      }
      out.push_back(MixedStrategy(std::move(p)));
      return;
    }
    for (long c = remaining; c >= 0; --c) {
      counts[level] = c;
      self(self, level + 1, remaining - c);
    }
  };
  rec(rec, 0, ticks);
  return out;
}

GridSearchResult grid_search_lmfm(const LeaderFollowerInstance& instance, double step,
                                  TieMode mode) {
  const int ml = instance.leader_actions();
  if (ml > 4) throw OracleError("lattice search capped at 4 leader actions");
  auto lattice = simplex_lattice(ml, step);
  GridSearchResult best;
  bool first = true;
  for (const auto& delta : lattice) {
    auto record = best_worst_ne_for_leader(instance, delta, mode);
    if (first || record.leader_value > best.value + 1e-12) {
      best.delta = delta;
      best.record = record;
      best.value = record.leader_value;
      first = false;
    }
  }
  return best;
}

std::optional<PureProfileResult> enumerate_pure_pure(const LeaderFollowerInstance& instance) {
  const auto& m = instance.action_counts();
  std::optional<PureProfileResult> best;
  std::vector<int> probe(m.size());
  for_each_action_tuple(m, [&](std::span<const int> tuple) {
    probe.assign(tuple.begin(), tuple.end());
    for (int f_agent : instance.followers()) {
      const double here = pure_payoff(instance.game, probe, f_agent);
      for (int alt = 0; alt < m[f_agent]; ++alt) {
        if (alt == tuple[f_agent]) continue;
        probe[f_agent] = alt;
        const double other = pure_payoff(instance.game, probe, f_agent);
        probe[f_agent] = tuple[f_agent];
        if (other > here + 1e-12) return;  // profitable deviation, not an equilibrium
      }
    }
    const double value = pure_payoff(instance.game, probe, instance.leader);
    if (!best || value > best->leader_value + 1e-12) {
      best = PureProfileResult{std::vector<int>(tuple.begin(), tuple.end()), value};
    }
  });
  return best;
}

std::optional<MixedLeaderPureFollowersResult> lmfp_via_lps(
    const LeaderFollowerInstance& instance) {
  const auto& m = instance.action_counts();
  const int ml = m[instance.leader];
  const auto& followers = instance.followers();

  std::vector<int> follower_dims;
  for (int f : followers) follower_dims.push_back(m[f]);

  std::optional<MixedLeaderPureFollowersResult> best;
  std::vector<int> tuple(m.size(), 0);
  for_each_action_tuple(follower_dims, [&](std::span<const int> fa) {
    for (std::size_t pos = 0; pos < followers.size(); ++pos) tuple[followers[pos]] = fa[pos];

    // LP over delta: maximize leader utility subject to each follower's
    // action being a best response to (delta, other followers pure).
    DenseLp lp;
    lp.maximize = true;
    for (int i = 0; i < ml; ++i) {
      tuple[instance.leader] = i;
      lp.add_var(0.0, 1.0, pure_payoff(instance.game, tuple, instance.leader));
    }
    {
      std::vector<LinearTerm> mass;
      for (int i = 0; i < ml; ++i) mass.push_back({i, 1.0});
      lp.add_row(std::move(mass), Sense::kEq, 1.0);
    }
    for (std::size_t pos = 0; pos < followers.size(); ++pos) {
      const int f_agent = followers[pos];
      const int played = tuple[f_agent];
      for (int alt = 0; alt < m[f_agent]; ++alt) {
        if (alt == played) continue;
        std::vector<LinearTerm> row;
        for (int i = 0; i < ml; ++i) {
          tuple[instance.leader] = i;
          tuple[f_agent] = played;
          const double here = pure_payoff(instance.game, tuple, f_agent);
          tuple[f_agent] = alt;
          const double there = pure_payoff(instance.game, tuple, f_agent);
          tuple[f_agent] = played;
          const double gain = here - there;
          if (gain != 0.0) row.push_back({i, gain});
        }
        if (!row.empty()) lp.add_row(std::move(row), Sense::kGe, 0.0);
      }
    }
    auto sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal) return;
    if (!best || sol.objective > best->leader_value + 1e-12) {
      MixedLeaderPureFollowersResult r;
      r.delta = MixedStrategy(sol.x);
      r.delta.probs.resize(ml);
      r.follower_actions.assign(fa.begin(), fa.end());
      r.leader_value = sol.objective;
      best = std::move(r);
    }
  });
  return best;
}

}  // namespace lfen
