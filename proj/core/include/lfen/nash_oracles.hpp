#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lfen/game.hpp"

namespace lfen {

// Brute-force equilibrium machinery over two-follower games: support
// enumeration on the induced bimatrix game, best/worst equilibrium selection
// for the leader, correlated-equilibrium bounds, a simplex-lattice search
// over commitments, and the pure-strategy procedures. Everything here is
// deliberately independent of the mathematical-programming path so it can
// certify it.

struct OracleError : GameError {
  using GameError::GameError;
};

// Support pairs per follower are enumerated up to this many actions.
inline constexpr int kEnumActionCap = 8;

struct NeRecord {
  std::vector<int> support1;
  std::vector<int> support2;
  MixedStrategy rho1;
  MixedStrategy rho2;
  double value1 = 0.0;       // follower best-response values
  double value2 = 0.0;
  double leader_value = 0.0; // at the delta the record was computed for
};

// All Nash equilibria of a bimatrix game found by support enumeration.
// For each support pair the indifference/best-response system is solved as a
// feasibility LP whose objective maximizes the minimum on-support
// probability plus a tiny seeded perturbation, so degenerate games yield a
// deterministic representative per support. Results deduplicated at 1e-7.
std::vector<NeRecord> enumerate_nes(const BimatrixGame& game, std::uint64_t seed = 20240901);

enum class TieMode { kOptimistic, kPessimistic };

// Best (optimistic) or worst (pessimistic) equilibrium for the leader at a
// fixed commitment; ties broken by lexicographic support order.
NeRecord best_worst_ne_for_leader(const LeaderFollowerInstance& instance,
                                  const MixedStrategy& delta, TieMode mode);

// Leader value of the best correlated equilibrium of the follower game at a
// pure leader action. Always feasible; upper-bounds the optimistic
// Nash-based value at the same action.
double best_ce_for_leader(const LeaderFollowerInstance& instance, int leader_action);

struct GridSearchResult {
  MixedStrategy delta;
  NeRecord record;
  double value = 0.0;
};

// Scans commitments on the simplex lattice with the given spacing and picks
// the best best/worst-equilibrium value. A certified lower bound on the
// mixed-commitment optimum in optimistic mode.
GridSearchResult grid_search_lmfm(const LeaderFollowerInstance& instance, double step,
                                  TieMode mode);

struct PureProfileResult {
  std::vector<int> profile;  // one action per agent
  double leader_value = 0.0;
};

// Scans all pure profiles; keeps those where every follower plays a pure
// best response; returns the best for the leader, or nullopt when no pure
// equilibrium exists. Works for any number of followers.
std::optional<PureProfileResult> enumerate_pure_pure(const LeaderFollowerInstance& instance);

struct MixedLeaderPureFollowersResult {
  MixedStrategy delta;
  std::vector<int> follower_actions;  // by follower position
  double leader_value = 0.0;
};

// Mixed leader, pure followers: one LP per follower action profile,
// maximizing the leader's utility subject to each follower's action being a
// best response. Returns the best feasible LP, or nullopt when none is.
std::optional<MixedLeaderPureFollowersResult> lmfp_via_lps(
    const LeaderFollowerInstance& instance);

// All lattice points with the given spacing on the (dim-1)-simplex, in
// lexicographic order. step must divide 1 (within 1e-9).
std::vector<MixedStrategy> simplex_lattice(int dim, double step);

}  // namespace lfen
