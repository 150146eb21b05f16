#pragma once

#include <optional>
#include <string>

#include "lfen/game.hpp"
#include "lfen/model.hpp"
#include "lfen/nash_oracles.hpp"

namespace lfen {

// Mathematical-programming formulations of the commitment problem. Naming
// scheme shared with the exporter (0-based indices, f is the follower's
// agent index):
//   d_<i>        leader commitment          r_<f>_<j>    follower strategy
//   u_<f>_<j>    action utility             v_<f>        best-response value
//   reg_<f>_<j>  regret                     s_<f>_<j>    out-of-support flag
//   y_<f>_<i>_<j>                 product d_i * r_f_j
//   z_<i>_<j...>                  chained products over all followers
//   q_<f>_<i>_<k...>              chained products over the co-followers of f
//   w_<j>_<k>                     product of the two follower strategies
//                                 (fixed-commitment second-level models)
enum class FormulationId {
  kOnf1,
  kOnf2,
  kOnf3,
  kOpm1,
  kOpm2,
  kOpm3,
  kOracleNf,
  kOraclePm,
  kOnfLpfm3,
  kOpmLpfm3,
};

const char* to_string(FormulationId id);
std::optional<FormulationId> formulation_from_string(const std::string& name);
bool is_polymatrix_formulation(FormulationId id);
bool is_leader_pure(FormulationId id);
bool is_second_level(FormulationId id);  // commitment enters as data

struct BuiltFormulation {
  FormulationId id{};
  TieMode mode = TieMode::kOptimistic;
  Model model;
  // present for second-level (fixed-commitment) models
  std::optional<MixedStrategy> fixed_delta;
};

// First level + second level in one program, leader mixed, followers mixed.
BuiltFormulation build_onf1(const LeaderFollowerInstance& instance);
BuiltFormulation build_onf2(const LeaderFollowerInstance& instance);
BuiltFormulation build_onf3(const LeaderFollowerInstance& instance);
BuiltFormulation build_opm1(const LeaderFollowerInstance& instance);
BuiltFormulation build_opm2(const LeaderFollowerInstance& instance);
BuiltFormulation build_opm3(const LeaderFollowerInstance& instance);

// Second-level model at a fixed commitment: the followers' equilibrium
// conditions with the leader's utility maximized (optimistic) or minimized
// (pessimistic) over the equilibrium set. Two followers only.
BuiltFormulation build_oracle(const LeaderFollowerInstance& instance, const MixedStrategy& delta,
                              TieMode mode);

// Leader restricted to pure commitments: binary d with the d*r products
// replaced by their exact-at-binary McCormick envelopes.
BuiltFormulation build_onf_lpfm3(const LeaderFollowerInstance& instance);
BuiltFormulation build_opm_lpfm3(const LeaderFollowerInstance& instance);

BuiltFormulation build_formulation(const LeaderFollowerInstance& instance, FormulationId id);

struct CertificationError : GameError {
  double violation = 0.0;
  CertificationError(const std::string& message, double v)
      : GameError(message), violation(v) {}
};

struct ExtractedSolution {
  MixedStrategy delta;
  std::vector<MixedStrategy> rhos;  // by follower position
  double leader_value = 0.0;        // recomputed from the game, not the model
  double objective_value = 0.0;     // model objective at the assignment
  double max_regret = 0.0;
  Assignment raw;
};

// Reads strategies out of a feasible assignment, renormalizes them onto
// their simplices, recomputes the leader's value from the game and certifies
// the follower equilibrium. Throws CertificationError when a follower's
// regret exceeds eps.
ExtractedSolution extract_solution(const BuiltFormulation& built, const Assignment& assignment,
                                   const LeaderFollowerInstance& instance, double eps = kNeEps);

// Completes (delta, rhos) to a full assignment of the formulation's
// variables (products, utilities, regrets, support flags by definition).
Assignment lift_assignment(const BuiltFormulation& built, const LeaderFollowerInstance& instance,
                           const MixedStrategy& delta, const std::vector<MixedStrategy>& rhos);

}  // namespace lfen
