#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lfen {

// Feasibility tolerance for simplex membership (probabilities, sums to one).
inline constexpr double kFeasTol = 1e-9;
// Default tolerance when certifying a strategy profile as a Nash equilibrium.
inline constexpr double kNeEps = 1e-6;

struct GameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a formulation or oracle receives the wrong game class.
struct WrongGameClass : GameError {
  using GameError::GameError;
};

// Dense rank-n payoff tensor, row-major over agents 0..n-1.
class PayoffTensor {
 public:
  PayoffTensor() = default;
  PayoffTensor(std::vector<int> dims, std::vector<double> values);
  explicit PayoffTensor(std::vector<int> dims);  // zero-filled

  const std::vector<int>& dims() const { return dims_; }
  std::size_t size() const { return values_.size(); }
  std::size_t flat_index(std::span<const int> actions) const;

  double at(std::span<const int> actions) const { return values_[flat_index(actions)]; }
  double& at(std::span<const int> actions) { return values_[flat_index(actions)]; }
  double flat(std::size_t i) const { return values_[i]; }
  double& flat(std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  double min_value() const;
  double max_value() const;

 private:
  std::vector<int> dims_;
  std::vector<double> values_;
};

// Dense matrix, row-major.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}
  Matrix(int r, int c, std::vector<double> values);

  double operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }
  double& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  double min_value() const;
  double max_value() const;
};

// n-agent game in normal form: one rank-n payoff tensor per agent, all of
// shape m_1 x ... x m_n with finite entries, n >= 2.
class NormalFormGame {
 public:
  NormalFormGame(std::vector<int> action_counts, std::vector<PayoffTensor> payoffs);

  int num_agents() const { return static_cast<int>(m_.size()); }
  const std::vector<int>& action_counts() const { return m_; }
  int actions(int agent) const { return m_[agent]; }
  const PayoffTensor& payoff(int agent) const { return payoffs_[agent]; }
  std::size_t num_outcomes() const { return payoffs_[0].size(); }

 private:
  std::vector<int> m_;
  std::vector<PayoffTensor> payoffs_;
};

// Polymatrix game: a payoff matrix U_ij of shape m_i x m_j for every ordered
// pair of distinct agents; agent i's utility is the sum of its pairwise
// bilinear interactions.
class PolymatrixGame {
 public:
  PolymatrixGame(std::vector<int> action_counts, std::vector<Matrix> pairwise);

  int num_agents() const { return static_cast<int>(m_.size()); }
  const std::vector<int>& action_counts() const { return m_; }
  int actions(int agent) const { return m_[agent]; }
  // Payoff matrix of agent i against agent j (i != j), shape m_i x m_j.
  const Matrix& pairwise(int i, int j) const;
  Matrix& pairwise_mutable(int i, int j);

 private:
  std::size_t pair_index(int i, int j) const;
  std::vector<int> m_;
  std::vector<Matrix> pairwise_;  // (i, j) lexicographic over i != j
};

using Game = std::variant<NormalFormGame, PolymatrixGame>;

inline bool is_normal_form(const Game& g) { return std::holds_alternative<NormalFormGame>(g); }
inline bool is_polymatrix(const Game& g) { return std::holds_alternative<PolymatrixGame>(g); }
int num_agents(const Game& g);
const std::vector<int>& action_counts(const Game& g);

// Probability vector on an action simplex.
struct MixedStrategy {
  std::vector<double> probs;

  MixedStrategy() = default;
  explicit MixedStrategy(std::vector<double> p) : probs(std::move(p)) {}

  int size() const { return static_cast<int>(probs.size()); }
  bool valid(double tol = kFeasTol) const;
  // Clips components in [-tol, 0) to zero and rescales to sum one. Throws if
  // a component is below -tol or the mass is not within tol of one.
  static MixedStrategy normalized(std::vector<double> p, double tol = kFeasTol);

  static MixedStrategy pure(int num_actions, int action);
  static MixedStrategy uniform(int num_actions);
};

struct StrategyProfile {
  std::vector<MixedStrategy> strategies;

  int size() const { return static_cast<int>(strategies.size()); }
  const MixedStrategy& operator[](int agent) const { return strategies[agent]; }
};

// A game plus the identity of the committing agent. Followers are every
// other agent, in increasing agent order.
struct LeaderFollowerInstance {
  Game game;
  int leader = -1;

  LeaderFollowerInstance(Game g, int leader_agent);

  int num_agents() const { return lfen::num_agents(game); }
  const std::vector<int>& action_counts() const { return lfen::action_counts(game); }
  int leader_actions() const { return action_counts()[leader]; }
  const std::vector<int>& followers() const { return followers_; }
  int num_followers() const { return static_cast<int>(followers_.size()); }

 private:
  std::vector<int> followers_;
};

// --- expected-utility algebra ------------------------------------------

// Multilinear (NF) or bilinear (PM) expected utility of one agent.
double expected_utility(const Game& game, const StrategyProfile& profile, int agent);

// Payoff of `agent` at a pure action tuple.
double pure_payoff(const Game& game, std::span<const int> actions, int agent);

// Utility follower f expects from playing action j, given the leader's
// commitment delta and the other followers' strategies (rhos is indexed by
// follower position in instance.followers(); entry f itself is ignored).
double action_utility(const LeaderFollowerInstance& instance, const MixedStrategy& delta,
                      const std::vector<MixedStrategy>& rhos, int follower_pos, int action);
std::vector<double> action_utilities(const LeaderFollowerInstance& instance,
                                     const MixedStrategy& delta,
                                     const std::vector<MixedStrategy>& rhos, int follower_pos);

// Best-response value v_f = max_j u_f^j.
double best_response_value(const LeaderFollowerInstance& instance, const MixedStrategy& delta,
                           const std::vector<MixedStrategy>& rhos, int follower_pos);

// Regrets r_f^j = v_f - u_f^j >= 0.
std::vector<double> regrets(const LeaderFollowerInstance& instance, const MixedStrategy& delta,
                            const std::vector<MixedStrategy>& rhos, int follower_pos);

struct NeCheck {
  bool is_ne = false;
  double max_violation = 0.0;  // largest regret on support / mixed-value gap
};

// Checks that, with the leader committed to delta, no follower can gain more
// than eps by deviating: regret on every supported action <= eps and
// v_f - u_f(rho_f) <= eps. The leader is not checked.
NeCheck is_epsilon_ne(const LeaderFollowerInstance& instance, const MixedStrategy& delta,
                      const std::vector<MixedStrategy>& rhos, double eps = kNeEps);

// Regret bound M_f: payoff range of follower f. For polymatrix games the sum
// of the pairwise ranges, a valid bound on any regret.
double big_m(const Game& game, int follower_agent);

// Two-follower bimatrix game induced by fixing the leader's commitment;
// entries fold delta into the follower payoffs. A is follower 1's payoff
// (rows = its actions), B is follower 2's (rows = follower 1's actions,
// columns = its own).
struct BimatrixGame {
  Matrix a;
  Matrix b;
};
BimatrixGame induced_follower_game(const LeaderFollowerInstance& instance,
                                   const MixedStrategy& delta);

// Expands a polymatrix game into the equivalent normal-form tensor game.
NormalFormGame embed_as_normal_form(const PolymatrixGame& game);

// Iterates over all pure action tuples of the given shape in row-major
// order; `fn` receives the current tuple.
template <typename Fn>
void for_each_action_tuple(std::span<const int> dims, Fn&& fn) {
  std::vector<int> tuple(dims.size(), 0);
  if (dims.empty()) return;
  for (;;) {
    fn(std::span<const int>(tuple));
    int pos = static_cast<int>(dims.size()) - 1;
    while (pos >= 0) {
      if (++tuple[pos] < dims[pos]) break;
      tuple[pos] = 0;
      --pos;
    }
    if (pos < 0) return;
  }
}

}  // namespace lfen
