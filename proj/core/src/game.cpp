#include "lfen/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lfen {
namespace {

void check_finite(const std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw GameError(std::string(what) + ": payoff entry is not finite");
  }
}

std::size_t checked_num_entries(const std::vector<int>& dims) {
  std::size_t total = 1;
  for (int d : dims) {
    if (d < 1) throw GameError("action count must be >= 1");
    total *= static_cast<std::size_t>(d);
  }
  return total;
}

}  // namespace

PayoffTensor::PayoffTensor(std::vector<int> dims, std::vector<double> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  if (checked_num_entries(dims_) != values_.size()) {
    throw GameError("tensor value count does not match its shape");
  }
  check_finite(values_, "tensor");
}

PayoffTensor::PayoffTensor(std::vector<int> dims) : dims_(std::move(dims)) {
  values_.assign(checked_num_entries(dims_), 0.0);
}

std::size_t PayoffTensor::flat_index(std::span<const int> actions) const {
  if (actions.size() != dims_.size()) throw GameError("action tuple arity mismatch");
  std::size_t idx = 0;
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    if (actions[d] < 0 || actions[d] >= dims_[d]) throw GameError("action index out of range");
    idx = idx * static_cast<std::size_t>(dims_[d]) + static_cast<std::size_t>(actions[d]);
  }
  return idx;
}

double PayoffTensor::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double PayoffTensor::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

Matrix::Matrix(int r, int c, std::vector<double> values) : rows(r), cols(c), v(std::move(values)) {
  if (v.size() != static_cast<std::size_t>(r) * c) throw GameError("matrix value count mismatch");
  check_finite(v, "matrix");
}

double Matrix::min_value() const { return *std::min_element(v.begin(), v.end()); }
double Matrix::max_value() const { return *std::max_element(v.begin(), v.end()); }

NormalFormGame::NormalFormGame(std::vector<int> action_counts, std::vector<PayoffTensor> payoffs)
    : m_(std::move(action_counts)), payoffs_(std::move(payoffs)) {
  if (m_.size() < 2) throw GameError("a game needs at least two agents");
  if (payoffs_.size() != m_.size()) throw GameError("one payoff tensor per agent required");
  for (const auto& t : payoffs_) {
    if (t.dims() != m_) throw GameError("payoff tensor shape does not match action counts");
  }
}

PolymatrixGame::PolymatrixGame(std::vector<int> action_counts, std::vector<Matrix> pairwise)
    : m_(std::move(action_counts)), pairwise_(std::move(pairwise)) {
  const int n = static_cast<int>(m_.size());
  if (n < 2) throw GameError("a game needs at least two agents");
  for (int d : m_) {
    if (d < 1) throw GameError("action count must be >= 1");
  }
  if (pairwise_.size() != static_cast<std::size_t>(n) * (n - 1)) {
    throw GameError("polymatrix game needs n*(n-1) pairwise matrices");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Matrix& u = pairwise_[pair_index(i, j)];
      if (u.rows != m_[i] || u.cols != m_[j]) {
        throw GameError("pairwise matrix U_" + std::to_string(i) + "," + std::to_string(j) +
                        " has the wrong shape");
      }
    }
  }
}

std::size_t PolymatrixGame::pair_index(int i, int j) const {
  const int n = static_cast<int>(m_.size());
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw GameError("bad agent pair");
  // (i, j) lexicographic with the diagonal skipped.
  return static_cast<std::size_t>(i) * (n - 1) + (j < i ? j : j - 1);
}

const Matrix& PolymatrixGame::pairwise(int i, int j) const { return pairwise_[pair_index(i, j)]; }
Matrix& PolymatrixGame::pairwise_mutable(int i, int j) { return pairwise_[pair_index(i, j)]; }

int num_agents(const Game& g) {
  return std::visit([](const auto& game) { return game.num_agents(); }, g);
}

const std::vector<int>& action_counts(const Game& g) {
  return std::visit([](const auto& game) -> const std::vector<int>& { return game.action_counts(); },
                    g);
}

bool MixedStrategy::valid(double tol) const {
  if (probs.empty()) return false;
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < -tol) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

MixedStrategy MixedStrategy::normalized(std::vector<double> p, double tol) {
  double sum = 0.0;
  for (double& x : p) {
    if (x < -tol) throw GameError("strategy component below -tol");
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol) throw GameError("strategy mass not within tol of one");
  for (double& x : p) x /= sum;
  return MixedStrategy(std::move(p));
}

MixedStrategy MixedStrategy::pure(int num_actions, int action) {
  std::vector<double> p(num_actions, 0.0);
  p.at(action) = 1.0;
  return MixedStrategy(std::move(p));
}

MixedStrategy MixedStrategy::uniform(int num_actions) {
  return MixedStrategy(std::vector<double>(num_actions, 1.0 / num_actions));
}

LeaderFollowerInstance::LeaderFollowerInstance(Game g, int leader_agent)
    : game(std::move(g)), leader(leader_agent) {
  const int n = lfen::num_agents(game);
  if (leader < 0 || leader >= n) throw GameError("leader index out of range");
  for (int i = 0; i < n; ++i) {
    if (i != leader) followers_.push_back(i);
  }
}

namespace {

void check_profile(const Game& game, const StrategyProfile& profile) {
  const auto& m = action_counts(game);
  if (profile.size() != static_cast<int>(m.size())) {
    throw GameError("profile has the wrong number of strategies");
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (profile.strategies[i].size() != m[i]) {
      throw GameError("strategy of agent " + std::to_string(i) + " has the wrong arity");
    }
  }
}

}  // namespace

double expected_utility(const Game& game, const StrategyProfile& profile, int agent) {
  check_profile(game, profile);
  if (is_polymatrix(game)) {
    const auto& pm = std::get<PolymatrixGame>(game);
    const auto& xi = profile[agent].probs;
    double total = 0.0;
    for (int j = 0; j < pm.num_agents(); ++j) {
      if (j == agent) continue;
      const Matrix& u = pm.pairwise(agent, j);
      const auto& xj = profile[j].probs;
      for (int a = 0; a < u.rows; ++a) {
        if (xi[a] == 0.0) continue;
        double row = 0.0;
        for (int b = 0; b < u.cols; ++b) row += u(a, b) * xj[b];
        total += xi[a] * row;
      }
    }
    return total;
  }
  const auto& nf = std::get<NormalFormGame>(game);
  const PayoffTensor& u = nf.payoff(agent);
  double total = 0.0;
  for_each_action_tuple(nf.action_counts(), [&](std::span<const int> tuple) {
    double prob = 1.0;
    for (std::size_t i = 0; i < tuple.size(); ++i) prob *= profile.strategies[i].probs[tuple[i]];
    if (prob != 0.0) total += prob * u.at(tuple);
  });
  return total;
}

double pure_payoff(const Game& game, std::span<const int> actions, int agent) {
  if (is_normal_form(game)) {
    return std::get<NormalFormGame>(game).payoff(agent).at(actions);
  }
  const auto& pm = std::get<PolymatrixGame>(game);
  double total = 0.0;
  for (int j = 0; j < pm.num_agents(); ++j) {
    if (j == agent) continue;
    total += pm.pairwise(agent, j)(actions[agent], actions[j]);
  }
  return total;
}

std::vector<double> action_utilities(const LeaderFollowerInstance& instance,
                                     const MixedStrategy& delta,
                                     const std::vector<MixedStrategy>& rhos, int follower_pos) {
  const auto& m = instance.action_counts();
  const int f_agent = instance.followers().at(follower_pos);
  if (delta.size() != m[instance.leader]) throw GameError("delta arity mismatch");
  if (rhos.size() != instance.followers().size()) throw GameError("one strategy per follower required");

  std::vector<double> out(m[f_agent], 0.0);
  if (is_polymatrix(instance.game)) {
    const auto& pm = std::get<PolymatrixGame>(instance.game);
    for (int j = 0; j < m[f_agent]; ++j) {
      double u = 0.0;
      const Matrix& vs_leader = pm.pairwise(f_agent, instance.leader);
      for (int i = 0; i < vs_leader.cols; ++i) u += delta.probs[i] * vs_leader(j, i);
      for (std::size_t g = 0; g < instance.followers().size(); ++g) {
        if (static_cast<int>(g) == follower_pos) continue;
        const int g_agent = instance.followers()[g];
        const Matrix& vs_g = pm.pairwise(f_agent, g_agent);
        for (int k = 0; k < vs_g.cols; ++k) u += rhos[g].probs[k] * vs_g(j, k);
      }
      out[j] = u;
    }
    return out;
  }

  const auto& nf = std::get<NormalFormGame>(instance.game);
  const PayoffTensor& u_f = nf.payoff(f_agent);
  // Sum over co-player action tuples; the probability of agent f's own slot
  // is excluded.
  for_each_action_tuple(m, [&](std::span<const int> tuple) {
    double prob = 1.0;
    for (int agent = 0; agent < instance.num_agents(); ++agent) {
      if (agent == f_agent) continue;
      if (agent == instance.leader) {
        prob *= delta.probs[tuple[agent]];
      } else {
        // position of `agent` in the follower list
        const auto& fs = instance.followers();
        const int pos = static_cast<int>(std::lower_bound(fs.begin(), fs.end(), agent) - fs.begin());
        prob *= rhos[pos].probs[tuple[agent]];
      }
      if (prob == 0.0) return;
    }
    out[tuple[f_agent]] += prob * u_f.at(tuple);
  });
  return out;
}

double action_utility(const LeaderFollowerInstance& instance, const MixedStrategy& delta,
                      const std::vector<MixedStrategy>& rhos, int follower_pos, int action) {
  auto u = action_utilities(instance, delta, rhos, follower_pos);
  if (action < 0 || action >= static_cast<int>(u.size())) throw GameError("action index out of range");
  return u[action];
}

double best_response_value(const LeaderFollowerInstance& instance, const MixedStrategy& delta,
                           const std::vector<MixedStrategy>& rhos, int follower_pos) {
  auto u = action_utilities(instance, delta, rhos, follower_pos);
  return *std::max_element(u.begin(), u.end());
}

std::vector<double> regrets(const LeaderFollowerInstance& instance, const MixedStrategy& delta,
                            const std::vector<MixedStrategy>& rhos, int follower_pos) {
  auto u = action_utilities(instance, delta, rhos, follower_pos);
  const double v = *std::max_element(u.begin(), u.end());
  for (double& x : u) x = v - x;
  return u;
}

NeCheck is_epsilon_ne(const LeaderFollowerInstance& instance, const MixedStrategy& delta,
                      const std::vector<MixedStrategy>& rhos, double eps) {
  NeCheck result;
  for (std::size_t f = 0; f < instance.followers().size(); ++f) {
    const auto u = action_utilities(instance, delta, rhos, static_cast<int>(f));
    const double v = *std::max_element(u.begin(), u.end());
    double mixed_value = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      mixed_value += rhos[f].probs[j] * u[j];
      if (rhos[f].probs[j] > kFeasTol) {
        result.max_violation = std::max(result.max_violation, v - u[j]);
      }
    }
    result.max_violation = std::max(result.max_violation, v - mixed_value);
  }
  result.is_ne = result.max_violation <= eps;
  return result;
}

double big_m(const Game& game, int follower_agent) {
  if (is_normal_form(game)) {
    const auto& t = std::get<NormalFormGame>(game).payoff(follower_agent);
    return t.max_value() - t.min_value();
  }
  const auto& pm = std::get<PolymatrixGame>(game);
  double total = 0.0;
  for (int j = 0; j < pm.num_agents(); ++j) {
    if (j == follower_agent) continue;
    const Matrix& u = pm.pairwise(follower_agent, j);
    total += u.max_value() - u.min_value();
  }
  return total;
}

BimatrixGame induced_follower_game(const LeaderFollowerInstance& instance,
                                   const MixedStrategy& delta) {
  if (instance.num_followers() != 2) {
    throw GameError("induced follower game requires exactly two followers");
  }
  const int f1 = instance.followers()[0];
  const int f2 = instance.followers()[1];
  const auto& m = instance.action_counts();
  BimatrixGame out{Matrix(m[f1], m[f2]), Matrix(m[f1], m[f2])};

  if (is_polymatrix(instance.game)) {
    const auto& pm = std::get<PolymatrixGame>(instance.game);
    const Matrix& u12 = pm.pairwise(f1, f2);
    const Matrix& u21 = pm.pairwise(f2, f1);
    const Matrix& u1l = pm.pairwise(f1, instance.leader);
    const Matrix& u2l = pm.pairwise(f2, instance.leader);
    for (int j = 0; j < m[f1]; ++j) {
      double shift1 = 0.0;
      for (int i = 0; i < u1l.cols; ++i) shift1 += delta.probs[i] * u1l(j, i);
      for (int k = 0; k < m[f2]; ++k) out.a(j, k) = u12(j, k) + shift1;
    }
    for (int k = 0; k < m[f2]; ++k) {
      double shift2 = 0.0;
      for (int i = 0; i < u2l.cols; ++i) shift2 += delta.probs[i] * u2l(k, i);
      for (int j = 0; j < m[f1]; ++j) out.b(j, k) = u21(k, j) + shift2;
    }
    return out;
  }

  const auto& nf = std::get<NormalFormGame>(instance.game);
  std::vector<int> tuple(instance.num_agents(), 0);
  for (int j = 0; j < m[f1]; ++j) {
    for (int k = 0; k < m[f2]; ++k) {
      double a = 0.0;
      double b = 0.0;
      for (int i = 0; i < m[instance.leader]; ++i) {
        tuple[f1] = j;
        tuple[f2] = k;
        tuple[instance.leader] = i;
        a += delta.probs[i] * nf.payoff(f1).at(tuple);
        b += delta.probs[i] * nf.payoff(f2).at(tuple);
      }
      out.a(j, k) = a;
      out.b(j, k) = b;
    }
  }
  return out;
}

NormalFormGame embed_as_normal_form(const PolymatrixGame& game) {
  const auto& m = game.action_counts();
  std::vector<PayoffTensor> tensors;
  tensors.reserve(m.size());
  for (int agent = 0; agent < game.num_agents(); ++agent) {
    PayoffTensor t(m);
    for_each_action_tuple(m, [&](std::span<const int> tuple) {
      double total = 0.0;
      for (int j = 0; j < game.num_agents(); ++j) {
        if (j == agent) continue;
        total += game.pairwise(agent, j)(tuple[agent], tuple[j]);
      }
      t.at(tuple) = total;
    });
    tensors.push_back(std::move(t));
  }
  return NormalFormGame(m, std::move(tensors));
}

}  // namespace lfen
