#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "lfen/meta.hpp"
#include "lfen/rng.hpp"

namespace lfen {
namespace {

using Clock = std::chrono::steady_clock;

// Gaussian elimination with partial pivoting; false on singular.
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                 std::vector<double>* x) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-12) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c2 = col; c2 < n; ++c2) a[r][c2] -= f * a[col][c2];
      b[r] -= f * b[col];
    }
  }
  x->resize(n);
  for (int i = 0; i < n; ++i) (*x)[i] = b[i] / a[i][i];
  return true;
}

// Cubic radial basis interpolant with a linear polynomial tail over chart
// coordinates (the commitment with its last component dropped).
class CubicRbf {
 public:
  bool fit(const std::vector<std::vector<double>>& points, const std::vector<double>& values) {
    points_ = points;
    const int n = static_cast<int>(points.size());
    const int d = n == 0 ? 0 : static_cast<int>(points[0].size());
    const int size = n + d + 1;
    std::vector<std::vector<double>> a(size, std::vector<double>(size, 0.0));
    std::vector<double> b(size, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a[i][j] = kernel(distance(points[i], points[j]));
      a[i][n] = 1.0;
      a[n][i] = 1.0;
      for (int k = 0; k < d; ++k) {
        a[i][n + 1 + k] = points[i][k];
        a[n + 1 + k][i] = points[i][k];
      }
      b[i] = values[i];
    }
    std::vector<double> sol;
    bool ok = solve_dense(a, b, &sol);
    if (!ok) {
      // tiny ridge on the kernel block for degenerate geometry
      for (int i = 0; i < n; ++i) a[i][i] += 1e-8;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a[i][j] = kernel(distance(points_[i], points_[j])) + (i == j ? 1e-8 : 0.0);
      }
      ok = solve_dense(a, b, &sol);
      if (!ok) return false;
    }
    weights_.assign(sol.begin(), sol.begin() + n);
    tail_.assign(sol.begin() + n, sol.end());
    return true;
  }

  double eval(const std::vector<double>& x) const {
    double s = tail_[0];
    for (std::size_t k = 0; k < x.size(); ++k) s += tail_[1 + k] * x[k];
    for (std::size_t i = 0; i < points_.size(); ++i) {
      s += weights_[i] * kernel(distance(points_[i], x));
    }
    return s;
  }

 private:
  static double kernel(double r) { return r * r * r; }
  static double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  }

  std::vector<std::vector<double>> points_;
  std::vector<double> weights_;
  std::vector<double> tail_;
};

std::vector<double> chart(const MixedStrategy& delta) {
  return std::vector<double>(delta.probs.begin(), delta.probs.end() - 1);
}

MixedStrategy dirichlet(int dim, Xoshiro256pp& rng) {
  std::vector<double> p(dim);
  double sum = 0.0;
  for (double& v : p) {
    v = -std::log(std::max(1.0 - rng.next_double(), 1e-300));
    sum += v;
  }
  for (double& v : p) v /= sum;
  return MixedStrategy(std::move(p));
}

double min_distance(const std::vector<double>& x, const std::vector<std::vector<double>>& points) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - p[k]) * (x[k] - p[k]);
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

}  // namespace

BlackBoxResult blackbox_lfen(const LeaderFollowerInstance& instance, const BlackBoxConfig& config) {
  if (instance.num_followers() != 2) {
    throw GameError("the surrogate search requires exactly two followers");
  }
  const int ml = instance.leader_actions();
  const int budget = config.eval_budget > 0 ? config.eval_budget : 50 * ml;
  int design_size = config.init_design_size > 0 ? config.init_design_size : 2 * ml + 1;
  design_size = std::min(design_size, budget);
  if (ml > 1 && design_size < ml + 1 && budget >= ml + 1) design_size = ml + 1;

  Xoshiro256pp rng(config.seed);
  BlackBoxResult result;
  result.value = -std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> evaluated_points;  // chart coords
  std::vector<double> evaluated_values;

  auto evaluate = [&](const MixedStrategy& delta) {
    BlackBoxTraceRow row;
    row.iteration = result.evaluations;
    row.delta = delta.probs;
    const auto t0 = Clock::now();
    try {
      LfenSolution sol = solve_oracle_at(instance, delta, config.mode, config.oracle_config);
      row.oracle_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
      if (!sol.certified || !solved_to_tolerance(sol.solve)) throw SolverError("uncertified point");
      row.value = sol.leader_value;
      evaluated_points.push_back(chart(delta));
      evaluated_values.push_back(sol.leader_value);
      if (sol.leader_value > result.value) {
        result.value = sol.leader_value;
        result.best = std::move(sol);
      }
    } catch (const GameError&) {
      row.failed = true;
      row.value = std::numeric_limits<double>::quiet_NaN();
      row.oracle_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    }
    ++result.evaluations;
    row.best_so_far = result.value;
    result.trace.push_back(std::move(row));
  };

  // initial design: vertices first, Dirichlet fills, truncated to size;
  // numerically duplicate points are dropped (the one-action simplex
  // degenerates to a single evaluation)
  std::vector<MixedStrategy> design;
  auto push_unique = [&](MixedStrategy delta) {
    for (const auto& seen : design) {
      double dist = 0.0;
      for (int i = 0; i < ml; ++i) dist = std::max(dist, std::abs(seen.probs[i] - delta.probs[i]));
      if (dist < 1e-12) return;
    }
    design.push_back(std::move(delta));
  };
  for (int i = 0; i < ml && static_cast<int>(design.size()) < design_size; ++i) {
    push_unique(MixedStrategy::pure(ml, i));
  }
  for (int attempt = 0; attempt < 64 && static_cast<int>(design.size()) < design_size; ++attempt) {
    if (ml == 1) break;
    push_unique(dirichlet(ml, rng));
  }
  for (const auto& delta : design) {
    if (result.evaluations >= budget) break;
    evaluate(delta);
  }

  const int loop_budget = budget - result.evaluations;
  for (int iter = 0; iter < loop_budget; ++iter) {
    if (ml == 1) break;  // the simplex is a single point
    const double lambda = loop_budget > 1 ? 1.0 - static_cast<double>(iter) / (loop_budget - 1) : 0.0;

    CubicRbf surrogate;
    const bool fitted =
        evaluated_points.size() >= 2 && surrogate.fit(evaluated_points, evaluated_values);

    MixedStrategy best_candidate = dirichlet(ml, rng);
    double best_score = -std::numeric_limits<double>::infinity();
    bool have_candidate = false;
    for (int c = 0; c < config.candidate_pool; ++c) {
      MixedStrategy candidate = c == 0 ? best_candidate : dirichlet(ml, rng);
      const auto x = chart(candidate);
      const double dist = min_distance(x, evaluated_points);
      if (dist < 1e-9) continue;  // numerically duplicate point
      const double value = fitted ? surrogate.eval(x) : 0.0;
      const double score = value - lambda * dist;
      if (!have_candidate || score > best_score) {
        best_score = score;
        best_candidate = std::move(candidate);
        have_candidate = true;
      }
    }
    if (!have_candidate) break;
    evaluate(best_candidate);
  }
  return result;
}

}  // namespace lfen
