#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lfen/rng.hpp"
#include "lfen/simplex.hpp"

using namespace lfen;

namespace {

// Brute-force LP oracle: enumerates candidate vertices as intersections of
// variable bounds and row hyperplanes, filters by feasibility, and returns
// the best objective. Independent of the simplex implementation.
struct BruteLp {
  const DenseLp& lp;

  bool feasible(const std::vector<double>& x) const {
    for (int j = 0; j < lp.num_vars(); ++j) {
      if (x[j] < lp.lower[j] - 1e-7 || x[j] > lp.upper[j] + 1e-7) return false;
    }
    for (const auto& row : lp.rows) {
      double lhs = 0.0;
      for (const auto& t : row.terms) lhs += t.coef * x[t.var];
      if (row.sense == Sense::kLe && lhs > row.rhs + 1e-7) return false;
      if (row.sense == Sense::kGe && lhs < row.rhs - 1e-7) return false;
      if (row.sense == Sense::kEq && std::abs(lhs - row.rhs) > 1e-7) return false;
    }
    return true;
  }

  double objective(const std::vector<double>& x) const {
    double obj = 0.0;
    for (int j = 0; j < lp.num_vars(); ++j) obj += lp.objective[j] * x[j];
    return obj;
  }

  // Solves an n x n dense system by Gaussian elimination; empty on singular.
  static std::vector<double> solve_square(std::vector<std::vector<double>> a,
                                          std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
      int piv = col;
      for (int r = col + 1; r < n; ++r) {
        if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
      }
      if (std::abs(a[piv][col]) < 1e-10) return {};
      std::swap(a[piv], a[col]);
      std::swap(b[piv], b[col]);
      for (int r = 0; r < n; ++r) {
        if (r == col) continue;
        const double f = a[r][col] / a[col][col];
        if (f == 0.0) continue;
        for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
        b[r] -= f * b[col];
      }
    }
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
  }

  // max objective over all vertices; NaN when infeasible
  double best_vertex() const {
    const int n = lp.num_vars();
    // hyperplane list: every row treated as equality, plus both bounds
    struct Plane {
      std::vector<double> a;
      double b;
    };
    std::vector<Plane> planes;
    for (const auto& row : lp.rows) {
      Plane p{std::vector<double>(n, 0.0), row.rhs};
      for (const auto& t : row.terms) p.a[t.var] += t.coef;
      planes.push_back(std::move(p));
    }
    for (int j = 0; j < n; ++j) {
      Plane lo{std::vector<double>(n, 0.0), lp.lower[j]};
      lo.a[j] = 1.0;
      planes.push_back(lo);
      Plane hi{std::vector<double>(n, 0.0), lp.upper[j]};
      hi.a[j] = 1.0;
      planes.push_back(hi);
    }
    double best = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> pick(n, 0);
    const int total = static_cast<int>(planes.size());
    // all n-subsets of planes
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (;;) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (int i : idx) {
        a.push_back(planes[i].a);
        b.push_back(planes[i].b);
      }
      auto x = solve_square(std::move(a), std::move(b));
      if (!x.empty() && feasible(x)) {
        const double obj = objective(x);
        if (std::isnan(best) || (lp.maximize ? obj > best : obj < best)) best = obj;
      }
      int pos = n - 1;
      while (pos >= 0 && idx[pos] == total - n + pos) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int i = pos + 1; i < n; ++i) idx[i] = idx[i - 1] + 1;
    }
    return best;
  }
};

}  // namespace

TEST_CASE("simple bounded maximization") {
  DenseLp lp;
  lp.maximize = true;
  lp.add_var(0.0, kInf, 1.0);
  lp.add_var(0.0, kInf, 1.0);
  lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::kLe, 1.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(sol.dual_feasible);
}

TEST_CASE("infeasible bounds are reported") {
  DenseLp lp;
  lp.add_var(0.0, kInf, 1.0);
  lp.add_row({{0, 1.0}}, Sense::kLe, -1.0);
  auto sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::kInfeasible);
}

TEST_CASE("unbounded problems are reported") {
  DenseLp lp;
  lp.maximize = true;
  lp.add_var(0.0, kInf, 1.0);
  lp.add_row({{0, 1.0}}, Sense::kGe, 1.0);
  auto sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::kUnbounded);
}

TEST_CASE("degenerate redundant equalities still terminate") {
  // max x + 2y over x+y+z = 1 (three redundant copies), y <= 0.4, all >= 0.
  // Vertices: (1,0,0) -> 1, (0.6,0.4,0) -> 1.4, (0,0.4,0.6) -> 0.8,
  // (0,0,1) -> 0. Optimum 1.4.
  DenseLp lp;
  lp.maximize = true;
  lp.add_var(0.0, kInf, 1.0);
  lp.add_var(0.0, kInf, 2.0);
  lp.add_var(0.0, kInf, 0.0);
  for (double s : {1.0, 2.0, 3.0}) {
    lp.add_row({{0, s}, {1, s}, {2, s}}, Sense::kEq, s);
  }
  lp.add_row({{1, 1.0}}, Sense::kLe, 0.4);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(1.4));
  CHECK(sol.x[0] == doctest::Approx(0.6));
  CHECK(sol.x[1] == doctest::Approx(0.4));
}

TEST_CASE("upper bounds participate without explicit rows") {
  DenseLp lp;
  lp.maximize = true;
  lp.add_var(0.0, 0.25, 3.0);
  lp.add_var(-1.0, 2.0, -1.0);
  lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::kGe, 0.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(0.25));
  CHECK(sol.x[1] == doctest::Approx(-0.25));
  CHECK(sol.objective == doctest::Approx(1.0));
}

TEST_CASE("negative lower bounds and equality mix") {
  DenseLp lp;
  lp.maximize = false;
  lp.add_var(-5.0, 5.0, 1.0);
  lp.add_var(-5.0, 5.0, 1.0);
  lp.add_row({{0, 1.0}, {1, -1.0}}, Sense::kEq, 2.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(-8.0));  // x=-3, y=-5
}

TEST_CASE("random LPs agree with vertex enumeration") {
  Xoshiro256pp rng(2024);
  int solved = 0;
  for (int seed = 0; seed < 100; ++seed) {
    DenseLp lp;
    lp.maximize = true;
    for (int j = 0; j < 5; ++j) lp.add_var(0.0, 1.0, rng.uniform(-1.0, 1.0));
    const int extra_rows = 2 + static_cast<int>(rng.next_below(4));
    for (int r = 0; r < extra_rows; ++r) {
      std::vector<LinearTerm> terms;
      for (int j = 0; j < 5; ++j) {
        const double c = rng.uniform(-1.0, 1.0);
        if (std::abs(c) > 0.2) terms.push_back({j, c});
      }
      if (terms.empty()) terms.push_back({0, 1.0});
      const Sense sense = rng.next_below(2) == 0 ? Sense::kLe : Sense::kGe;
      lp.add_row(std::move(terms), sense, rng.uniform(-0.5, 1.5));
    }
    auto sol = solve_lp(lp);
    BruteLp brute{lp};
    const double expected = brute.best_vertex();
    if (std::isnan(expected)) {
      CHECK(sol.status == LpStatus::kInfeasible);
    } else {
      REQUIRE(sol.status == LpStatus::kOptimal);
      CHECK(sol.objective == doctest::Approx(expected).epsilon(1e-9));
      ++solved;
    }
  }
  CHECK(solved > 50);  // the batch should be mostly feasible
}
