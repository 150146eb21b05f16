#include "lfen/model.hpp"

#include <algorithm>
#include <cmath>

namespace lfen {

Polynomial& Polynomial::add(double coefficient, std::vector<VarId> factors) {
  std::sort(factors.begin(), factors.end());
  terms.push_back(Monomial{coefficient, std::move(factors)});
  return *this;
}

void Polynomial::canonicalize() {
  for (auto& t : terms) std::sort(t.factors.begin(), t.factors.end());
  std::sort(terms.begin(), terms.end(), [](const Monomial& a, const Monomial& b) {
    if (a.factors.size() != b.factors.size()) return a.factors.size() < b.factors.size();
    return a.factors < b.factors;
  });
  std::vector<Monomial> merged;
  for (auto& t : terms) {
    if (!merged.empty() && merged.back().factors == t.factors) {
      merged.back().coefficient += t.coefficient;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged, [](const Monomial& t) { return std::abs(t.coefficient) < kCoefficientDropTol; });
  terms = std::move(merged);
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& t : terms) d = std::max(d, t.degree());
  return d;
}

bool Polynomial::structurally_equal(const Polynomial& other, double tol) const {
  if (terms.size() != other.terms.size()) return false;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].factors != other.terms[i].factors) return false;
    if (std::abs(terms[i].coefficient - other.terms[i].coefficient) > tol) return false;
  }
  return true;
}

void Model::check_mutable() const {
  if (frozen_) throw ModelError("model is frozen");
}

VarId Model::add_variable(const std::string& name, VarKind kind, double lower, double upper) {
  check_mutable();
  if (name.empty()) throw ModelError("variable name must not be empty");
  if (by_name_.contains(name)) throw ModelError("duplicate variable name '" + name + "'");
  if (!(lower <= upper)) throw ModelError("variable '" + name + "' has lower > upper");
  if (kind == VarKind::kBinary && (lower < 0.0 || upper > 1.0)) {
    throw ModelError("binary variable '" + name + "' must have bounds within [0, 1]");
  }
  const VarId id = static_cast<VarId>(variables_.size());
  variables_.push_back(Variable{name, kind, lower, upper});
  by_name_.emplace(name, id);
  return id;
}

void Model::check_factors(const Polynomial& p) const {
  for (const auto& t : p.terms) {
    for (VarId v : t.factors) {
      if (v < 0 || v >= num_variables()) {
        throw ModelError("monomial references undeclared variable id " + std::to_string(v));
      }
    }
  }
}

int Model::add_constraint(Polynomial polynomial, Sense sense, double rhs, std::string tag) {
  check_mutable();
  check_factors(polynomial);
  if (!std::isfinite(rhs)) throw ModelError("constraint rhs must be finite");
  polynomial.canonicalize();
  if (polynomial.terms.empty()) throw ModelError("constraint '" + tag + "' has no monomials");
  constraints_.push_back(Constraint{std::move(polynomial), sense, rhs, std::move(tag)});
  return static_cast<int>(constraints_.size()) - 1;
}

void Model::set_objective(Polynomial objective, Direction direction) {
  check_mutable();
  check_factors(objective);
  objective.canonicalize();
  objective_ = std::move(objective);
  direction_ = direction;
}

void Model::freeze() {
  if (frozen_) return;
  objective_.canonicalize();
  for (auto& c : constraints_) c.polynomial.canonicalize();
  frozen_ = true;
}

VarId Model::find_variable(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

VarId Model::require_variable(const std::string& name) const {
  const VarId id = find_variable(name);
  if (id < 0) throw ModelError("unknown variable '" + name + "'");
  return id;
}

int Model::degree() const {
  int d = objective_.degree();
  for (const auto& c : constraints_) d = std::max(d, c.polynomial.degree());
  return d;
}

int Model::num_binaries() const {
  int count = 0;
  for (const auto& v : variables_) count += v.kind == VarKind::kBinary ? 1 : 0;
  return count;
}

int Model::num_constraints_of_degree(int degree) const {
  int count = 0;
  for (const auto& c : constraints_) count += c.polynomial.degree() == degree ? 1 : 0;
  return count;
}

double Model::evaluate_polynomial(const Polynomial& p, const Assignment& assignment) const {
  if (assignment.values.size() != variables_.size()) {
    throw ModelError("assignment does not cover all variables");
  }
  double total = 0.0;
  for (const auto& t : p.terms) {
    double value = t.coefficient;
    for (VarId v : t.factors) value *= assignment.values[v];
    total += value;
  }
  return total;
}

EvalReport Model::evaluate(const Assignment& assignment) const {
  EvalReport report;
  report.objective = evaluate_polynomial(objective_, assignment);
  report.constraint_violations.reserve(constraints_.size());
  for (const auto& c : constraints_) {
    const double lhs = evaluate_polynomial(c.polynomial, assignment);
    double violation = 0.0;
    switch (c.sense) {
      case Sense::kEq: violation = std::abs(lhs - c.rhs); break;
      case Sense::kLe: violation = std::max(0.0, lhs - c.rhs); break;
      case Sense::kGe: violation = std::max(0.0, c.rhs - lhs); break;
    }
    report.constraint_violations.push_back(violation);
    report.max_constraint_violation = std::max(report.max_constraint_violation, violation);
  }
  report.integrality_violations.assign(variables_.size(), 0.0);
  report.bound_violations.assign(variables_.size(), 0.0);
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const double x = assignment.values[i];
    const Variable& v = variables_[i];
    if (v.kind == VarKind::kBinary) {
      const double d = std::min(std::abs(x), std::abs(1.0 - x));
      report.integrality_violations[i] = d;
      report.max_integrality_violation = std::max(report.max_integrality_violation, d);
    }
    const double bv = std::max(std::max(v.lower - x, x - v.upper), 0.0);
    report.bound_violations[i] = bv;
    report.max_bound_violation = std::max(report.max_bound_violation, bv);
  }
  return report;
}

}  // namespace lfen
