#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lfen/game.hpp"

namespace lfen {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class VarKind { kContinuous, kBinary };
enum class Sense { kEq, kLe, kGe };
enum class Direction { kMaximize, kMinimize };

using VarId = int;

struct Variable {
  std::string name;
  VarKind kind = VarKind::kContinuous;
  double lower = 0.0;
  double upper = 0.0;
};

// coefficient * product of factor variables; factors sorted, degree >= 0.
struct Monomial {
  double coefficient = 0.0;
  std::vector<VarId> factors;

  int degree() const { return static_cast<int>(factors.size()); }
};

// Sum of monomials. Canonical form: factors sorted within each monomial,
// equal factor lists merged, coefficients below 1e-16 dropped.
struct Polynomial {
  std::vector<Monomial> terms;

  Polynomial& add(double coefficient, std::vector<VarId> factors = {});
  void canonicalize();
  int degree() const;
  bool structurally_equal(const Polynomial& other, double tol = 0.0) const;
};

inline constexpr double kCoefficientDropTol = 1e-16;

struct Constraint {
  Polynomial polynomial;
  Sense sense = Sense::kEq;
  double rhs = 0.0;
  std::string tag;  // formulation id + role, stable across runs
};

struct Assignment {
  std::vector<double> values;  // indexed by VarId

  double operator[](VarId v) const { return values[v]; }
};

struct EvalReport {
  double objective = 0.0;
  std::vector<double> constraint_violations;  // by constraint index
  std::vector<double> integrality_violations;  // by variable id, 0 for continuous
  std::vector<double> bound_violations;        // by variable id
  double max_constraint_violation = 0.0;
  double max_integrality_violation = 0.0;
  double max_bound_violation = 0.0;
};

// Algebraic model: declared variables, polynomial constraints, a polynomial
// objective. Built single-threaded, then frozen; frozen models are immutable
// and safe to share.
class Model {
 public:
  VarId add_variable(const std::string& name, VarKind kind, double lower, double upper);
  VarId add_continuous(const std::string& name, double lower, double upper) {
    return add_variable(name, VarKind::kContinuous, lower, upper);
  }
  VarId add_binary(const std::string& name) { return add_variable(name, VarKind::kBinary, 0.0, 1.0); }

  int add_constraint(Polynomial polynomial, Sense sense, double rhs, std::string tag);
  void set_objective(Polynomial objective, Direction direction);

  // Canonicalizes everything and forbids further mutation.
  void freeze();
  bool frozen() const { return frozen_; }

  int num_variables() const { return static_cast<int>(variables_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  const Variable& variable(VarId id) const { return variables_[id]; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Polynomial& objective() const { return objective_; }
  Direction direction() const { return direction_; }

  VarId find_variable(const std::string& name) const;  // -1 when absent
  VarId require_variable(const std::string& name) const;

  // Max monomial degree over objective and constraints.
  int degree() const;
  int num_binaries() const;
  int num_constraints_of_degree(int degree) const;

  EvalReport evaluate(const Assignment& assignment) const;
  double evaluate_polynomial(const Polynomial& p, const Assignment& assignment) const;

  std::string metadata_id;  // formulation id / instance id, free-form

 private:
  void check_mutable() const;
  void check_factors(const Polynomial& p) const;

  std::vector<Variable> variables_;
  std::unordered_map<std::string, VarId> by_name_;
  std::vector<Constraint> constraints_;
  Polynomial objective_;
  Direction direction_ = Direction::kMaximize;
  bool frozen_ = false;
};

}  // namespace lfen
