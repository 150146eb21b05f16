#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lfen/formulations.hpp"
#include "lfen/instance_io.hpp"
#include "lfen/model_export.hpp"
#include "lfen/rng.hpp"
#include "testgames.hpp"

using namespace lfen;
using lfen::testing::coord_instance;
using lfen::testing::pennies_instance;

namespace {

bool models_equal(const Model& a, const Model& b) {
  if (a.num_variables() != b.num_variables()) return false;
  for (VarId id = 0; id < a.num_variables(); ++id) {
    const auto& va = a.variable(id);
    const auto& vb = b.variable(id);
    if (va.name != vb.name || va.kind != vb.kind || va.lower != vb.lower || va.upper != vb.upper) {
      return false;
    }
  }
  if (a.direction() != b.direction()) return false;
  if (!a.objective().structurally_equal(b.objective())) return false;
  if (a.num_constraints() != b.num_constraints()) return false;
  for (int i = 0; i < a.num_constraints(); ++i) {
    const auto& ca = a.constraints()[i];
    const auto& cb = b.constraints()[i];
    if (ca.tag != cb.tag || ca.sense != cb.sense || ca.rhs != cb.rhs) return false;
    if (!ca.polynomial.structurally_equal(cb.polynomial)) return false;
  }
  return true;
}

Assignment random_point(const Model& m, Xoshiro256pp& rng) {
  Assignment a;
  a.values.resize(m.num_variables());
  for (VarId id = 0; id < m.num_variables(); ++id) {
    const auto& v = m.variable(id);
    a.values[id] = rng.uniform(v.lower, v.upper);
  }
  return a;
}

}  // namespace

TEST_CASE("linear export of the pure-commitment polymatrix program") {
  auto built = build_opm_lpfm3(pennies_instance());
  std::ostringstream out;
  export_lp(built.model, out);
  const std::string text = out.str();
  CHECK(text.find("Binaries") != std::string::npos);
  CHECK(text.find("d_0") != std::string::npos);
  CHECK(text.find("d_1") != std::string::npos);

  std::istringstream in(text);
  Model parsed = import_lp(in);
  CHECK(models_equal(built.model, parsed));
}

TEST_CASE("nonlinear constraints abort the linear export with their tags") {
  auto built = build_onf3(coord_instance());
  std::ostringstream out;
  CHECK_THROWS_WITH_AS(export_lp(built.model, out), doctest::Contains("z_def"), ExportError);
}

TEST_CASE("quadratic objectives ride in the bracket section") {
  auto built = build_opm2(pennies_instance());
  std::ostringstream out;
  export_lp(built.model, out);
  CHECK(out.str().find("] / 2") != std::string::npos);
  std::istringstream in(out.str());
  Model parsed = import_lp(in);
  CHECK(models_equal(built.model, parsed));
}

TEST_CASE("trivial models survive the linear format") {
  Model m;
  m.add_continuous("x", 0.0, 1.0);
  Polynomial obj;
  obj.add(1.0, {0});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  std::ostringstream out;
  export_lp(m, out);
  std::istringstream in(out.str());
  Model parsed = import_lp(in);
  CHECK(models_equal(m, parsed));
}

TEST_CASE("polynomial export counts the first formulation's rows") {
  auto built = build_onf1(coord_instance());
  std::ostringstream out;
  export_pip(built.model, out);
  const std::string text = out.str();
  // 2 complementarity + 4 best-response + 3 simplex rows
  CHECK(built.model.num_constraints() == 9);
  std::istringstream in(text);
  Model parsed = import_pip(in);
  CHECK(models_equal(built.model, parsed));
}

TEST_CASE("tiny coefficients are dropped before writing") {
  Model m;
  const VarId x = m.add_continuous("x", 0.0, 1.0);
  const VarId y = m.add_continuous("y_tiny", 0.0, 1.0);
  Polynomial obj;
  obj.add(1.0, {x}).add(1e-17, {y});
  m.set_objective(obj, Direction::kMaximize);
  m.freeze();
  std::ostringstream out;
  export_pip(m, out);
  const std::string text = out.str();
  const auto obj_line_end = text.find("Subject To");
  CHECK(text.substr(0, obj_line_end).find("y_tiny") == std::string::npos);
}

TEST_CASE("exports are byte identical across runs") {
  auto built = build_onf2(coord_instance());
  std::ostringstream a, b;
  export_pip(built.model, a);
  export_pip(built.model, b);
  CHECK(a.str() == b.str());
}

TEST_CASE("export, parse and evaluate agree on every formulation") {
  Xoshiro256pp rng(88);
  GeneratorSpec nf_spec{GameClass::kNormalForm, 3, 2, 0.0, 100.0, 21};
  GeneratorSpec pm_spec{GameClass::kPolymatrix, 3, 2, 0.0, 100.0, 22};
  LeaderFollowerInstance nf(generate(nf_spec), 2);
  LeaderFollowerInstance pm(generate(pm_spec), 2);

  std::vector<BuiltFormulation> models;
  for (FormulationId id : {FormulationId::kOnf1, FormulationId::kOnf2, FormulationId::kOnf3,
                           FormulationId::kOnfLpfm3}) {
    models.push_back(build_formulation(nf, id));
  }
  for (FormulationId id : {FormulationId::kOpm1, FormulationId::kOpm2, FormulationId::kOpm3,
                           FormulationId::kOpmLpfm3}) {
    models.push_back(build_formulation(pm, id));
  }
  models.push_back(build_oracle(nf, MixedStrategy::uniform(2), TieMode::kOptimistic));
  models.push_back(build_oracle(pm, MixedStrategy::uniform(2), TieMode::kPessimistic));

  for (const auto& built : models) {
    CAPTURE(to_string(built.id));
    std::ostringstream out;
    export_pip(built.model, out);
    std::istringstream in(out.str());
    Model parsed = import_pip(in);
    REQUIRE(models_equal(built.model, parsed));
    for (int trial = 0; trial < 20; ++trial) {
      auto point = random_point(built.model, rng);
      auto original = built.model.evaluate(point);
      auto reparsed = parsed.evaluate(point);
      CHECK(original.objective == doctest::Approx(reparsed.objective).epsilon(1e-9));
      for (std::size_t c = 0; c < original.constraint_violations.size(); ++c) {
        CHECK(original.constraint_violations[c] ==
              doctest::Approx(reparsed.constraint_violations[c]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("solution dumps") {
  auto built = build_opm_lpfm3(pennies_instance());
  const Model& m = built.model;

  SUBCASE("write and parse round trip") {
    Assignment a;
    a.values.assign(m.num_variables(), 0.0);
    a.values[m.require_variable("d_0")] = 1.0;
    std::ostringstream out;
    write_solution(m, a, out);
    std::istringstream in(out.str());
    auto parsed = parse_solution(in, m);
    CHECK(parsed.assignment[m.require_variable("d_0")] == 1.0);
    CHECK(parsed.defaulted.empty());
  }
  SUBCASE("missing variables default to zero with warnings") {
    std::istringstream in("d_0 0.5\nd_1 0.5\n");
    auto parsed = parse_solution(in, m);
    CHECK(parsed.assignment[m.require_variable("d_0")] == 0.5);
    CHECK(!parsed.defaulted.empty());
    bool rho_defaulted = false;
    for (const auto& name : parsed.defaulted) rho_defaulted = rho_defaulted || name == "r_0_0";
    CHECK(rho_defaulted);
  }
  SUBCASE("unknown names are rejected") {
    std::istringstream in("q_0 1.0\n");
    CHECK_THROWS_WITH_AS(parse_solution(in, m), doctest::Contains("q_0"), ExportError);
  }
}
