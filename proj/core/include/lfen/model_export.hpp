#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lfen/model.hpp"

namespace lfen {

struct ExportError : ModelError {
  using ModelError::ModelError;
};

// LP-format text for models that are linear apart from an optional quadratic
// objective (emitted in bracketed syntax). Sections: Maximize/Minimize,
// Subject To, Bounds, Binaries, End. Constraint names are the model tags;
// numerals carry 17 significant digits; output is deterministic in
// declaration order. Grammar in docs/formats.md.
void export_lp(const Model& model, std::ostream& out);
void export_lp_file(const Model& model, const std::string& path);

// Polynomial-format text with explicit monomial products
// (e.g. "+1 d_0 * r_1_0 * r_2_1"); accepts any polynomial model.
void export_pip(const Model& model, std::ostream& out);
void export_pip_file(const Model& model, const std::string& path);

// Parsers for the two formats above (round-trip partners of the writers).
Model import_lp(std::istream& in);
Model import_pip(std::istream& in);
Model import_model_file(const std::string& path);  // dispatches on extension

// Solution dumps: whitespace-separated "name value" lines, '#' comments.
struct ParsedSolution {
  Assignment assignment;
  std::vector<std::string> defaulted;  // declared variables missing from the file
};
ParsedSolution parse_solution(std::istream& in, const Model& model);
ParsedSolution parse_solution_file(const std::string& path, const Model& model);
void write_solution(const Model& model, const Assignment& assignment, std::ostream& out);
void write_solution_file(const Model& model, const Assignment& assignment,
                         const std::string& path);

}  // namespace lfen
