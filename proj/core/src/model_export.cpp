#include "lfen/model_export.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "lfen/instance_io.hpp"

namespace lfen {
namespace {

void append_factors(std::string* out, const Model& model, const Monomial& term) {
  for (std::size_t i = 0; i < term.factors.size(); ++i) {
    *out += i == 0 ? " " : " * ";
    *out += model.variable(term.factors[i]).name;
  }
}

std::string render_terms(const Model& model, const Polynomial& poly, double scale = 1.0) {
  std::string out;
  for (const auto& term : poly.terms) {
    const double c = term.coefficient * scale;
    out += c < 0.0 ? " - " : " + ";
    out += format_double(std::abs(c));
    append_factors(&out, model, term);
  }
  if (out.empty()) out = " 0";
  return out;
}

const char* sense_text(Sense s) {
  switch (s) {
    case Sense::kLe: return "<=";
    case Sense::kGe: return ">=";
    case Sense::kEq: return "=";
  }
  return "=";
}

void write_tail_sections(const Model& model, std::ostream& out) {
  out << "Bounds\n";
  for (const auto& v : model.variables()) {
    out << ' ' << format_double(v.lower) << " <= " << v.name << " <= " << format_double(v.upper)
        << "\n";
  }
  bool any_binary = false;
  for (const auto& v : model.variables()) any_binary = any_binary || v.kind == VarKind::kBinary;
  if (any_binary) {
    out << "Binaries\n";
    for (const auto& v : model.variables()) {
      if (v.kind == VarKind::kBinary) out << ' ' << v.name << "\n";
    }
  }
  out << "End\n";
}

}  // namespace

void export_lp(const Model& model, std::ostream& out) {
  // linear constraints, at most quadratic objective
  std::string offenders;
  for (const auto& c : model.constraints()) {
    if (c.polynomial.degree() > 1) {
      if (!offenders.empty()) offenders += ", ";
      offenders += c.tag;
    }
  }
  if (!offenders.empty()) {
    throw ExportError("LP export supports linear constraints only; offending: " + offenders);
  }
  if (model.objective().degree() > 2) {
    throw ExportError("LP export supports at most a quadratic objective");
  }

  out << "\\ " << (model.metadata_id.empty() ? "model" : model.metadata_id) << "\n";
  out << (model.direction() == Direction::kMaximize ? "Maximize\n" : "Minimize\n");
  Polynomial linear, quadratic;
  for (const auto& t : model.objective().terms) {
    (t.degree() <= 1 ? linear : quadratic).terms.push_back(t);
  }
  out << " obj:" << render_terms(model, linear);
  if (!quadratic.terms.empty()) {
    out << " + [" << render_terms(model, quadratic, 2.0) << " ] / 2";
  }
  out << "\n";
  out << "Subject To\n";
  for (const auto& c : model.constraints()) {
    out << ' ' << c.tag << ':' << render_terms(model, c.polynomial) << ' ' << sense_text(c.sense)
        << ' ' << format_double(c.rhs) << "\n";
  }
  write_tail_sections(model, out);
}

void export_pip(const Model& model, std::ostream& out) {
  out << "\\ " << (model.metadata_id.empty() ? "model" : model.metadata_id) << "\n";
  out << (model.direction() == Direction::kMaximize ? "Maximize\n" : "Minimize\n");
  out << " obj:" << render_terms(model, model.objective()) << "\n";
  out << "Subject To\n";
  for (const auto& c : model.constraints()) {
    out << ' ' << c.tag << ':' << render_terms(model, c.polynomial) << ' ' << sense_text(c.sense)
        << ' ' << format_double(c.rhs) << "\n";
  }
  write_tail_sections(model, out);
}

void export_lp_file(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ExportError("cannot open '" + path + "' for writing");
  export_lp(model, out);
  if (!out.flush()) throw ExportError("write to '" + path + "' failed");
}

void export_pip_file(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ExportError("cannot open '" + path + "' for writing");
  export_pip(model, out);
  if (!out.flush()) throw ExportError("write to '" + path + "' failed");
}

namespace {

enum class Tok { kName, kNumber, kPlus, kMinus, kStar, kHat, kLe, kGe, kEq, kColon,
                 kLBracket, kRBracket, kSlash, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  double number = 0.0;
  int line = 0;
};

class Lexer {
 public:
  explicit Lexer(std::istream& in) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      lex_line(line, line_no);
    }
    tokens_.push_back(Token{Tok::kEnd, "", 0.0, line_no});
  }

  const Token& peek(int ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  Token next() {
    Token t = peek();
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

 private:
  void lex_line(const std::string& line, int line_no) {
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (c == '\\') return;  // comment to end of line
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      if (c == '+') { push(Tok::kPlus, "+", line_no); ++i; continue; }
      if (c == '-') { push(Tok::kMinus, "-", line_no); ++i; continue; }
      if (c == '*') { push(Tok::kStar, "*", line_no); ++i; continue; }
      if (c == '^') { push(Tok::kHat, "^", line_no); ++i; continue; }
      if (c == ':') { push(Tok::kColon, ":", line_no); ++i; continue; }
      if (c == '[') { push(Tok::kLBracket, "[", line_no); ++i; continue; }
      if (c == ']') { push(Tok::kRBracket, "]", line_no); ++i; continue; }
      if (c == '/') { push(Tok::kSlash, "/", line_no); ++i; continue; }
      if (c == '<' || c == '>' || c == '=') {
        std::string op(1, c);
        if (i + 1 < line.size() && line[i + 1] == '=') {
          op += '=';
          ++i;
        }
        ++i;
        if (op[0] == '<') push(Tok::kLe, op, line_no);
        else if (op[0] == '>') push(Tok::kGe, op, line_no);
        else push(Tok::kEq, op, line_no);
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        char* end = nullptr;
        const double value = std::strtod(line.c_str() + i, &end);
        Token t{Tok::kNumber, line.substr(i, end - (line.c_str() + i)), value, line_no};
        tokens_.push_back(t);
        i = end - line.c_str();
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < line.size() &&
               (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) {
          ++j;
        }
        push(Tok::kName, line.substr(i, j - i), line_no);
        i = j;
        continue;
      }
      throw ExportError("line " + std::to_string(line_no) + ": unexpected character '" +
                        std::string(1, c) + "'");
    }
  }

  void push(Tok kind, std::string text, int line_no) {
    tokens_.push_back(Token{kind, std::move(text), 0.0, line_no});
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

struct RawConstraint {
  std::string tag;
  Polynomial poly;
  Sense sense = Sense::kEq;
  double rhs = 0.0;
};

class ModelParser {
 public:
  explicit ModelParser(std::istream& in) : lex_(in) {}

  Model parse() {
    // first token is the direction keyword (the comment line was lexed away)
    const Token head = lex_.next();
    if (head.kind != Tok::kName || (lower(head.text) != "maximize" && lower(head.text) != "minimize")) {
      fail(head, "expected Maximize or Minimize");
    }
    direction_ = lower(head.text) == "maximize" ? Direction::kMaximize : Direction::kMinimize;
    expect_label("obj");
    objective_ = parse_polynomial(/*allow_bracket=*/true);

    expect_keyword("subject");
    expect_keyword("to");
    while (!at_section_boundary()) {
      RawConstraint c;
      const Token tag = lex_.next();
      if (tag.kind != Tok::kName) fail(tag, "expected a constraint name");
      c.tag = tag.text;
      expect(Tok::kColon);
      c.poly = parse_polynomial(false);
      const Token rel = lex_.next();
      if (rel.kind == Tok::kLe) c.sense = Sense::kLe;
      else if (rel.kind == Tok::kGe) c.sense = Sense::kGe;
      else if (rel.kind == Tok::kEq) c.sense = Sense::kEq;
      else fail(rel, "expected a relational operator");
      c.rhs = parse_signed_number();
      constraints_.push_back(std::move(c));
    }

    expect_keyword("bounds");
    while (!at_section_boundary()) {
      // lo <= name <= hi
      const double lo = parse_signed_number();
      expect(Tok::kLe);
      const Token name = lex_.next();
      if (name.kind != Tok::kName) fail(name, "expected a variable name in bounds");
      expect(Tok::kLe);
      const double hi = parse_signed_number();
      if (declared_.contains(name.text)) fail(name, "duplicate bounds for " + name.text);
      declared_[name.text] = static_cast<int>(order_.size());
      order_.push_back({name.text, lo, hi});
    }

    if (lex_.peek().kind == Tok::kName && lower(lex_.peek().text) == "binaries") {
      lex_.next();
      while (lex_.peek().kind == Tok::kName && lower(lex_.peek().text) != "end") {
        const Token name = lex_.next();
        auto it = declared_.find(name.text);
        if (it == declared_.end()) fail(name, "binary variable without bounds: " + name.text);
        order_[it->second].binary = true;
      }
    }
    expect_keyword("end");

    Model model;
    for (const auto& v : order_) {
      model.add_variable(v.name, v.binary ? VarKind::kBinary : VarKind::kContinuous, v.lower,
                         v.upper);
    }
    auto resolve = [&](Polynomial& poly) {
      for (auto& term : poly.terms) {
        for (auto& f : term.factors) {
          const std::string& nm = pending_names_[f];
          const VarId id = model.find_variable(nm);
          if (id < 0) throw ExportError("undeclared variable '" + nm + "'");
          f = id;
        }
      }
    };
    resolve(objective_);
    model.set_objective(objective_, direction_);
    for (auto& c : constraints_) {
      resolve(c.poly);
      model.add_constraint(std::move(c.poly), c.sense, c.rhs, std::move(c.tag));
    }
    model.freeze();
    return model;
  }

 private:
  struct VarDecl {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    bool binary = false;
  };

  static std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
  }

  [[noreturn]] void fail(const Token& t, const std::string& message) const {
    throw ExportError("line " + std::to_string(t.line) + ": " + message + " (got '" + t.text +
                      "')");
  }

  void expect(Tok kind) {
    const Token t = lex_.next();
    if (t.kind != kind) fail(t, "unexpected token");
  }

  void expect_keyword(const std::string& kw) {
    const Token t = lex_.next();
    if (t.kind != Tok::kName || lower(t.text) != kw) fail(t, "expected '" + kw + "'");
  }

  void expect_label(const std::string& label) {
    const Token t = lex_.next();
    if (t.kind != Tok::kName || lower(t.text) != label) fail(t, "expected '" + label + ":'");
    expect(Tok::kColon);
  }

  bool at_section_boundary() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::kEnd) return true;
    if (t.kind != Tok::kName) return false;
    const std::string word = lower(t.text);
    if (word == "bounds" || word == "binaries" || word == "end" || word == "subject") return true;
    // a constraint entry is "name :"; a bounds entry starts with a number
    return false;
  }

  double parse_signed_number() {
    double sign = 1.0;
    Token t = lex_.next();
    while (t.kind == Tok::kPlus || t.kind == Tok::kMinus) {
      if (t.kind == Tok::kMinus) sign = -sign;
      t = lex_.next();
    }
    if (t.kind == Tok::kNumber) return sign * t.number;
    if (t.kind == Tok::kName && lower(t.text) == "inf") return sign * kBig();
    fail(t, "expected a number");
  }

  static double kBig() { return std::numeric_limits<double>::infinity(); }

  // pending variable ids are indices into pending_names_ until resolution
  int pending_var(const std::string& name) {
    auto it = pending_ids_.find(name);
    if (it != pending_ids_.end()) return it->second;
    const int id = static_cast<int>(pending_names_.size());
    pending_names_.push_back(name);
    pending_ids_[name] = id;
    return id;
  }

  Polynomial parse_polynomial(bool allow_bracket) {
    Polynomial poly;
    double pending_sign = 1.0;
    bool any = false;
    for (;;) {
      const Token& t = lex_.peek();
      if (t.kind == Tok::kPlus || t.kind == Tok::kMinus) {
        if (t.kind == Tok::kMinus) pending_sign = -pending_sign;
        lex_.next();
        continue;
      }
      if (t.kind == Tok::kLBracket && allow_bracket) {
        lex_.next();
        Polynomial inner = parse_polynomial(false);
        expect(Tok::kRBracket);
        double divisor = 1.0;
        if (lex_.peek().kind == Tok::kSlash) {
          lex_.next();
          divisor = parse_signed_number();
        }
        for (auto& term : inner.terms) {
          term.coefficient *= pending_sign / divisor;
          poly.terms.push_back(std::move(term));
        }
        pending_sign = 1.0;
        any = true;
        continue;
      }
      if (t.kind == Tok::kNumber || t.kind == Tok::kName) {
        // a number here could be a constraint rhs only after a relational
        // operator, so inside a polynomial it always starts a term
        if (t.kind == Tok::kName) {
          const std::string word = lower(t.text);
          if (word == "bounds" || word == "subject" || word == "end" || word == "binaries") break;
          // "name :" means the next constraint starts
          if (lex_.peek(1).kind == Tok::kColon) break;
        }
        poly.terms.push_back(parse_term(pending_sign));
        pending_sign = 1.0;
        any = true;
        continue;
      }
      break;
    }
    if (!any) poly.add(0.0, {});
    poly.canonicalize();
    if (poly.terms.empty()) poly.add(0.0, {});
    return poly;
  }

  Monomial parse_term(double sign) {
    Monomial term;
    term.coefficient = sign;
    bool saw_coefficient = false;
    if (lex_.peek().kind == Tok::kNumber) {
      term.coefficient *= lex_.next().number;
      saw_coefficient = true;
    }
    bool expect_star = false;
    for (;;) {
      const Token& t = lex_.peek();
      if (t.kind == Tok::kStar) {
        lex_.next();
        expect_star = false;
        continue;
      }
      if (t.kind == Tok::kName && !expect_star) {
        const std::string word = lower(t.text);
        if (word == "bounds" || word == "subject" || word == "end" || word == "binaries") break;
        if (lex_.peek(1).kind == Tok::kColon) break;
        term.factors.push_back(pending_var(lex_.next().text));
        expect_star = true;
        // optional power
        if (lex_.peek().kind == Tok::kHat) {
          lex_.next();
          const Token p = lex_.next();
          if (p.kind != Tok::kNumber) fail(p, "expected an integer power");
          const int power = static_cast<int>(p.number);
          for (int rep = 1; rep < power; ++rep) term.factors.push_back(term.factors.back());
        }
        continue;
      }
      break;
    }
    if (term.factors.empty() && !saw_coefficient) {
      throw ExportError("empty term in polynomial");
    }
    return term;
  }

  Lexer lex_;
  Direction direction_ = Direction::kMaximize;
  Polynomial objective_;
  std::vector<RawConstraint> constraints_;
  std::map<std::string, int> declared_;
  std::vector<VarDecl> order_;
  std::vector<std::string> pending_names_;
  std::map<std::string, int> pending_ids_;
};

}  // namespace

Model import_lp(std::istream& in) {
  ModelParser parser(in);
  return parser.parse();
}

Model import_pip(std::istream& in) {
  ModelParser parser(in);
  return parser.parse();
}

Model import_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ExportError("cannot open '" + path + "' for reading");
  ModelParser parser(in);
  return parser.parse();
}

ParsedSolution parse_solution(std::istream& in, const Model& model) {
  ParsedSolution out;
  out.assignment.values.assign(model.num_variables(), 0.0);
  std::vector<bool> seen(model.num_variables(), false);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string name;
    while (ss >> name) {
      double value = 0.0;
      if (!(ss >> value)) {
        throw ExportError("line " + std::to_string(line_no) + ": missing value for '" + name + "'");
      }
      const VarId id = model.find_variable(name);
      if (id < 0) {
        throw ExportError("line " + std::to_string(line_no) + ": unknown variable '" + name + "'");
      }
      out.assignment.values[id] = value;
      seen[id] = true;
    }
  }
  for (VarId id = 0; id < model.num_variables(); ++id) {
    if (!seen[id]) out.defaulted.push_back(model.variable(id).name);
  }
  return out;
}

ParsedSolution parse_solution_file(const std::string& path, const Model& model) {
  std::ifstream in(path);
  if (!in) throw ExportError("cannot open '" + path + "' for reading");
  return parse_solution(in, model);
}

void write_solution(const Model& model, const Assignment& assignment, std::ostream& out) {
  for (VarId id = 0; id < model.num_variables(); ++id) {
    out << model.variable(id).name << ' ' << format_double(assignment.values[id]) << "\n";
  }
}

void write_solution_file(const Model& model, const Assignment& assignment,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ExportError("cannot open '" + path + "' for writing");
  write_solution(model, assignment, out);
  if (!out.flush()) throw ExportError("write to '" + path + "' failed");
}

}  // namespace lfen
