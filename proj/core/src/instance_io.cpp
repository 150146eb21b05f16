#include "lfen/instance_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "lfen/rng.hpp"

namespace lfen {

const char* to_string(GameClass c) {
  return c == GameClass::kNormalForm ? "nf" : "pm";
}

GameClass game_class_from_string(const std::string& s) {
  if (s == "nf") return GameClass::kNormalForm;
  if (s == "pm") return GameClass::kPolymatrix;
  throw GameError("unknown game class '" + s + "' (expected nf or pm)");
}

Game generate(const GeneratorSpec& spec, std::size_t entry_cap) {
  if (spec.n < 2) throw GameError("generator: n must be >= 2");
  if (spec.m < 1) throw GameError("generator: m must be >= 1");
  if (!(spec.payoff_lo < spec.payoff_hi) && spec.payoff_lo != spec.payoff_hi) {
    throw GameError("generator: payoff_lo must be <= payoff_hi");
  }

  std::vector<int> m(spec.n, spec.m);
  Xoshiro256pp rng(spec.seed);

  if (spec.game_class == GameClass::kNormalForm) {
    std::size_t outcomes = 1;
    for (int d : m) {
      outcomes *= static_cast<std::size_t>(d);
      if (outcomes > entry_cap) throw GameError("generator: tensor exceeds the memory cap");
    }
    if (outcomes * m.size() > entry_cap) {
      throw GameError("generator: tensor exceeds the memory cap");
    }
    // Tensors in agent order, entries in row-major tuple order.
    std::vector<PayoffTensor> tensors;
    tensors.reserve(m.size());
    for (int agent = 0; agent < spec.n; ++agent) {
      PayoffTensor t(m);
      for (std::size_t i = 0; i < t.size(); ++i) {
        t.flat(i) = rng.uniform(spec.payoff_lo, spec.payoff_hi);
      }
      tensors.push_back(std::move(t));
    }
    return NormalFormGame(m, std::move(tensors));
  }

  const std::size_t per_matrix = static_cast<std::size_t>(spec.m) * spec.m;
  if (per_matrix * spec.n * (spec.n - 1) > entry_cap) {
    throw GameError("generator: pairwise matrices exceed the memory cap");
  }
  // Matrices in (i, j) lexicographic order over ordered pairs, row-major.
  std::vector<Matrix> pairwise;
  pairwise.reserve(static_cast<std::size_t>(spec.n) * (spec.n - 1));
  for (int i = 0; i < spec.n; ++i) {
    for (int j = 0; j < spec.n; ++j) {
      if (i == j) continue;
      Matrix u(m[i], m[j]);
      for (double& x : u.v) x = rng.uniform(spec.payoff_lo, spec.payoff_hi);
      pairwise.push_back(std::move(u));
    }
  }
  return PolymatrixGame(m, std::move(pairwise));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ParseError::ParseError(int line_no, const std::string& message)
    : std::runtime_error("line " + std::to_string(line_no) + ": " + message), line(line_no) {}

void write_game(const Game& game, int leader, std::ostream& out) {
  const auto& m = action_counts(game);
  out << "kind " << (is_normal_form(game) ? "nf" : "pm") << "\n";
  out << "n " << m.size() << "\n";
  out << "m";
  for (int d : m) out << ' ' << d;
  out << "\n";
  out << "leader " << leader << "\n";
  if (is_normal_form(game)) {
    const auto& nf = std::get<NormalFormGame>(game);
    for (int agent = 0; agent < nf.num_agents(); ++agent) {
      out << "tensor " << agent << "\n";
      const auto& t = nf.payoff(agent);
      for (std::size_t i = 0; i < t.size(); ++i) {
        out << format_double(t.flat(i)) << ((i + 1) % 8 == 0 || i + 1 == t.size() ? '\n' : ' ');
      }
    }
  } else {
    const auto& pm = std::get<PolymatrixGame>(game);
    for (int i = 0; i < pm.num_agents(); ++i) {
      for (int j = 0; j < pm.num_agents(); ++j) {
        if (i == j) continue;
        out << "matrix " << i << ' ' << j << "\n";
        const Matrix& u = pm.pairwise(i, j);
        for (int r = 0; r < u.rows; ++r) {
          for (int c = 0; c < u.cols; ++c) out << format_double(u(r, c)) << (c + 1 == u.cols ? '\n' : ' ');
        }
      }
    }
  }
}

void write_game_file(const Game& game, int leader, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GameError("cannot open '" + path + "' for writing");
  write_game(game, leader, out);
  if (!out.flush()) throw GameError("write to '" + path + "' failed");
}

namespace {

// Line-oriented tokenizer that tracks line numbers for error reports and
// skips blank lines and '#' comments.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::optional<std::string> next() {
    for (;;) {
      if (pos_ < tokens_.size()) return tokens_[pos_++];
      if (!std::getline(in_, current_)) return std::nullopt;
      ++line_;
      if (auto hash = current_.find('#'); hash != std::string::npos) current_.resize(hash);
      tokens_.clear();
      pos_ = 0;
      std::istringstream ss(current_);
      std::string tok;
      while (ss >> tok) tokens_.push_back(tok);
    }
  }

  std::string expect(const char* what) {
    auto tok = next();
    if (!tok) throw ParseError(line_, std::string("unexpected end of file, expected ") + what);
    return *tok;
  }

  int expect_int(const char* what) {
    const std::string tok = expect(what);
    int value = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw ParseError(line_, std::string("expected integer for ") + what + ", got '" + tok + "'");
    }
    return value;
  }

  double expect_double(const char* what) {
    const std::string tok = expect(what);
    char* end = nullptr;
    const double value = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) {
      throw ParseError(line_, std::string("expected number for ") + what + ", got '" + tok + "'");
    }
    return value;
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  std::string current_;
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
  int line_ = 0;
};

}  // namespace

LoadedGame read_game(std::istream& in) {
  TokenReader reader(in);

  auto expect_keyword = [&](const char* kw) {
    const std::string tok = reader.expect(kw);
    if (tok != kw) throw ParseError(reader.line(), std::string("expected '") + kw + "', got '" + tok + "'");
  };

  expect_keyword("kind");
  GameClass kind;
  {
    const std::string k = reader.expect("game kind");
    try {
      kind = game_class_from_string(k);
    } catch (const GameError& e) {
      throw ParseError(reader.line(), e.what());
    }
  }
  expect_keyword("n");
  const int n = reader.expect_int("agent count");
  if (n < 2) throw ParseError(reader.line(), "n must be >= 2");
  expect_keyword("m");
  std::vector<int> m(n);
  for (int i = 0; i < n; ++i) {
    m[i] = reader.expect_int("action count");
    if (m[i] < 1) throw ParseError(reader.line(), "action counts must be >= 1");
  }
  expect_keyword("leader");
  const int leader = reader.expect_int("leader index");
  if (leader < 0 || leader >= n) throw ParseError(reader.line(), "leader index out of range");

  if (kind == GameClass::kNormalForm) {
    std::size_t outcomes = 1;
    for (int d : m) outcomes *= static_cast<std::size_t>(d);
    std::vector<PayoffTensor> tensors(n, PayoffTensor(m));
    std::vector<bool> seen(n, false);
    for (int block = 0; block < n; ++block) {
      const std::string kw = reader.expect("tensor block");
      if (kw == "matrix") {
        throw ParseError(reader.line(), "matrix block in a normal-form (nf) file");
      }
      if (kw != "tensor") throw ParseError(reader.line(), "expected 'tensor', got '" + kw + "'");
      const int agent = reader.expect_int("tensor agent index");
      if (agent < 0 || agent >= n) throw ParseError(reader.line(), "tensor agent index out of range");
      if (seen[agent]) throw ParseError(reader.line(), "duplicate tensor for agent " + std::to_string(agent));
      seen[agent] = true;
      for (std::size_t i = 0; i < outcomes; ++i) {
        const std::string what = "payoff " + std::to_string(i) + " of agent " + std::to_string(agent);
        tensors[agent].flat(i) = reader.expect_double(what.c_str());
      }
    }
    if (reader.next()) throw ParseError(reader.line(), "trailing content after final tensor");
    try {
      return LoadedGame{NormalFormGame(m, std::move(tensors)), leader};
    } catch (const GameError& e) {
      throw ParseError(reader.line(), e.what());
    }
  }

  std::vector<Matrix> pairwise;
  std::vector<std::vector<bool>> seen(n, std::vector<bool>(n, false));
  pairwise.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) pairwise.emplace_back(m[i], m[j]);
    }
  }
  auto slot = [&](int i, int j) -> Matrix& {
    return pairwise[static_cast<std::size_t>(i) * (n - 1) + (j < i ? j : j - 1)];
  };
  for (int block = 0; block < n * (n - 1); ++block) {
    const std::string kw = reader.expect("matrix block");
    if (kw == "tensor") {
      throw ParseError(reader.line(), "tensor block in a polymatrix (pm) file");
    }
    if (kw != "matrix") throw ParseError(reader.line(), "expected 'matrix', got '" + kw + "'");
    const int i = reader.expect_int("matrix row agent");
    const int j = reader.expect_int("matrix column agent");
    if (i < 0 || i >= n || j < 0 || j >= n || i == j) {
      throw ParseError(reader.line(), "bad agent pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    if (seen[i][j]) {
      throw ParseError(reader.line(),
                       "duplicate matrix (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    seen[i][j] = true;
    Matrix& u = slot(i, j);
    for (int r = 0; r < u.rows; ++r) {
      for (int c = 0; c < u.cols; ++c) {
        const std::string what = "entry (" + std::to_string(r) + "," + std::to_string(c) +
                                 ") of matrix (" + std::to_string(i) + "," + std::to_string(j) + ")";
        u(r, c) = reader.expect_double(what.c_str());
      }
    }
  }
  if (reader.next()) throw ParseError(reader.line(), "trailing content after final matrix");
  try {
    return LoadedGame{PolymatrixGame(m, std::move(pairwise)), leader};
  } catch (const GameError& e) {
    throw ParseError(reader.line(), e.what());
  }
}

LoadedGame read_game_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GameError("cannot open '" + path + "' for reading");
  return read_game(in);
}

}  // namespace lfen
