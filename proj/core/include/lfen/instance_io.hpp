#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "lfen/game.hpp"

namespace lfen {

enum class GameClass { kNormalForm, kPolymatrix };

const char* to_string(GameClass c);
GameClass game_class_from_string(const std::string& s);

// Seeded uniform-random instance description. Identical specs produce
// bit-identical games (fixed RNG, fixed sampling order; see docs/formats.md).
struct GeneratorSpec {
  GameClass game_class = GameClass::kNormalForm;
  int n = 3;
  int m = 2;  // common action count
  double payoff_lo = 0.0;
  double payoff_hi = 100.0;
  std::uint64_t seed = 1;
};

// Total payoff entries allowed per generated game.
inline constexpr std::size_t kDefaultEntryCap = std::size_t{1} << 27;

Game generate(const GeneratorSpec& spec, std::size_t entry_cap = kDefaultEntryCap);

struct ParseError : std::runtime_error {
  int line = 0;
  ParseError(int line_no, const std::string& message);
};

// Text game format (.lfg): kind / n / m / leader headers followed by payoff
// blocks, written with 17 significant digits so round trips are bit-exact.
// Grammar in docs/formats.md.
void write_game(const Game& game, int leader, std::ostream& out);
void write_game_file(const Game& game, int leader, const std::string& path);

struct LoadedGame {
  Game game;
  int leader = -1;
};
LoadedGame read_game(std::istream& in);
LoadedGame read_game_file(const std::string& path);

// 17-significant-digit decimal rendering used by every text format here.
std::string format_double(double v);

}  // namespace lfen
