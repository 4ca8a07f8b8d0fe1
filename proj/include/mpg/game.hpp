#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpg {

inline constexpr double kRowSumTol = 1e-9;

/// One sparse transition arc: probability mass sent to `target`.
struct TransitionEntry {
  int32_t target;
  double prob;
};

class GameError : public std::runtime_error {
 public:
  explicit GameError(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public GameError {
 public:
  ParseError(int line, const std::string& what)
      : GameError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Finite two-player zero-sum stochastic game with perfect information.
/// State i has MIN actions 0..num_min_actions(i)-1; the pair (i, a) has MAX
/// actions 0..num_max_actions(i, a)-1. Each (i, a, b) carries a reward and a
/// sparse stochastic transition row. Immutable after construction.
class Game {
 public:
  class Builder;

  int num_states() const { return n_; }
  int num_min_actions(int i) const { return min_start_[i + 1] - min_start_[i]; }
  int num_max_actions(int i, int a) const {
    int s = min_start_[i] + a;
    return max_start_[s + 1] - max_start_[s];
  }
  /// Index of the (i, a) slot; MAX strategies are indexed by it.
  int min_slot(int i, int a) const { return min_start_[i] + a; }
  int num_min_slots() const { return static_cast<int>(max_start_.size()) - 1; }

  double reward(int i, int a, int b) const {
    return rewards_[pair_index(i, a, b)];
  }
  std::span<const TransitionEntry> row(int i, int a, int b) const {
    int p = pair_index(i, a, b);
    return {entries_.data() + entry_start_[p],
            static_cast<size_t>(entry_start_[p + 1] - entry_start_[p])};
  }

  std::size_t num_action_pairs() const { return rewards_.size(); }

 private:
  int pair_index(int i, int a, int b) const {
    return max_start_[min_start_[i] + a] + b;
  }

  int n_ = 0;
  std::vector<int> min_start_;    // n+1, state -> first (i,a) slot
  std::vector<int> max_start_;    // slots+1, (i,a) slot -> first pair index
  std::vector<double> rewards_;   // per (i,a,b)
  std::vector<int64_t> entry_start_;  // pairs+1, into entries_
  std::vector<TransitionEntry> entries_;
};

/// Accumulates (i, a, b) records in any order, then validates and compresses.
class Game::Builder {
 public:
  explicit Builder(int n);

  /// Record line number is optional context for error messages.
  void add(int i, int a, int b, double reward,
           std::vector<TransitionEntry> row, int line = 0);

  /// Validates contiguity of action indices, row sums, duplicate targets and
  /// target ranges, then produces the compressed game. The builder is
  /// consumed.
  Game build();

 private:
  struct Record {
    int i, a, b;
    double reward;
    int64_t entry_first;
    int32_t entry_count;
    int line;
  };
  int n_;
  std::vector<Record> records_;
  std::vector<TransitionEntry> pool_;
};

/// Pure feedback strategy of the MIN player: sigma[i] in A_i.
struct MinStrategy {
  std::vector<int> sigma;

  bool operator==(const MinStrategy&) const = default;
};

/// Pure feedback strategy of the MAX player. For a two-player Game, one entry
/// per (state, MIN action) slot (see Game::min_slot); for a OnePlayerGame,
/// one entry per state.
struct MaxStrategy {
  std::vector<int> delta;

  bool operator==(const MaxStrategy&) const = default;
};

/// Germ of a half-line t -> t*eta + v: slope (mean payoff) and bias.
struct HalfLine {
  std::vector<double> eta;
  std::vector<double> v;
};

/// One-player (MAX) problem: per-state action lists, each action carrying a
/// reward and a sparse substochastic row. `stochastic` is true when every row
/// sums to one.
class OnePlayerGame {
 public:
  class Builder;

  int num_states() const { return n_; }
  int num_actions(int i) const { return start_[i + 1] - start_[i]; }
  int action_index(int i, int b) const { return start_[i] + b; }
  double reward(int i, int b) const { return rewards_[start_[i] + b]; }
  std::span<const TransitionEntry> row(int i, int b) const {
    int p = start_[i] + b;
    return {entries_.data() + entry_start_[p],
            static_cast<size_t>(entry_start_[p + 1] - entry_start_[p])};
  }
  bool stochastic() const { return stochastic_; }

 private:
  int n_ = 0;
  bool stochastic_ = true;
  std::vector<int> start_;            // n+1
  std::vector<double> rewards_;       // per action
  std::vector<int64_t> entry_start_;  // actions+1
  std::vector<TransitionEntry> entries_;
};

class OnePlayerGame::Builder {
 public:
  explicit Builder(int n);
  /// Actions must be added state by state, in increasing state order.
  void add(int i, double reward, std::vector<TransitionEntry> row);
  OnePlayerGame build();

 private:
  int n_;
  int last_state_ = -1;
  std::vector<int> counts_;
  std::vector<double> rewards_;
  std::vector<int64_t> entry_start_;
  std::vector<TransitionEntry> pool_;
  std::vector<int> state_of_action_;
};

/// Parses the ZSG v1 text format. Throws ParseError with a line number on
/// malformed input.
Game parse_game(std::istream& in);
Game parse_game_text(const std::string& text);
Game parse_game_file(const std::string& path);

/// Canonical serialization: records sorted by (i, a, b), numbers printed with
/// 17 significant digits. parse(serialize(g)) reproduces g exactly.
void serialize_game(const Game& game, std::ostream& out);
std::string serialize_game_text(const Game& game);

void validate_min_strategy(const Game& game, const MinStrategy& sigma);

/// Fixes the MIN strategy: the result's per-state operator equals
/// F(.; i, sigma(i)), with the same action order and floating-point
/// evaluation sequence as the two-player game.
OnePlayerGame restrict_min(const Game& game, const MinStrategy& sigma);

/// Fixes a one-player strategy, yielding the affine pair (P, r) of the
/// induced Markov chain. Declared in chains.hpp where SparseMatrix lives.

}  // namespace mpg
