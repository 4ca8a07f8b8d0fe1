#include "mpg/game.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mpg {
namespace {

// Locale-independent double parsing.
bool parse_double(std::string_view tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_int(std::string_view tok, int& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

void print_number(std::ostream& out, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out << buf;
}

}  // namespace

Game::Builder::Builder(int n) : n_(n) {
  if (n <= 0) throw GameError("state count must be positive");
}

void Game::Builder::add(int i, int a, int b, double reward,
                        std::vector<TransitionEntry> row, int line) {
  auto where = [line]() {
    return line > 0 ? "line " + std::to_string(line) + ": " : std::string();
  };
  if (i < 0 || i >= n_)
    throw GameError(where() + "state " + std::to_string(i) + " out of range");
  if (a < 0 || b < 0) throw GameError(where() + "negative action index");
  if (!std::isfinite(reward)) throw GameError(where() + "non-finite reward");
  if (row.empty()) throw GameError(where() + "empty transition row");
  std::sort(row.begin(), row.end(),
            [](const TransitionEntry& x, const TransitionEntry& y) {
              return x.target < y.target;
            });
  double sum = 0.0;
  int32_t prev = -1;
  for (const auto& e : row) {
    if (e.target < 0 || e.target >= n_)
      throw GameError(where() + "target state " + std::to_string(e.target) +
                      " out of range");
    if (e.target == prev)
      throw GameError(where() + "duplicate target " +
                      std::to_string(e.target) + " in row");
    prev = e.target;
    if (!(e.prob >= 0.0) || !std::isfinite(e.prob))
      throw GameError(where() + "negative or non-finite probability");
    sum += e.prob;
  }
  if (std::fabs(sum - 1.0) > kRowSumTol)
    throw GameError(where() + "row sum " + std::to_string(sum) +
                    " violates tolerance");
  Record rec;
  rec.i = i;
  rec.a = a;
  rec.b = b;
  rec.reward = reward;
  rec.entry_first = static_cast<int64_t>(pool_.size());
  rec.entry_count = static_cast<int32_t>(row.size());
  rec.line = line;
  pool_.insert(pool_.end(), row.begin(), row.end());
  records_.push_back(rec);
}

Game Game::Builder::build() {
  std::sort(records_.begin(), records_.end(),
            [](const Record& x, const Record& y) {
              return std::tie(x.i, x.a, x.b) < std::tie(y.i, y.a, y.b);
            });
  Game g;
  g.n_ = n_;
  g.min_start_.assign(n_ + 1, 0);
  g.max_start_.clear();
  g.rewards_.reserve(records_.size());
  g.entry_start_.reserve(records_.size() + 1);
  g.entry_start_.push_back(0);

  size_t k = 0;
  for (int i = 0; i < n_; ++i) {
    g.min_start_[i] = static_cast<int>(g.max_start_.size());
    int a = 0;
    while (k < records_.size() && records_[k].i == i) {
      if (records_[k].a != a)
        throw GameError("state " + std::to_string(i) +
                        ": MIN action indices not contiguous (expected " +
                        std::to_string(a) + ", got " +
                        std::to_string(records_[k].a) + ")");
      g.max_start_.push_back(static_cast<int>(g.rewards_.size()));
      int b = 0;
      while (k < records_.size() && records_[k].i == i && records_[k].a == a) {
        const Record& rec = records_[k];
        if (rec.b != b) {
          std::string what = rec.b == b - 1 ? "duplicate record"
                                            : "MAX action indices not contiguous";
          throw GameError("state " + std::to_string(i) + " action " +
                          std::to_string(a) + ": " + what + " at b=" +
                          std::to_string(rec.b));
        }
        g.rewards_.push_back(rec.reward);
        g.entries_.insert(
            g.entries_.end(), pool_.begin() + rec.entry_first,
            pool_.begin() + rec.entry_first + rec.entry_count);
        g.entry_start_.push_back(static_cast<int64_t>(g.entries_.size()));
        ++b;
        ++k;
      }
      ++a;
    }
    if (a == 0)
      throw GameError("state " + std::to_string(i) + " has no actions");
  }
  g.min_start_[n_] = static_cast<int>(g.max_start_.size());
  g.max_start_.push_back(static_cast<int>(g.rewards_.size()));
  records_.clear();
  records_.shrink_to_fit();
  pool_.clear();
  pool_.shrink_to_fit();
  return g;
}

OnePlayerGame::Builder::Builder(int n) : n_(n) {
  if (n <= 0) throw GameError("state count must be positive");
  counts_.assign(n, 0);
  entry_start_.push_back(0);
}

void OnePlayerGame::Builder::add(int i, double reward,
                                 std::vector<TransitionEntry> row) {
  if (i < 0 || i >= n_) throw GameError("state out of range");
  if (i < last_state_)
    throw GameError("one-player actions must be added in state order");
  last_state_ = i;
  std::sort(row.begin(), row.end(),
            [](const TransitionEntry& x, const TransitionEntry& y) {
              return x.target < y.target;
            });
  double sum = 0.0;
  int32_t prev = -1;
  for (const auto& e : row) {
    if (e.target < 0 || e.target >= n_ || e.target == prev)
      throw GameError("bad transition row");
    prev = e.target;
    if (!(e.prob >= 0.0) || !std::isfinite(e.prob))
      throw GameError("negative or non-finite probability");
    sum += e.prob;
  }
  if (sum > 1.0 + kRowSumTol) throw GameError("row sum exceeds 1");
  counts_[i]++;
  rewards_.push_back(reward);
  state_of_action_.push_back(i);
  pool_.insert(pool_.end(), row.begin(), row.end());
  entry_start_.push_back(static_cast<int64_t>(pool_.size()));
}

OnePlayerGame OnePlayerGame::Builder::build() {
  OnePlayerGame g;
  g.n_ = n_;
  g.start_.assign(n_ + 1, 0);
  for (int i = 0; i < n_; ++i) {
    if (counts_[i] == 0)
      throw GameError("state " + std::to_string(i) + " has no actions");
    g.start_[i + 1] = g.start_[i] + counts_[i];
  }
  g.rewards_ = std::move(rewards_);
  g.entry_start_ = std::move(entry_start_);
  g.entries_ = std::move(pool_);
  bool stochastic = true;
  for (size_t p = 0; p + 1 < g.entry_start_.size() && stochastic; ++p) {
    double sum = 0.0;
    for (int64_t e = g.entry_start_[p]; e < g.entry_start_[p + 1]; ++e)
      sum += g.entries_[e].prob;
    if (std::fabs(sum - 1.0) > kRowSumTol) stochastic = false;
  }
  g.stochastic_ = stochastic;
  return g;
}

Game parse_game(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next_tokens = [&](std::vector<std::string>& toks) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      toks.clear();
      std::istringstream ls(line);
      std::string t;
      while (ls >> t) toks.push_back(t);
      if (!toks.empty()) return true;
    }
    return false;
  };

  std::vector<std::string> toks;
  if (!next_tokens(toks)) throw ParseError(lineno, "missing header");
  int n = 0;
  if (toks.size() != 3 || toks[0] != "zsg" || toks[1] != "1" ||
      !parse_int(toks[2], n) || n <= 0)
    throw ParseError(lineno, "malformed header (expected `zsg 1 <n>`)");

  Game::Builder builder(n);
  while (next_tokens(toks)) {
    if (toks.size() < 5)
      throw ParseError(lineno, "record needs `<i> <a> <b> <reward> <j>:<p>...`");
    int i, a, b;
    double reward;
    if (!parse_int(toks[0], i) || !parse_int(toks[1], a) ||
        !parse_int(toks[2], b))
      throw ParseError(lineno, "malformed indices");
    if (!parse_double(toks[3], reward))
      throw ParseError(lineno, "malformed reward");
    std::vector<TransitionEntry> row;
    for (size_t t = 4; t < toks.size(); ++t) {
      size_t colon = toks[t].find(':');
      if (colon == std::string::npos)
        throw ParseError(lineno, "malformed transition `" + toks[t] + "`");
      int j;
      double p;
      if (!parse_int(std::string_view(toks[t]).substr(0, colon), j) ||
          !parse_double(std::string_view(toks[t]).substr(colon + 1), p))
        throw ParseError(lineno, "malformed transition `" + toks[t] + "`");
      row.push_back({j, p});
    }
    try {
      builder.add(i, a, b, reward, std::move(row), lineno);
    } catch (const GameError& err) {
      throw ParseError(lineno, err.what());
    }
  }
  return builder.build();
}

Game parse_game_text(const std::string& text) {
  std::istringstream in(text);
  return parse_game(in);
}

Game parse_game_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GameError("cannot open " + path);
  return parse_game(in);
}

void serialize_game(const Game& game, std::ostream& out) {
  out << "zsg 1 " << game.num_states() << "\n";
  for (int i = 0; i < game.num_states(); ++i)
    for (int a = 0; a < game.num_min_actions(i); ++a)
      for (int b = 0; b < game.num_max_actions(i, a); ++b) {
        out << i << ' ' << a << ' ' << b << ' ';
        print_number(out, game.reward(i, a, b));
        for (const auto& e : game.row(i, a, b)) {
          out << ' ' << e.target << ':';
          print_number(out, e.prob);
        }
        out << "\n";
      }
}

std::string serialize_game_text(const Game& game) {
  std::ostringstream out;
  serialize_game(game, out);
  return out.str();
}

void validate_min_strategy(const Game& game, const MinStrategy& sigma) {
  if (static_cast<int>(sigma.sigma.size()) != game.num_states())
    throw GameError("MIN strategy has wrong length");
  for (int i = 0; i < game.num_states(); ++i)
    if (sigma.sigma[i] < 0 || sigma.sigma[i] >= game.num_min_actions(i))
      throw GameError("MIN strategy action out of range at state " +
                      std::to_string(i));
}

OnePlayerGame restrict_min(const Game& game, const MinStrategy& sigma) {
  validate_min_strategy(game, sigma);
  OnePlayerGame::Builder builder(game.num_states());
  for (int i = 0; i < game.num_states(); ++i) {
    int a = sigma.sigma[i];
    for (int b = 0; b < game.num_max_actions(i, a); ++b) {
      auto row = game.row(i, a, b);
      builder.add(i, game.reward(i, a, b),
                  std::vector<TransitionEntry>(row.begin(), row.end()));
    }
  }
  return builder.build();
}

}  // namespace mpg
