// Command-line front end: solve ZSG files, generate benchmark instances,
// run oracle cross-checks, and emit benchmark CSVs.
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mpg/chains.hpp"
#include "mpg/game.hpp"
#include "mpg/generators.hpp"
#include "mpg/oracles.hpp"
#include "mpg/shapley.hpp"
#include "mpg/solver.hpp"

namespace {

using mpg::Game;
using mpg::SolveOptions;
using mpg::SolveReport;
using mpg::SolveStatus;

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitSolver = 2;
constexpr int kExitCycle = 3;

struct SolveFlags {
  double eps_g = 1e-12;
  double eps_eta = 1e-10;
  double eps_v = 1e-10;
  int max_outer = 1000;
  std::string solver = "lu";
  double sor_omega = 1.2;
  bool naive = false;
  bool strict_trace = false;
  std::string warm_start = "on";
};

void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--eps-g", f.eps_g, "global residual tolerance");
  cmd->add_option("--eps-eta", f.eps_eta, "slope comparison tolerance");
  cmd->add_option("--eps-v", f.eps_v, "bias comparison tolerance");
  cmd->add_option("--max-outer", f.max_outer, "outer iteration cap");
  cmd->add_option("--solver", f.solver, "linear backend")
      ->check(CLI::IsMember({"lu", "sor"}));
  cmd->add_option("--sor-omega", f.sor_omega, "SOR relaxation parameter");
  cmd->add_flag("--naive", f.naive,
                "skip the spectral projection at degenerate iterations");
  cmd->add_flag("--strict-trace", f.strict_trace,
                "disable warm starts and the single-SCC shortcut");
  cmd->add_option("--warm-start", f.warm_start, "warm-start inner solves")
      ->check(CLI::IsMember({"on", "off"}));
}

SolveOptions to_options(const SolveFlags& f) {
  SolveOptions opts;
  opts.tol.eps_g = f.eps_g;
  opts.tol.eps_eta = f.eps_eta;
  opts.tol.eps_v = f.eps_v;
  opts.max_outer = f.max_outer;
  opts.naive = f.naive;
  opts.strict_trace = f.strict_trace;
  opts.warm_start = f.warm_start == "on";
  if (f.solver == "sor") {
    opts.chain.linear_method = mpg::LinearMethod::kSor;
    opts.chain.final_method = mpg::FinalClassMethod::kMethodA;
  }
  opts.chain.sor_omega = f.sor_omega;
  return opts;
}

int resolve_threads(int flag_value) {
  if (const char* env = std::getenv("MPPI_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  if (flag_value > 0) return flag_value;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw mpg::GameError("cannot write " + path);
  out << content;
}

int cmd_solve(const std::string& input, const SolveFlags& flags, bool json,
              const std::vector<int>& sigma0, int64_t sigma0_seed,
              const std::vector<std::string>& inject_bias) {
  Game game = [&] {
    try {
      return mpg::parse_game_file(input);
    } catch (const mpg::GameError& err) {
      std::cerr << "parse error: " << err.what() << "\n";
      std::exit(kExitParse);
    }
  }();

  SolveOptions opts = to_options(flags);
  for (const std::string& spec : inject_bias) {
    // Format: <outer-iteration>:<v_0>,<v_1>,...,<v_{n-1}>
    auto colon = spec.find(':');
    std::vector<double> v;
    int iter = -1;
    try {
      if (colon == std::string::npos) throw std::invalid_argument("no colon");
      iter = std::stoi(spec.substr(0, colon));
      std::istringstream vals(spec.substr(colon + 1));
      for (std::string tok; std::getline(vals, tok, ',');)
        v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      std::cerr << "bad --inject-bias value: " << spec << "\n";
      return kExitParse;
    }
    opts.injected_bias[iter] = std::move(v);
  }
  SolveReport rep;
  try {
    mpg::MinStrategy start =
        !sigma0.empty()  ? mpg::MinStrategy{sigma0}
        : sigma0_seed >= 0
            ? mpg::random_min_strategy(game,
                                       static_cast<uint64_t>(sigma0_seed))
            : mpg::lowest_index_min_strategy(game);
    rep = mpg::solve(game, start, opts);
  } catch (const mpg::GameError& err) {
    std::cerr << "solver error: " << err.what() << "\n";
    return kExitSolver;
  }

  if (json) {
    nlohmann::ordered_json doc;
    doc["status"] = rep.status == SolveStatus::kConverged ? "converged"
                    : rep.status == SolveStatus::kCycleDetected
                        ? "cycle_detected"
                        : "outer_cap_exceeded";
    doc["eta"] = rep.halfline.eta;
    doc["v"] = rep.halfline.v;
    doc["sigma"] = rep.sigma.sigma;
    doc["iterations_outer"] = rep.outer_iterations;
    doc["iterations_inner_total"] = rep.inner_iterations;
    doc["degenerate"] = rep.degenerate_count;
    doc["strongly_degenerate"] = rep.strongly_degenerate_count;
    doc["residual"] = rep.residual;
    doc["wall_seconds"] = rep.wall_seconds;
    doc["warnings"] = rep.warnings;
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "states:               " << game.num_states() << "\n";
    std::cout << "status:               "
              << (rep.status == SolveStatus::kConverged ? "converged"
                  : rep.status == SolveStatus::kCycleDetected
                      ? "cycle detected"
                      : "outer cap exceeded")
              << "\n";
    std::cout << "outer iterations:     " << rep.outer_iterations << "\n";
    std::cout << "inner iterations:     " << rep.inner_iterations << "\n";
    std::cout << "degenerate:           " << rep.degenerate_count << "\n";
    std::cout << "strongly degenerate:  " << rep.strongly_degenerate_count
              << "\n";
    std::cout << "residual:             " << rep.residual << "\n";
    std::cout << "wall seconds:         " << rep.wall_seconds << "\n";
    if (game.num_states() <= 20) {
      std::cout << "eta:";
      for (double e : rep.halfline.eta) std::cout << ' ' << e;
      std::cout << "\nv:  ";
      for (double x : rep.halfline.v) std::cout << ' ' << x;
      std::cout << "\nsigma:";
      for (int a : rep.sigma.sigma) std::cout << ' ' << a;
      std::cout << "\n";
    }
    for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
  }

  if (rep.status == SolveStatus::kCycleDetected) return kExitCycle;
  if (rep.status == SolveStatus::kOuterCapExceeded) return kExitSolver;
  return kExitOk;
}

int cmd_bench(const std::vector<int>& sizes, int seeds, int degree,
              int threads, const std::string& out_path,
              const SolveFlags& flags, int64_t sigma0_seed) {
  struct Job {
    int size;
    uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int size : sizes)
    for (int s = 1; s <= seeds; ++s)
      jobs.push_back({size, static_cast<uint64_t>(s)});

  std::vector<std::string> rows(jobs.size());
  std::atomic<size_t> next{0};
  SolveOptions opts = to_options(flags);

  auto worker = [&] {
    while (true) {
      size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const Job& job = jobs[j];
      std::ostringstream row;
      row << job.size << ',' << job.seed << ',';
      try {
        mpg::RichmanConfig cfg;
        cfg.n = job.size;
        cfg.out_degree = degree;
        cfg.seed = job.seed;
        Game game = mpg::gen_richman(cfg);
        mpg::MinStrategy sigma0 =
            sigma0_seed < 0
                ? mpg::lowest_index_min_strategy(game)
                : mpg::random_min_strategy(
                      game, static_cast<uint64_t>(sigma0_seed) + job.seed);
        SolveReport rep = mpg::solve(game, sigma0, opts);
        row << rep.outer_iterations << ',' << rep.inner_iterations << ','
            << rep.degenerate_count << ',' << rep.strongly_degenerate_count
            << ',' << rep.residual << ',' << rep.wall_seconds;
      } catch (const mpg::GameError& err) {
        // Failure recorded in-row; the run continues.
        row << "-1,-1,-1,-1,nan,nan";
      }
      rows[j] = row.str();
    }
  };

  int t = resolve_threads(threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < t; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::ostringstream csv;
  csv << "size,seed,iter_outer,iter_inner,degenerate,strongly_degenerate,"
         "residual,seconds\n";
  for (const auto& r : rows) csv << r << "\n";
  if (out_path.empty())
    std::cout << csv.str();
  else
    write_file(out_path, csv.str());
  return kExitOk;
}

int cmd_oracle_check(int count, uint64_t seed, bool inject_wrong_eta) {
  int failures = 0;
  for (int k = 0; k < count; ++k) {
    Game game = mpg::gen_random_small(seed + static_cast<uint64_t>(k));
    SolveReport rep =
        mpg::solve(game, mpg::lowest_index_min_strategy(game), {});
    std::vector<double> eta = rep.halfline.eta;
    if (inject_wrong_eta && !eta.empty()) eta[0] += 0.125;
    std::vector<double> bf = mpg::brute_force_value(game);
    std::vector<double> vi = mpg::value_iteration_slope(game, 100000);
    double d_bf = mpg::sup_norm_diff(eta, bf);
    double d_vi = mpg::sup_norm_diff(eta, vi);
    if (d_bf > 1e-9 || d_vi > 5e-5) {
      ++failures;
      std::cout << "FAIL seed " << seed + k << ": |eta-bruteforce| = " << d_bf
                << ", |eta-valueiteration| = " << d_vi << "\n";
    }
  }
  std::cout << (failures == 0 ? "PASS" : "FAIL") << ": " << count - failures
            << "/" << count << " instances agree\n";
  return failures == 0 ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-payoff stochastic game solver"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve a ZSG v1 file");
  std::string input;
  bool json = false;
  int threads_flag = 0;
  SolveFlags solve_flags;
  solve_cmd->add_option("--input", input, "input file")->required();
  solve_cmd->add_flag("--json", json, "machine-readable report");
  solve_cmd->add_option("--threads", threads_flag, "ignored for single solves");
  std::vector<int> solve_sigma0;
  int64_t solve_sigma0_seed = -1;
  solve_cmd->add_option("--sigma0", solve_sigma0,
                        "starting strategy, one action index per state")
      ->delimiter(',');
  solve_cmd->add_option("--sigma0-seed", solve_sigma0_seed,
                        "random starting strategy seed");
  std::vector<std::string> solve_inject_bias;
  solve_cmd->add_option("--inject-bias", solve_inject_bias,
                        "override the inner bias at an outer iteration, "
                        "format k:v0,v1,... (repeatable; for trace replay)");
  add_solve_flags(solve_cmd, solve_flags);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "generate an instance");
  gen_cmd->require_subcommand(1);
  std::string out_path;
  auto* rich = gen_cmd->add_subcommand("richman", "random tug-of-war");
  int nodes = 1000, degree = 10;
  uint64_t seed = 1;
  rich->add_option("--nodes", nodes, "node count");
  rich->add_option("--degree", degree, "out-degree per node");
  rich->add_option("--seed", seed, "PRNG seed");
  rich->add_option("--out", out_path, "output file (default stdout)");
  auto* cat = gen_cmd->add_subcommand("catmouse", "pursuit-evasion grid");
  int grid = 65;
  double speed = 1.0;
  cat->add_option("--grid", grid, "points per axis (odd)");
  cat->add_option("--speed", speed, "pursuer speed bound");
  cat->add_option("--out", out_path, "output file (default stdout)");
  auto* ex5 = gen_cmd->add_subcommand("example5", "the 5-node instance");
  ex5->add_option("--out", out_path, "output file (default stdout)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "benchmark CSV over seeds");
  std::vector<int> sizes{1000};
  int bench_seeds = 10, bench_degree = 10, bench_threads = 0;
  std::string bench_out;
  SolveFlags bench_flags;
  bench_cmd->add_option("--sizes", sizes, "instance sizes")->delimiter(',');
  bench_cmd->add_option("--seeds", bench_seeds, "seeds per size (1..K)");
  bench_cmd->add_option("--degree", bench_degree, "out-degree per node");
  bench_cmd->add_option("--threads", bench_threads,
                        "parallel instances (MPPI_THREADS overrides)");
  bench_cmd->add_option("--out", bench_out, "CSV file (default stdout)");
  int64_t bench_sigma0_seed = -1;
  bench_cmd->add_option("--sigma0-seed", bench_sigma0_seed,
                        "random starting strategy seed (default: lowest "
                        "action index)");
  add_solve_flags(bench_cmd, bench_flags);

  // oracle-check
  auto* oracle_cmd =
      app.add_subcommand("oracle-check", "solver vs brute-force agreement");
  int count = 200;
  uint64_t oracle_seed = 1;
  bool inject_wrong_eta = false;
  oracle_cmd->add_option("--count", count, "number of random instances");
  oracle_cmd->add_option("--seed", oracle_seed, "base seed");
  oracle_cmd->add_flag("--inject-wrong-eta", inject_wrong_eta,
                       "negative control: perturb the solver output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Normalize CLI11's own exit codes: 0 for --help, 1 for bad usage.
    return app.exit(e) == 0 ? kExitOk : kExitParse;
  }

  try {
    if (*solve_cmd)
      return cmd_solve(input, solve_flags, json, solve_sigma0,
                       solve_sigma0_seed, solve_inject_bias);
    if (*bench_cmd)
      return cmd_bench(sizes, bench_seeds, bench_degree, bench_threads,
                       bench_out, bench_flags, bench_sigma0_seed);
    if (*oracle_cmd)
      return cmd_oracle_check(count, oracle_seed, inject_wrong_eta);
    if (*gen_cmd) {
      if (*rich) {
        mpg::RichmanConfig cfg;
        cfg.n = nodes;
        cfg.out_degree = degree;
        cfg.seed = seed;
        std::string text = mpg::serialize_game_text(mpg::gen_richman(cfg));
        if (out_path.empty())
          std::cout << text;
        else
          write_file(out_path, text);
      } else if (*cat) {
        mpg::CatMouseConfig cfg;
        cfg.grid = grid;
        cfg.speed = speed;
        mpg::CatMouseInstance inst = mpg::gen_catmouse(cfg);
        std::string text = mpg::serialize_game_text(inst.game);
        std::ostringstream coords;
        for (size_t i = 0; i < inst.coords.size(); ++i)
          coords << i << ' ' << inst.coords[i][0] << ' ' << inst.coords[i][1]
                 << "\n";
        if (out_path.empty()) {
          std::cout << text;
        } else {
          write_file(out_path, text);
          write_file(out_path + ".coords", coords.str());
        }
      } else if (*ex5) {
        std::string text = mpg::serialize_game_text(mpg::example_5node());
        if (out_path.empty())
          std::cout << text;
        else
          write_file(out_path, text);
      }
      return kExitOk;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}
