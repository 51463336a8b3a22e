// stiffbvp: solve, srn, errors and reference subcommands.
//
// Exit codes: 0 success, 2 solver failure, 3 configuration error, 1 I/O or
// other errors. Progress goes to stderr; data goes to files only.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cli_config.hpp"
#include "stiffbvp/bench.hpp"

namespace {

using namespace stiffbvp;

struct SolverOptions {
  std::string problem = "troesch";
  std::string strategy = "identity";
  std::optional<double> h_min;
  std::optional<double> h_max;
  double M = 0.1;
  double tol = 1e-10;
  int max_iters = 50;
  std::size_t intervals = 100;
  bool no_line_search = false;
  double theta = 10;
  std::string config;

  void add_to(CLI::App& app) {
    app.add_option("--problem", problem, "troesch | linear")->check(CLI::IsMember({"troesch", "linear"}));
    app.add_option("--strategy", strategy, "identity | auto | troesch-sp1fp2 | troesch-sp2-sp1fp2");
    app.add_option("--h-min", h_min, "refinement: smallest natural step");
    app.add_option("--h-max", h_max, "refinement: largest natural step");
    app.add_option("--M", M, "refinement: derivative-mismatch bound");
    app.add_option("--tol", tol, "Newton residual tolerance");
    app.add_option("--max-iters", max_iters, "Newton iteration limit");
    app.add_option("--intervals", intervals, "intervals of the straight-line initial guess");
    app.add_flag("--no-line-search", no_line_search, "take full Newton steps");
    app.add_option("--theta", theta, "stiffness tolerance of the auto strategy");
    app.add_option("--config", config, "key = value file; command-line flags override it");
  }

  SolverSetup<double> setup() const {
    SolverSetup<double> s;
    s.newton.tol = tol;
    s.newton.max_iters = max_iters;
    s.newton.line_search = !no_line_search;
    s.initial_intervals = intervals;
    s.strategy.kind = parse_strategy(strategy);
    s.strategy.stiffness.theta = theta;
    if (h_min || h_max) {
      if (!h_min || !h_max) throw ConfigError("refinement needs both --h-min and --h-max");
      s.refinement = RefinementConfig<double>{M, *h_min, *h_max};
      s.refinement->validate();
    }
    s.newton.validate();
    return s;
  }

  std::function<ProblemSpec<double>(double)> family() const {
    if (problem == "linear") return [](double) { return linear_verification<double>(); };
    return [](double lambda) { return troesch<double>(lambda); };
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  return f;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + item + "' in list");
    }
  }
  if (out.empty()) throw ConfigError("empty lambda list");
  return out;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Stiff two-point BVP solver with swap/flip transformations"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SolverOptions solve_opts;
  double lambda = 10;
  std::string solve_out;
  auto* solve = app.add_subcommand("solve", "solve one problem and export the knots");
  solve_opts.add_to(*solve);
  solve->add_option("--lambda", lambda, "Troesch parameter");
  solve->add_option("--out", solve_out, "solution CSV (t,u1,...,un,transform)");
  std::optional<double> warm_from;
  double warm_delta = 1;
  solve->add_option("--warm-from", warm_from, "continue from this lambda instead of a cold start");
  solve->add_option("--warm-delta", warm_delta, "lambda increment of the warm start");

  SolverOptions srn_opts;
  srn_opts.intervals = 10;
  double lambda0 = 3, delta = 1, cap = 200;
  std::string stop = "accuracy", srn_out;
  auto* srn = app.add_subcommand("srn", "lambda continuation until a stop criterion fires");
  srn_opts.add_to(*srn);
  srn->add_option("--lambda0", lambda0, "first lambda");
  srn->add_option("--delta", delta, "lambda increment");
  srn->add_option("--lambda-cap", cap, "largest lambda attempted");
  srn->add_option("--stop", stop, "accuracy | convergence");
  srn->add_option("--out", srn_out, "per-lambda CSV");

  SolverOptions err_opts;
  std::string lambdas = "1,2,3,4,5", err_out;
  auto* errors = app.add_subcommand("errors", "relative errors of u2(0), u2(1) against reference values");
  err_opts.add_to(*errors);
  errors->add_option("--lambdas", lambdas, "comma-separated lambda values");
  errors->add_option("--out", err_out, "CSV lambda,rel_err_0,rel_err_1,mesh_size");

  std::string ref_out;
  auto* reference = app.add_subcommand("reference", "export the embedded reference table");
  reference->add_option("--out", ref_out, "CSV lambda,u2_0,u2_1,source")->required();

  std::vector<std::string> args;
  try {
    args = cli::expand_config(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (*solve) {
      const auto setup = solve_opts.setup();
      const auto family = solve_opts.family();
      const auto sol = warm_from ? solve_continued<double>(family, lambda, *warm_from, warm_delta, setup)
                                 : solve_cold(family(lambda), setup);
      for (const auto& h : sol.history)
        std::fprintf(stderr, "iter %d knots %zu residual %.3e scaled %.3e step %g zones %s\n", h.iteration, h.knots,
                     double(h.residual), double(h.scaled_residual), double(h.step), h.zones.c_str());
      const auto& m = sol.mesh;
      std::fprintf(stderr, "converged: iterations %d knots %zu u2(0) %.10e u2(1) %.10e\n", sol.iterations, m.size(),
                   m.knots.front().u[1], m.knots.back().u[1]);
      if (!solve_out.empty()) {
        auto f = open_out(solve_out);
        export_solution(f, m);
      }
    } else if (*srn) {
      SrnConfig<double> cfg;
      cfg.lambda0 = lambda0;
      cfg.delta_lambda = delta;
      cfg.lambda_cap = cap;
      cfg.stop = parse_stop(stop);
      cfg.solver = srn_opts.setup();
      if (srn_opts.problem != "troesch") throw ConfigError("srn needs --problem troesch");
      const auto result = run_continuation<double>(srn_opts.family(), cfg, troesch_reference_fn(), [](const auto& r) {
        std::fprintf(stderr, "lambda %g %s rel_err_0 %.3e rel_err_1 %.3e knots %zu iters %d %s\n", r.lambda,
                     r.solved ? "ok" : "failed", r.rel_err_0.value_or(-1), r.rel_err_1.value_or(-1), r.mesh_size,
                     r.newton_iters, r.note.c_str());
      });
      if (result.srn) std::fprintf(stderr, "SRN %g", *result.srn);
      else std::fprintf(stderr, "SRN none");
      std::fprintf(stderr, " (stop: %s, max mesh %zu)\n", to_string(result.stop_reason).c_str(), result.max_mesh_size);
      if (!srn_out.empty()) {
        auto f = open_out(srn_out);
        write_srn_csv(f, result);
      }
    } else if (*errors) {
      if (err_opts.problem != "troesch") throw ConfigError("errors needs --problem troesch");
      const auto rows = error_curve<double>(err_opts.family(), parse_list(lambdas), err_opts.setup(),
                                            troesch_reference_fn());
      for (const auto& r : rows)
        std::fprintf(stderr, "lambda %g %s rel_err_0 %.3e rel_err_1 %.3e knots %zu %s\n", r.lambda,
                     r.ok ? "ok" : "failed", r.rel_err_0, r.rel_err_1, r.mesh_size, r.note.c_str());
      if (!err_out.empty()) {
        auto f = open_out(err_out);
        write_error_csv(f, rows);
      }
    } else if (*reference) {
      auto f = open_out(ref_out);
      write_reference_csv(f, troesch_reference_table());
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
