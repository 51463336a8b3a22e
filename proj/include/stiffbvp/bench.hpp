#pragma once

// Benchmark drivers: lambda continuation (stiffness resistance number),
// error curves against reference values, and solution CSV I/O.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stiffbvp/errors.hpp"
#include "stiffbvp/mesh.hpp"
#include "stiffbvp/problems.hpp"
#include "stiffbvp/strategy.hpp"
#include "stiffbvp/trapezoidal_solver.hpp"
#include "stiffbvp/transform.hpp"

namespace stiffbvp {

/// Everything needed to run one solve from a given problem and mesh.
template <typename Real>
struct SolverSetup {
  NewtonConfig<Real> newton;
  std::optional<RefinementConfig<Real>> refinement;
  Strategy<Real> strategy;
  /// Intervals of the straight-line initial guess.
  std::size_t initial_intervals = 100;
};

template <typename Real>
Solution<Real> solve_problem(const ProblemSpec<Real>& spec, EvolvingMesh<Real> mesh, const SolverSetup<Real>& setup) {
  const auto hook = strategy_hook(setup.strategy, std::optional<BoundaryConditions<Real>>(spec.bc));
  return newton_solve(spec.with_mesh(std::move(mesh)), setup.newton, setup.refinement, hook);
}

template <typename Real>
Solution<Real> solve_cold(const ProblemSpec<Real>& spec, const SolverSetup<Real>& setup) {
  return solve_problem(spec, spec.initial_mesh(setup.initial_intervals), setup);
}

/// Solves family(lambda) by stepping from `from` in increments of `delta`,
/// warm-starting each step from the previous mesh. Large Troesch parameters
/// solved cold can converge to spurious discrete solutions.
template <typename Real>
Solution<Real> solve_continued(const std::function<ProblemSpec<Real>(Real)>& family, Real lambda, Real from,
                               Real delta, const SolverSetup<Real>& setup) {
  if (!(delta > Real(0))) throw ConfigError("solve_continued: delta must be positive");
  if (!(from <= lambda)) throw ConfigError("solve_continued: start must not exceed the target");
  auto sol = solve_cold(family(from), setup);
  for (Real l = from; l < lambda;) {
    l = l + delta < lambda ? l + delta : lambda;
    sol = solve_problem(family(l), sol.mesh, setup);
  }
  return sol;
}

/// Reference values of the tracked component at both ends.
using ReferenceFn = std::function<std::optional<std::pair<long double, long double>>(double lambda)>;

inline ReferenceFn troesch_reference_fn() {
  return [](double lambda) -> std::optional<std::pair<long double, long double>> {
    const auto e = troesch_reference(lambda);
    return std::make_pair(e.u2_0->value, e.u2_1->value);
  };
}

template <typename Real>
std::pair<Real, Real> relative_end_errors(const EvolvingMesh<Real>& mesh, std::size_t component,
                                          const std::pair<long double, long double>& ref) {
  using std::abs;
  const Real r0 = Real(ref.first);
  const Real r1 = Real(ref.second);
  const Real e0 = abs(mesh.knots.front().u[component] - r0) / abs(r0);
  const Real e1 = abs(mesh.knots.back().u[component] - r1) / abs(r1);
  return {e0, e1};
}

template <typename Real>
struct SrnConfig {
  Real lambda0 = 3;
  Real delta_lambda = 1;
  StopCriterion stop = StopCriterion::Accuracy;
  Real lambda_cap = 200;
  SolverSetup<Real> solver;
  std::size_t component = 1;  // tracked at both ends

  void validate() const {
    if (!(delta_lambda > Real(0))) throw ConfigError("srn: delta_lambda must be positive");
    if (!(lambda_cap > lambda0)) throw ConfigError("srn: lambda_cap must exceed lambda0");
    if (stop == StopCriterion::None) throw ConfigError("srn: stop criterion must be accuracy or convergence");
  }
};

template <typename Real>
struct LambdaRecord {
  Real lambda{};
  std::optional<Real> rel_err_0;
  std::optional<Real> rel_err_1;
  std::size_t mesh_size = 0;
  int newton_iters = 0;
  bool solved = false;
  std::string note;
};

template <typename Real>
struct SrnResult {
  std::optional<Real> srn;  // none when lambda0 already fails the accuracy check
  StopCriterion stop_reason = StopCriterion::None;
  std::size_t max_mesh_size = 0;
  std::vector<LambdaRecord<Real>> per_lambda;
  std::optional<Solution<Real>> last_solution;
};

using ProblemFamily = std::function<ProblemSpec<double>(double)>;

/// Continuation in lambda with warm starts. Stops on the configured
/// criterion or when the next lambda would exceed lambda_cap (stop reason
/// None). Any solver failure counts as the convergence criterion.
template <typename Real>
SrnResult<Real> run_continuation(const std::function<ProblemSpec<Real>(Real)>& family, const SrnConfig<Real>& cfg,
                                 const ReferenceFn& reference = {},
                                 const std::function<void(const LambdaRecord<Real>&)>& progress = {}) {
  cfg.validate();
  SrnResult<Real> result;
  std::optional<EvolvingMesh<Real>> warm;
  for (int step = 0;; ++step) {
    const Real lambda = cfg.lambda0 + Real(step) * cfg.delta_lambda;
    if (lambda > cfg.lambda_cap) break;
    const ProblemSpec<Real> spec = family(lambda);
    LambdaRecord<Real> rec;
    rec.lambda = lambda;
    std::optional<Solution<Real>> sol;
    try {
      sol = warm ? solve_problem(spec, *warm, cfg.solver) : solve_cold(spec, cfg.solver);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      rec.note = e.what();
      if (step == 0) throw ColdStartFailure(std::string("lambda0 failed: ") + e.what());
    }
    std::optional<std::pair<Real, Real>> errs;
    if (sol) {
      rec.solved = true;
      rec.mesh_size = sol->mesh.size();
      rec.newton_iters = sol->iterations;
      for (const auto& h : sol->history) result.max_mesh_size = std::max(result.max_mesh_size, h.knots);
      if (reference)
        if (const auto ref = reference(static_cast<double>(lambda))) {
          errs = relative_end_errors(sol->mesh, cfg.component, *ref);
          rec.rel_err_0 = errs->first;
          rec.rel_err_1 = errs->second;
        }
    }
    if (progress) progress(rec);
    result.per_lambda.push_back(rec);

    StopCriterion verdict = classify_stop<Real>(!sol, errs);
    if (cfg.stop == StopCriterion::Convergence && verdict == StopCriterion::Accuracy) verdict = StopCriterion::None;
    if (verdict != StopCriterion::None) {
      result.stop_reason = verdict;
      return result;
    }
    result.srn = lambda;
    warm = sol->mesh;
    result.last_solution = std::move(sol);
  }
  return result;
}

template <typename Real>
struct ErrorRow {
  Real lambda{};
  bool ok = false;
  Real rel_err_0{};
  Real rel_err_1{};
  std::size_t mesh_size = 0;
  std::string note;
};

/// One cold solve per lambda; rows whose solve fails are flagged.
template <typename Real>
std::vector<ErrorRow<Real>> error_curve(const std::function<ProblemSpec<Real>(Real)>& family,
                                        const std::vector<Real>& lambdas, const SolverSetup<Real>& setup,
                                        const ReferenceFn& reference, std::size_t component = 1) {
  std::vector<ErrorRow<Real>> rows;
  for (const Real& lambda : lambdas) {
    ErrorRow<Real> row;
    row.lambda = lambda;
    try {
      const auto sol = solve_cold(family(lambda), setup);
      const auto ref = reference(static_cast<double>(lambda));
      if (!ref) throw ConfigError("no reference value");
      const auto [e0, e1] = relative_end_errors(sol.mesh, component, *ref);
      row.ok = true;
      row.rel_err_0 = e0;
      row.rel_err_1 = e1;
      row.mesh_size = sol.mesh.size();
    } catch (const Error& e) {
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// CSV with header lambda,rel_err_0,rel_err_1,mesh_size; failed rows keep
/// the lambda and leave the other fields empty.
template <typename Real>
void write_error_csv(std::ostream& out, const std::vector<ErrorRow<Real>>& rows) {
  out << "lambda,rel_err_0,rel_err_1,mesh_size\n" << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.lambda << ',';
    if (r.ok) out << r.rel_err_0 << ',' << r.rel_err_1 << ',' << r.mesh_size;
    else out << ",,";
    out << '\n';
  }
}

/// CSV with header lambda,rel_err_0,rel_err_1,mesh_size,newton_iters,solved.
template <typename Real>
void write_srn_csv(std::ostream& out, const SrnResult<Real>& result) {
  out << "lambda,rel_err_0,rel_err_1,mesh_size,newton_iters,solved\n" << std::setprecision(10);
  for (const auto& r : result.per_lambda) {
    out << r.lambda << ',';
    if (r.rel_err_0) out << *r.rel_err_0;
    out << ',';
    if (r.rel_err_1) out << *r.rel_err_1;
    out << ',' << r.mesh_size << ',' << r.newton_iters << ',' << (r.solved ? 1 : 0) << '\n';
  }
}

/// CSV t,u1..un,transform with 17 significant digits; the transform column
/// holds the transform of the interval starting at the knot (empty on the
/// last knot).
template <typename Real>
void export_solution(std::ostream& out, const EvolvingMesh<Real>& mesh) {
  mesh.check();
  const std::size_t n = mesh.knots.front().u.size();
  out << 't';
  for (std::size_t j = 0; j < n; ++j) out << ",u" << (j + 1);
  out << ",transform\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    line.str({});
    line << mesh.knots[i].t;
    for (const auto& v : mesh.knots[i].u) line << ',' << v;
    line << ',' << (i < mesh.intervals() ? to_string(mesh.transforms[i]) : std::string());
    out << line.str() << '\n';
  }
  if (!out) throw std::ios_base::failure("failed to write solution CSV");
}

template <typename Real>
void export_solution(const std::string& path, const EvolvingMesh<Real>& mesh) {
  std::ofstream f(path);
  if (!f) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  export_solution(f, mesh);
}

/// Inverse of export_solution for double meshes.
inline EvolvingMesh<double> import_solution(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("solution CSV: missing header");
  std::size_t columns = 1;
  for (char c : line) columns += c == ',';
  if (columns < 3) throw ConfigError("solution CSV: bad header");
  const std::size_t n = columns - 2;
  EvolvingMesh<double> mesh;
  std::vector<std::string> tags;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != columns) throw ConfigError("solution CSV: wrong field count");
    auto number = [](const std::string& s) {
      double v = 0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError("solution CSV: bad number '" + s + "'");
      return v;
    };
    Knot<double> k{Vector<double>(n), number(fields[0])};
    for (std::size_t j = 0; j < n; ++j) k.u[j] = number(fields[j + 1]);
    mesh.knots.push_back(std::move(k));
    tags.push_back(fields.back());
  }
  if (mesh.knots.size() < 2) throw ConfigError("solution CSV: need at least two knots");
  for (std::size_t i = 0; i + 1 < tags.size(); ++i) mesh.transforms.push_back(parse_transform(tags[i]));
  return mesh;
}

}  // namespace stiffbvp
