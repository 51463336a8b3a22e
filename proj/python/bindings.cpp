#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "stiffbvp/bench.hpp"

namespace py = pybind11;
using namespace stiffbvp;

namespace {

SolverSetup<double> make_setup(const std::string& strategy, std::size_t intervals, std::optional<double> h_min,
                               std::optional<double> h_max, double M, double tol, int max_iters, bool line_search) {
  SolverSetup<double> s;
  s.strategy.kind = parse_strategy(strategy);
  s.initial_intervals = intervals;
  s.newton.tol = tol;
  s.newton.max_iters = max_iters;
  s.newton.line_search = line_search;
  s.newton.validate();
  if (h_min || h_max) {
    if (!h_min || !h_max) throw ConfigError("refinement needs both h_min and h_max");
    s.refinement = RefinementConfig<double>{M, *h_min, *h_max};
    s.refinement->validate();
  }
  return s;
}

ProblemSpec<double> make_problem(const std::string& problem, double lambda) {
  if (problem == "troesch") return troesch(lambda);
  if (problem == "linear") return linear_verification<double>();
  throw ConfigError("unknown problem '" + problem + "'");
}

py::dict mesh_dict(const EvolvingMesh<double>& mesh) {
  std::vector<double> t;
  std::vector<std::vector<double>> u;
  std::vector<std::string> transforms;
  for (const auto& k : mesh.knots) {
    t.push_back(k.t);
    u.push_back(k.u);
  }
  for (const auto& tr : mesh.transforms) transforms.push_back(to_string(tr));
  py::dict d;
  d["t"] = t;
  d["u"] = u;
  d["transforms"] = transforms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stiff two-point BVP solver with swap/flip transformations.";

  auto base = py::register_exception<Error>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  (void)base;

  m.def(
      "solve",
      [](const std::string& problem, double lambda, const std::string& strategy, std::size_t intervals,
         std::optional<double> h_min, std::optional<double> h_max, double M, double tol, int max_iters,
         bool line_search, std::optional<double> warm_from, double warm_delta) {
        const auto setup = make_setup(strategy, intervals, h_min, h_max, M, tol, max_iters, line_search);
        const auto sol =
            warm_from ? solve_continued<double>([&](double l) { return make_problem(problem, l); }, lambda,
                                                *warm_from, warm_delta, setup)
                      : solve_cold(make_problem(problem, lambda), setup);
        py::dict d = mesh_dict(sol.mesh);
        d["iterations"] = sol.iterations;
        d["residual"] = sol.residual_norm;
        return d;
      },
      py::arg("problem") = "troesch", py::arg("lam") = 10.0, py::arg("strategy") = "identity",
      py::arg("intervals") = 100, py::arg("h_min") = py::none(), py::arg("h_max") = py::none(), py::arg("M") = 0.1,
      py::arg("tol") = 1e-10, py::arg("max_iters") = 50, py::arg("line_search") = true,
      py::arg("warm_from") = py::none(), py::arg("warm_delta") = 1.0,
      "Solve from the straight-line guess, or by continuation from warm_from; returns t, u, transforms, "
      "iterations, residual.");

  m.def(
      "srn",
      [](double lambda0, double delta, const std::string& stop, double cap, const std::string& strategy,
         std::size_t intervals, std::optional<double> h_min, std::optional<double> h_max, double M) {
        SrnConfig<double> cfg;
        cfg.lambda0 = lambda0;
        cfg.delta_lambda = delta;
        cfg.stop = parse_stop(stop);
        cfg.lambda_cap = cap;
        cfg.solver = make_setup(strategy, intervals, h_min, h_max, M, 1e-10, 50, true);
        const auto r = run_continuation<double>([](double l) { return troesch(l); }, cfg, troesch_reference_fn());
        py::list rows;
        for (const auto& rec : r.per_lambda) {
          py::dict row;
          row["lambda"] = rec.lambda;
          row["rel_err_0"] = rec.rel_err_0;
          row["rel_err_1"] = rec.rel_err_1;
          row["mesh_size"] = rec.mesh_size;
          row["newton_iters"] = rec.newton_iters;
          row["solved"] = rec.solved;
          rows.append(row);
        }
        py::dict d;
        d["srn"] = r.srn;
        d["stop"] = to_string(r.stop_reason);
        d["max_mesh_size"] = r.max_mesh_size;
        d["per_lambda"] = rows;
        return d;
      },
      py::arg("lambda0") = 3.0, py::arg("delta") = 1.0, py::arg("stop") = "accuracy", py::arg("cap") = 200.0,
      py::arg("strategy") = "identity", py::arg("intervals") = 10, py::arg("h_min") = py::none(),
      py::arg("h_max") = py::none(), py::arg("M") = 0.1, "Troesch lambda continuation; returns the SRN record.");

  m.def(
      "troesch_closed_form",
      [](double lambda) {
        const auto [a, b] = troesch_closed_form(lambda);
        return std::make_pair(double(a), double(b));
      },
      py::arg("lam"), "u2(0) and u2(1) of Troesch's problem from its first integral.");

  m.def("reference_table", [] {
    py::dict d;
    for (const auto& [lambda, e] : troesch_reference_table()) {
      py::dict entry;
      entry["u2_0"] = e.u2_0 ? py::object(py::float_(double(e.u2_0->value))) : py::object(py::none());
      entry["u2_1"] = e.u2_1 ? py::object(py::float_(double(e.u2_1->value))) : py::object(py::none());
      d[py::float_(lambda)] = entry;
    }
    return d;
  });

  m.def(
      "transform_rhs",
      [](const std::string& transform, double lambda, const std::vector<double>& q, double tau) {
        return eval_rhs(apply(parse_transform(transform), troesch(lambda).system), q, tau);
      },
      py::arg("transform"), py::arg("lam"), py::arg("q"), py::arg("tau"),
      "Right-hand side of the transformed Troesch system at (q, tau).");

  m.def(
      "map_state",
      [](const std::string& transform, const std::vector<double>& u, double t) {
        const auto s = map_state(parse_transform(transform), u, t);
        return std::make_pair(s.q, s.tau);
      },
      py::arg("transform"), py::arg("u"), py::arg("t"));

  m.def(
      "unmap_state",
      [](const std::string& transform, const std::vector<double>& q, double tau) {
        const auto k = unmap_state(parse_transform(transform), NaturalState<double>{q, tau});
        return std::make_pair(k.u, k.t);
      },
      py::arg("transform"), py::arg("q"), py::arg("tau"));

  m.def(
      "normalize_transform", [](const std::string& text) { return to_string(parse_transform(text)); },
      py::arg("text"), "Canonical text form of a transform.");
}
