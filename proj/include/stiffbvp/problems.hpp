#pragma once

// Problem catalog: Troesch's problem, the linear u'' = u check problem and
// reference values for u2(0), u2(1) of Troesch's problem.

#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "stiffbvp/errors.hpp"
#include "stiffbvp/mesh.hpp"
#include "stiffbvp/ode_system.hpp"
#include "stiffbvp/scalar.hpp"
#include "stiffbvp/trapezoidal_solver.hpp"

namespace stiffbvp {

template <typename Real>
struct ProblemSpec {
  std::string name;
  OdeSystem<Real> system;
  BoundaryConditions<Real> bc;
  Real a{};
  Real b{};
  /// Data for the straight-line initial guess.
  EndpointValues<Real> initial;
  /// Exact solution (u at t), when known.
  std::function<Vector<Real>(const Real&)> exact;

  SegmentedProblem<Real> with_mesh(EvolvingMesh<Real> mesh) const {
    return SegmentedProblem<Real>{system, bc, a, b, std::move(mesh)};
  }
  EvolvingMesh<Real> initial_mesh(std::size_t intervals) const { return init_linear(a, b, intervals, initial); }
};

/// u1' = u2, u2' = lambda sinh(lambda u1), u1(0) = 0, u1(1) = 1.
template <typename Real>
ProblemSpec<Real> troesch(const Real& lambda) {
  if (!(lambda > Real(0))) throw ConfigError("troesch: lambda must be positive");
  SecondOrderEquation<Real> eq;
  eq.N = [](const Real&, const Real& u, const Real&, const ParamMap<Real>& p) {
    using std::sinh;
    const Real l = p.find("lambda")->second;
    return l * sinh(l * u);
  };
  eq.dN = [](const Real&, const Real& u, const Real&, const ParamMap<Real>& p) {
    using std::cosh;
    const Real l = p.find("lambda")->second;
    return std::array<Real, 3>{Real(0), l * l * cosh(l * u), Real(0)};
  };
  ProblemSpec<Real> spec;
  spec.name = "troesch";
  spec.system = from_second_order(eq, ParamMap<Real>{{"lambda", lambda}});
  spec.bc = dirichlet_conditions<Real>(2, {{0, Side::Left, 0, Real(0)}, {1, Side::Right, 0, Real(1)}});
  spec.a = 0;
  spec.b = 1;
  spec.initial = EndpointValues<Real>{2, 0, Real(0), Real(1), {1}};
  return spec;
}

/// u'' = u on [0, 1], u(0) = 0, u(1) = sinh(1); exact u = (sinh t, cosh t).
template <typename Real>
ProblemSpec<Real> linear_verification() {
  using std::sinh;
  SecondOrderEquation<Real> eq;
  eq.N = [](const Real&, const Real& u, const Real&, const ParamMap<Real>&) { return u; };
  eq.dN = [](const Real&, const Real&, const Real&, const ParamMap<Real>&) {
    return std::array<Real, 3>{Real(0), Real(1), Real(0)};
  };
  ProblemSpec<Real> spec;
  spec.name = "linear";
  spec.system = from_second_order(eq);
  const Real right = sinh(Real(1));
  spec.bc = dirichlet_conditions<Real>(2, {{0, Side::Left, 0, Real(0)}, {1, Side::Right, 0, right}});
  spec.a = 0;
  spec.b = 1;
  spec.initial = EndpointValues<Real>{2, 0, Real(0), right, {1}};
  spec.exact = [](const Real& t) {
    using std::cosh;
    using std::sinh;
    return Vector<Real>{sinh(t), cosh(t)};
  };
  return spec;
}

struct ReferenceValue {
  long double value = 0;
  std::string source;
};

struct ReferenceEntry {
  std::optional<ReferenceValue> u2_0;
  std::optional<ReferenceValue> u2_1;
};

using ReferenceTable = std::map<double, ReferenceEntry>;

/// Embedded Troesch values for lambda in {50, 100, 200, 300, 400, 500}.
/// u2(0) entries are tagged "published"; u2(1) entries are tagged
/// "convergence-estimated" (their trailing digits were not confirmed).
const ReferenceTable& troesch_reference_table();

/// Exact-lambda lookup; no interpolation.
std::optional<ReferenceEntry> reference_lookup(const ReferenceTable& table, double lambda);

/// u2(0) and u2(1) of Troesch's problem from its first integral:
///     X R_F(1, cosh^2(lambda/2), 1 + X^2) = lambda,  X = 2 sinh(lambda/2) / u2(0),
///     u2(1)^2 = u2(0)^2 + 4 sinh^2(lambda/2).
/// Valid for 0 < lambda <= 5000 in long double.
std::pair<long double, long double> troesch_closed_form(long double lambda);

/// Table entry when present for that component, else the closed form
/// (tagged "closed-form").
ReferenceEntry troesch_reference(double lambda);

/// CSV with header lambda,u2_0,u2_1,source.
void write_reference_csv(std::ostream& out, const ReferenceTable& table);

}  // namespace stiffbvp
