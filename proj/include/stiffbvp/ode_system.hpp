#pragma once

// First-order systems u' = F(u, t) with two-point boundary conditions
// g(u(a), u(b)) = 0.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "stiffbvp/errors.hpp"
#include "stiffbvp/linalg.hpp"
#include "stiffbvp/scalar.hpp"

namespace stiffbvp {

template <typename Real>
struct OdeSystem {
  /// F(u, t; params), length n.
  using Rhs = std::function<Vector<Real>(const Vector<Real>& u, const Real& t, const ParamMap<Real>& params)>;
  /// [dF/du | dF/dt], n x (n + 1).
  using Jac = std::function<Matrix<Real>(const Vector<Real>& u, const Real& t, const ParamMap<Real>& params)>;

  std::size_t n = 0;
  Rhs rhs;
  Jac jac;  // empty: finite differences
  ParamMap<Real> params;

  bool has_jacobian() const noexcept { return static_cast<bool>(jac); }
};

namespace detail {

template <typename Real>
void check_state(const OdeSystem<Real>& system, const Vector<Real>& u) {
  if (u.size() != system.n)
    throw EvaluationError("state length " + std::to_string(u.size()) + " does not match system dimension " +
                              std::to_string(system.n),
                          u.size());
}

template <typename Real>
Real fd_step(const Real& x) {
  using std::abs;
  using std::pow;
  static const Real cube_root_eps = pow(machine_epsilon<Real>(), Real(1) / Real(3));
  const Real scale = abs(x) > Real(1) ? abs(x) : Real(1);
  const Real h = cube_root_eps * scale;
  // make x + h exactly representable
  if constexpr (std::is_floating_point_v<Real>) {
    volatile Real xh = x + h;
    return Real(xh) - x;
  } else {
    const Real xh = x + h;
    return xh - x;
  }
}

}  // namespace detail

template <typename Real>
Vector<Real> eval_rhs(const OdeSystem<Real>& system, const Vector<Real>& u, const Real& t) {
  detail::check_state(system, u);
  Vector<Real> f = system.rhs(u, t, system.params);
  if (f.size() != system.n) throw EvaluationError("rhs returned a vector of wrong length", f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!is_finite(f[i])) throw EvaluationError("non-finite right-hand side", i);
  return f;
}

/// Central-difference approximation of [dF/du | dF/dt].
template <typename Real>
Matrix<Real> fd_jacobian(const OdeSystem<Real>& system, const Vector<Real>& u, const Real& t) {
  const std::size_t n = system.n;
  Matrix<Real> jac(n, n + 1);
  Vector<Real> x = u;
  for (std::size_t j = 0; j <= n; ++j) {
    const Real base = j < n ? u[j] : t;
    const Real h = detail::fd_step(base);
    Vector<Real> fp, fm;
    if (j < n) {
      x[j] = base + h;
      fp = eval_rhs(system, x, t);
      x[j] = base - h;
      fm = eval_rhs(system, x, t);
      x[j] = base;
    } else {
      fp = eval_rhs(system, x, t + h);
      fm = eval_rhs(system, x, t - h);
    }
    for (std::size_t i = 0; i < n; ++i) jac(i, j) = (fp[i] - fm[i]) / (2 * h);
  }
  return jac;
}

template <typename Real>
Matrix<Real> eval_jacobian(const OdeSystem<Real>& system, const Vector<Real>& u, const Real& t) {
  detail::check_state(system, u);
  if (!system.has_jacobian()) return fd_jacobian(system, u, t);
  Matrix<Real> jac = system.jac(u, t, system.params);
  if (jac.rows() != system.n || jac.cols() != system.n + 1)
    throw EvaluationError("Jacobian has wrong shape", jac.rows());
  for (std::size_t i = 0; i < jac.rows(); ++i)
    for (std::size_t j = 0; j < jac.cols(); ++j)
      if (!is_finite(jac(i, j))) throw EvaluationError("non-finite Jacobian entry", i);
  return jac;
}

/// u'' = N(u', u, t) as the system u1' = u2, u2' = N(u2, u1, t).
template <typename Real>
struct SecondOrderEquation {
  using Fn = std::function<Real(const Real& uprime, const Real& u, const Real& t, const ParamMap<Real>&)>;
  /// (dN/du', dN/du, dN/dt)
  using Grad = std::function<std::array<Real, 3>(const Real& uprime, const Real& u, const Real& t,
                                                 const ParamMap<Real>&)>;
  Fn N;
  Grad dN;  // optional
};

template <typename Real>
OdeSystem<Real> from_second_order(SecondOrderEquation<Real> eq, ParamMap<Real> params = {}) {
  OdeSystem<Real> sys;
  sys.n = 2;
  sys.params = std::move(params);
  auto N = eq.N;
  sys.rhs = [N](const Vector<Real>& u, const Real& t, const ParamMap<Real>& p) {
    return Vector<Real>{u[1], N(u[1], u[0], t, p)};
  };
  if (eq.dN) {
    auto dN = eq.dN;
    sys.jac = [dN](const Vector<Real>& u, const Real& t, const ParamMap<Real>& p) {
      const auto g = dN(u[1], u[0], t, p);
      Matrix<Real> j(2, 3);
      j(0, 1) = 1;
      j(1, 0) = g[1];
      j(1, 1) = g[0];
      j(1, 2) = g[2];
      return j;
    };
  }
  return sys;
}

enum class Side { Left, Right };

/// A boundary condition row of the form u_component(side) = value.
template <typename Real>
struct BoundaryPin {
  std::size_t row = 0;
  Side side = Side::Left;
  std::size_t component = 0;
  Real value{};
};

template <typename Real>
struct BoundaryConditions {
  using Residual = std::function<Vector<Real>(const Vector<Real>& ua, const Vector<Real>& ub)>;
  /// (dg/du_a, dg/du_b), each n x n.
  using Jac = std::function<std::pair<Matrix<Real>, Matrix<Real>>(const Vector<Real>& ua, const Vector<Real>& ub)>;

  std::size_t n = 0;
  Residual residual;
  Jac jac;  // optional
  /// Rows known to be plain Dirichlet conditions. The solver needs these to
  /// allow a swap of the pinned component on a boundary interval.
  std::vector<BoundaryPin<Real>> pins;

  const BoundaryPin<Real>* find_pin(Side side, std::size_t component) const {
    for (const auto& p : pins)
      if (p.side == side && p.component == component) return &p;
    return nullptr;
  }
};

/// Boundary conditions consisting only of Dirichlet pins, one per row.
template <typename Real>
BoundaryConditions<Real> dirichlet_conditions(std::size_t n, std::vector<BoundaryPin<Real>> pins) {
  if (pins.size() != n) throw ConfigError("dirichlet_conditions: need exactly n pins");
  for (std::size_t r = 0; r < n; ++r) {
    pins[r].row = r;
    if (pins[r].component >= n) throw ConfigError("dirichlet_conditions: component out of range");
  }
  BoundaryConditions<Real> bc;
  bc.n = n;
  bc.pins = pins;
  bc.residual = [pins](const Vector<Real>& ua, const Vector<Real>& ub) {
    Vector<Real> g(pins.size());
    for (std::size_t r = 0; r < pins.size(); ++r) {
      const auto& p = pins[r];
      g[r] = (p.side == Side::Left ? ua[p.component] : ub[p.component]) - p.value;
    }
    return g;
  };
  bc.jac = [pins, n](const Vector<Real>&, const Vector<Real>&) {
    std::pair<Matrix<Real>, Matrix<Real>> out{Matrix<Real>(n, n), Matrix<Real>(n, n)};
    for (std::size_t r = 0; r < pins.size(); ++r) {
      auto& m = pins[r].side == Side::Left ? out.first : out.second;
      m(r, pins[r].component) = 1;
    }
    return out;
  };
  return bc;
}

template <typename Real>
Vector<Real> eval_bc(const BoundaryConditions<Real>& bc, const Vector<Real>& ua, const Vector<Real>& ub) {
  Vector<Real> g = bc.residual(ua, ub);
  if (g.size() != bc.n) throw EvaluationError("boundary residual has wrong length", g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!is_finite(g[i])) throw EvaluationError("non-finite boundary residual", i);
  return g;
}

template <typename Real>
std::pair<Matrix<Real>, Matrix<Real>> eval_bc_jacobian(const BoundaryConditions<Real>& bc, const Vector<Real>& ua,
                                                       const Vector<Real>& ub) {
  if (bc.jac) return bc.jac(ua, ub);
  const std::size_t n = bc.n;
  std::pair<Matrix<Real>, Matrix<Real>> out{Matrix<Real>(n, n), Matrix<Real>(n, n)};
  Vector<Real> a = ua, b = ub;
  for (int side = 0; side < 2; ++side) {
    Vector<Real>& x = side == 0 ? a : b;
    auto& m = side == 0 ? out.first : out.second;
    for (std::size_t j = 0; j < n; ++j) {
      const Real base = x[j];
      const Real h = detail::fd_step(base);
      x[j] = base + h;
      const auto gp = eval_bc(bc, a, b);
      x[j] = base - h;
      const auto gm = eval_bc(bc, a, b);
      x[j] = base;
      for (std::size_t i = 0; i < n; ++i) m(i, j) = (gp[i] - gm[i]) / (2 * h);
    }
  }
  return out;
}

}  // namespace stiffbvp
