#pragma once

// Trapezoidal scheme on an evolving mesh with per-interval transforms.
//
// Interval i uses the variables of its transform T_i:
//     q_{i+1} - q_i = (tau_{i+1} - tau_i) / 2 * (T_i(F)(q_{i+1}, tau_{i+1}) + T_i(F)(q_i, tau_i)).
// The free coordinates of knot i are the dependent natural variables of
// T_{i-1} (of T_0 for knot 0); the natural independent variable of that
// transform stays fixed during a Newton sweep.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "stiffbvp/block_solver.hpp"
#include "stiffbvp/errors.hpp"
#include "stiffbvp/linalg.hpp"
#include "stiffbvp/mesh.hpp"
#include "stiffbvp/ode_system.hpp"
#include "stiffbvp/scalar.hpp"
#include "stiffbvp/transform.hpp"

namespace stiffbvp {

template <typename Real>
struct SegmentedProblem {
  OdeSystem<Real> system;
  BoundaryConditions<Real> bc;
  Real a{};
  Real b{};
  EvolvingMesh<Real> mesh;
};

template <typename Real>
struct NewtonConfig {
  Real tol = Real(1e-10);
  int max_iters = 50;
  Real damping = Real(1);
  Real min_damping = Real(1) / Real(1 << 20);
  /// false: plain Newton, every full step is accepted unless it cannot be evaluated.
  bool line_search = true;

  void validate() const {
    if (!(tol > Real(0))) throw ConfigError("newton: tol must be positive");
    if (max_iters < 1) throw ConfigError("newton: max_iters must be positive");
    if (!(damping > Real(0) && damping <= Real(1))) throw ConfigError("newton: damping must lie in (0, 1]");
    if (!(min_damping > Real(0) && min_damping <= damping)) throw ConfigError("newton: bad min_damping");
  }
};

template <typename Real>
struct IterationRecord {
  int iteration = 0;
  std::size_t knots = 0;
  Real residual{};
  Real scaled_residual{};
  Real step{};  // damping factor accepted; 0 on the final record
  std::string zones;
};

template <typename Real>
struct Solution {
  EvolvingMesh<Real> mesh;
  int iterations = 0;
  Real residual_norm{};
  Real scaled_residual_norm{};
  std::vector<IterationRecord<Real>> history;
};

/// Replaces the transforms of a mesh between Newton sweeps.
template <typename Real>
using TransformHook = std::function<std::vector<Transform>(const EvolvingMesh<Real>&, const OdeSystem<Real>&)>;

/// Run-length summary of the interval transforms, e.g. "I*12,SP1.FP2*30".
inline std::string zone_summary(const std::vector<Transform>& transforms) {
  std::string out;
  std::size_t i = 0;
  while (i < transforms.size()) {
    std::size_t j = i;
    while (j < transforms.size() && transforms[j] == transforms[i]) ++j;
    if (!out.empty()) out += ',';
    out += to_string(transforms[i]) + "*" + std::to_string(j - i);
    i = j;
  }
  return out;
}

namespace detail {

inline std::size_t owner(std::size_t knot) { return knot == 0 ? 0 : knot - 1; }

template <typename Real>
class SystemCache {
 public:
  explicit SystemCache(const OdeSystem<Real>& base) : base_(base) {}
  const OdeSystem<Real>& get(const Transform& t) {
    for (const auto& [key, sys] : entries_)
      if (key == t) return sys;
    entries_.emplace_back(t, apply(t, base_));
    return entries_.back().second;
  }

 private:
  const OdeSystem<Real>& base_;
  std::vector<std::pair<Transform, OdeSystem<Real>>> entries_;
};

/// Boundary row replaced because an end interval swaps a pinned component.
template <typename Real>
struct AnchoredRow {
  std::size_t row = 0;
  Real target{};
};

template <typename Real>
std::optional<AnchoredRow<Real>> anchored_row(const SegmentedProblem<Real>& p, Side side) {
  const Transform& t = side == Side::Left ? p.mesh.transforms.front() : p.mesh.transforms.back();
  if (!t.swap()) return std::nullopt;
  const auto* pin = p.bc.find_pin(side, *t.swap());
  if (!pin)
    throw NonStationaryBoundary("swap of component " + std::to_string(*t.swap() + 1) + " on the " +
                                (side == Side::Left ? "left" : "right") + " end interval needs a Dirichlet pin");
  return AnchoredRow<Real>{pin->row, side == Side::Left ? p.a : p.b};
}

/// Left endpoint of interval i in T_i variables and its derivative with
/// respect to the free coordinates of knot i.
template <typename Real>
struct LeftEndpoint {
  NaturalState<Real> s;
  Matrix<Real> dq;    // n x n
  Vector<Real> dtau;  // n
};

template <typename Real>
LeftEndpoint<Real> left_endpoint(const EvolvingMesh<Real>& mesh, std::size_t i, bool with_derivative) {
  const Knot<Real>& k = mesh.knots[i];
  const Transform& t = mesh.transforms[i];
  const Transform& own = mesh.transforms[owner(i)];
  const std::size_t n = k.u.size();
  LeftEndpoint<Real> out{map_state(t, k.u, k.t), {}, {}};
  if (!with_derivative) return out;
  if (own == t) {
    out.dq = Matrix<Real>::identity(n);
    out.dtau.assign(n, Real(0));
    return out;
  }
  const auto own_state = map_state(own, k.u, k.t);
  const Matrix<Real> d = map_state_jacobian(t, k.u) * unmap_state_jacobian(own, own_state.q);
  out.dq = Matrix<Real>(n, n);
  out.dtau.assign(n, Real(0));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) out.dq(r, c) = d(r, c);
  for (std::size_t c = 0; c < n; ++c) out.dtau[c] = d(n, c);
  return out;
}

template <typename Real>
struct ResidualEval {
  Vector<Real> r;
  Vector<Real> scale;  // per-row magnitude of the terms; 1 for boundary rows
  Real raw_norm{};
  Real scaled_norm{};
};

template <typename Real>
Real scaled_max(const Vector<Real>& r, const Vector<Real>& scale) {
  using std::abs;
  Real m = 0;
  for (std::size_t i = 0; i < r.size(); ++i) m = std::max(m, Real(abs(r[i]) / scale[i]));
  return m;
}

template <typename Real>
ResidualEval<Real> evaluate_residual(const SegmentedProblem<Real>& p, SystemCache<Real>& cache) {
  using std::abs;
  const auto& mesh = p.mesh;
  const std::size_t n = p.system.n;
  const std::size_t m = mesh.intervals();
  const Real tiny = std::numeric_limits<Real>::min();
  ResidualEval<Real> ev;
  ev.r.assign((m + 1) * n, Real(0));
  ev.scale.assign((m + 1) * n, Real(1));
  for (std::size_t i = 0; i < m; ++i) {
    const OdeSystem<Real>& sys = cache.get(mesh.transforms[i]);
    const auto left = left_endpoint(mesh, i, false).s;
    const auto right = map_state(mesh.transforms[i], mesh.knots[i + 1].u, mesh.knots[i + 1].t);
    const Real dtau = right.tau - left.tau;
    if (dtau == Real(0)) throw SingularStepError("zero natural step", i);
    const Vector<Real> gl = eval_rhs(sys, left.q, left.tau);
    const Vector<Real> gr = eval_rhs(sys, right.q, right.tau);
    const Real half = dtau / 2;
    for (std::size_t j = 0; j < n; ++j) {
      ev.r[i * n + j] = right.q[j] - left.q[j] - half * (gr[j] + gl[j]);
      ev.scale[i * n + j] = abs(right.q[j]) + abs(left.q[j]) + abs(half) * (abs(gr[j]) + abs(gl[j])) + tiny;
    }
  }
  const Vector<Real> g = eval_bc(p.bc, mesh.knots.front().u, mesh.knots.back().u);
  for (std::size_t j = 0; j < n; ++j) ev.r[m * n + j] = g[j];
  for (Side side : {Side::Left, Side::Right})
    if (const auto row = anchored_row(p, side)) {
      const Real t_end = side == Side::Left ? mesh.knots.front().t : mesh.knots.back().t;
      ev.r[m * n + row->row] = t_end - row->target;
    }
  ev.raw_norm = max_norm(ev.r);
  ev.scaled_norm = scaled_max(ev.r, ev.scale);
  return ev;
}

template <typename Real>
BlockSystem<Real> evaluate_jacobian(const SegmentedProblem<Real>& p, SystemCache<Real>& cache) {
  const auto& mesh = p.mesh;
  const std::size_t n = p.system.n;
  const std::size_t m = mesh.intervals();
  BlockSystem<Real> js;
  js.n = n;
  js.left.reserve(m);
  js.right.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const OdeSystem<Real>& sys = cache.get(mesh.transforms[i]);
    const auto left = left_endpoint(mesh, i, true);
    const auto right = map_state(mesh.transforms[i], mesh.knots[i + 1].u, mesh.knots[i + 1].t);
    const Real dtau = right.tau - left.s.tau;
    if (dtau == Real(0)) throw SingularStepError("zero natural step", i);
    const Real half = dtau / 2;
    const Vector<Real> gl = eval_rhs(sys, left.s.q, left.s.tau);
    const Vector<Real> gr = eval_rhs(sys, right.q, right.tau);
    const Matrix<Real> jl = eval_jacobian(sys, left.s.q, left.s.tau);
    const Matrix<Real> jr = eval_jacobian(sys, right.q, right.tau);

    Matrix<Real> B = Matrix<Real>::identity(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) B(r, c) -= half * jr(r, c);

    // dG_L/dx = G_q,L * dq + G_tau,L * dtau
    Matrix<Real> A(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        Real dg = jl(r, n) * left.dtau[c];
        for (std::size_t k = 0; k < n; ++k) dg += jl(r, k) * left.dq(k, c);
        A(r, c) = -left.dq(r, c) + (gr[r] + gl[r]) / 2 * left.dtau[c] - half * dg;
      }
    js.left.push_back(std::move(A));
    js.right.push_back(std::move(B));
  }

  const Transform& t0 = mesh.transforms.front();
  const Transform& tm = mesh.transforms.back();
  const auto s0 = map_state(t0, mesh.knots.front().u, mesh.knots.front().t);
  const auto sm = map_state(tm, mesh.knots.back().u, mesh.knots.back().t);
  const Matrix<Real> u0 = unmap_state_jacobian(t0, s0.q);
  const Matrix<Real> um = unmap_state_jacobian(tm, sm.q);
  const auto [ga, gb] = eval_bc_jacobian(p.bc, mesh.knots.front().u, mesh.knots.back().u);
  js.bc_left = Matrix<Real>(n, n);
  js.bc_right = Matrix<Real>(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t k = 0; k < n; ++k) {
        js.bc_left(r, c) += ga(r, k) * u0(k, c);
        js.bc_right(r, c) += gb(r, k) * um(k, c);
      }
  for (Side side : {Side::Left, Side::Right})
    if (const auto row = anchored_row(p, side)) {
      Matrix<Real>& target = side == Side::Left ? js.bc_left : js.bc_right;
      Matrix<Real>& other = side == Side::Left ? js.bc_right : js.bc_left;
      const Matrix<Real>& uj = side == Side::Left ? u0 : um;
      for (std::size_t c = 0; c < n; ++c) {
        target(row->row, c) = uj(n, c);
        other(row->row, c) = 0;
      }
    }
  return js;
}

/// Free coordinates of every knot, concatenated.
template <typename Real>
Vector<Real> free_coordinates(const EvolvingMesh<Real>& mesh, Vector<Real>& taus) {
  const std::size_t n = mesh.knots.front().u.size();
  Vector<Real> x(mesh.size() * n);
  taus.resize(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto s = map_state(mesh.transforms[owner(i)], mesh.knots[i].u, mesh.knots[i].t);
    std::copy(s.q.begin(), s.q.end(), x.begin() + static_cast<std::ptrdiff_t>(i * n));
    taus[i] = s.tau;
  }
  return x;
}

template <typename Real>
void set_free_coordinates(EvolvingMesh<Real>& mesh, const Vector<Real>& x, const Vector<Real>& taus) {
  const std::size_t n = mesh.knots.front().u.size();
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    NaturalState<Real> s{Vector<Real>(x.begin() + static_cast<std::ptrdiff_t>(i * n),
                                      x.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)),
                         taus[i]};
    mesh.knots[i] = unmap_state(mesh.transforms[owner(i)], s);
  }
}

}  // namespace detail

/// Checks dimensions, domain, transforms and the end-interval swap rule.
template <typename Real>
void validate(const SegmentedProblem<Real>& p) {
  if (p.system.n == 0 || !p.system.rhs) throw ConfigError("problem: empty system");
  if (p.bc.n != p.system.n || !p.bc.residual) throw ConfigError("problem: boundary conditions do not match system");
  if (!(p.a < p.b)) throw ConfigError("problem: need a < b");
  p.mesh.check();
  for (const auto& k : p.mesh.knots)
    if (k.u.size() != p.system.n) throw MeshError("knot dimension does not match system");
  for (const auto& t : p.mesh.transforms) t.validate(p.system.n);
  detail::anchored_row(p, Side::Left);
  detail::anchored_row(p, Side::Right);
}

/// Pins the end knots: the swapped component to its Dirichlet value on a
/// swapped end interval, t to the domain end otherwise.
template <typename Real>
void anchor_ends(SegmentedProblem<Real>& p) {
  for (Side side : {Side::Left, Side::Right}) {
    const Transform& t = side == Side::Left ? p.mesh.transforms.front() : p.mesh.transforms.back();
    Knot<Real>& knot = side == Side::Left ? p.mesh.knots.front() : p.mesh.knots.back();
    if (t.swap()) {
      const auto* pin = p.bc.find_pin(side, *t.swap());
      if (!pin) throw NonStationaryBoundary("swapped end interval without a Dirichlet pin");
      knot.u[*t.swap()] = pin->value;
    } else {
      knot.t = side == Side::Left ? p.a : p.b;
    }
  }
}

template <typename Real>
Vector<Real> assemble_residual(const SegmentedProblem<Real>& p) {
  validate(p);
  detail::SystemCache<Real> cache(p.system);
  return detail::evaluate_residual(p, cache).r;
}

template <typename Real>
BlockSystem<Real> assemble_jacobian(const SegmentedProblem<Real>& p) {
  validate(p);
  detail::SystemCache<Real> cache(p.system);
  return detail::evaluate_jacobian(p, cache);
}

/// Damped Newton iteration on the evolving mesh. Each sweep: normalize,
/// reassign transforms (hook), anchor the ends, refine, then one Newton
/// step with halving line search on max(raw, scaled) residual norm.
/// Converged when both the raw and the term-scaled residual max-norms are
/// at most tol.
template <typename Real>
Solution<Real> newton_solve(SegmentedProblem<Real> p, const NewtonConfig<Real>& cfg,
                            const std::optional<RefinementConfig<std::type_identity_t<Real>>>& rcfg = std::nullopt,
                            const TransformHook<std::type_identity_t<Real>>& hook = {}) {
  cfg.validate();
  if (rcfg) rcfg->validate();
  validate(p);
  detail::SystemCache<Real> cache(p.system);
  const Real merge = rcfg ? rcfg->h_min / Real(100) : Real(0);
  Solution<Real> sol;

  for (int iter = 0;; ++iter) {
    p.mesh = normalize(p.mesh, merge);
    if (hook) {
      p.mesh.transforms = hook(p.mesh, p.system);
      if (p.mesh.transforms.size() != p.mesh.intervals()) throw StrategyError("strategy returned wrong count");
    }
    validate(p);
    anchor_ends(p);
    if (rcfg) p.mesh = refine(p.mesh, p.system, *rcfg);

    const auto ev = detail::evaluate_residual(p, cache);
    IterationRecord<Real> rec{iter, p.mesh.size(), ev.raw_norm, ev.scaled_norm, Real(0), zone_summary(p.mesh.transforms)};
    if (ev.raw_norm <= cfg.tol && ev.scaled_norm <= cfg.tol) {
      sol.history.push_back(std::move(rec));
      sol.mesh = std::move(p.mesh);
      sol.iterations = iter;
      sol.residual_norm = ev.raw_norm;
      sol.scaled_residual_norm = ev.scaled_norm;
      return sol;
    }
    if (iter >= cfg.max_iters)
      throw NonConvergence("Newton iterations exhausted (residual " + std::to_string(double(ev.raw_norm)) + ")", iter);

    const BlockSystem<Real> jac = detail::evaluate_jacobian(p, cache);
    Vector<Real> rhs = ev.r;
    for (auto& v : rhs) v = -v;
    const Vector<Real> delta = solve_linear_block(jac, rhs);

    Vector<Real> taus;
    const Vector<Real> x = detail::free_coordinates(p.mesh, taus);
    const Real merit = std::max(ev.raw_norm, ev.scaled_norm);
    Real alpha = cfg.damping;
    bool accepted = false;
    SegmentedProblem<Real> trial = p;
    while (alpha >= cfg.min_damping) {
      Vector<Real> xt = x;
      for (std::size_t j = 0; j < xt.size(); ++j) xt[j] += alpha * delta[j];
      try {
        trial.mesh = p.mesh;
        detail::set_free_coordinates(trial.mesh, xt, taus);
        const auto et = detail::evaluate_residual(trial, cache);
        const Real mt = std::max(et.raw_norm, detail::scaled_max(et.r, ev.scale));
        if (is_finite(mt) && (mt < merit || !cfg.line_search)) {
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      } catch (const EvaluationError&) {
      } catch (const SingularStepError&) {
      }
      if (!cfg.line_search) break;
      alpha /= 2;
    }
    if (!accepted)
      throw NonConvergence(cfg.line_search ? "line search hit the damping floor" : "Newton step left the domain",
                           iter + 1);
    rec.step = alpha;
    sol.history.push_back(std::move(rec));
    p.mesh = std::move(trial.mesh);
  }
}

}  // namespace stiffbvp
