#pragma once

// Per-interval transform selection: the generic stiffness rule and the two
// zone strategies for the Troesch problem.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stiffbvp/errors.hpp"
#include "stiffbvp/mesh.hpp"
#include "stiffbvp/ode_system.hpp"
#include "stiffbvp/scalar.hpp"
#include "stiffbvp/trapezoidal_solver.hpp"
#include "stiffbvp/transform.hpp"

namespace stiffbvp {

template <typename Real>
struct StiffnessConfig {
  Real theta = Real(10);
  Real alpha = Real(1) / Real(2);
  Real beta = Real(1) / Real(2);

  void validate() const {
    using std::abs;
    if (!(theta > Real(1))) throw ConfigError("stiffness: theta must exceed 1");
    if (!(alpha >= Real(0) && beta >= Real(0))) throw ConfigError("stiffness: weights must be non-negative");
    if (abs(alpha + beta - Real(1)) > Real(64) * machine_epsilon<Real>())
      throw ConfigError("stiffness: alpha + beta must equal 1");
  }
};

enum class StrategyKind { Identity, Auto, TroeschSp1Fp2, TroeschSp2Sp1Fp2 };

/// "identity" | "auto" | "troesch-sp1fp2" | "troesch-sp2-sp1fp2"
StrategyKind parse_strategy(std::string_view text);
std::string to_string(StrategyKind kind);

template <typename Real>
struct Strategy {
  StrategyKind kind = StrategyKind::Identity;
  StiffnessConfig<Real> stiffness;
};

template <typename Real>
Real stiffness_measure(const Vector<Real>& f_left, const Vector<Real>& f_right, const StiffnessConfig<Real>& cfg) {
  if (f_left.size() != f_right.size()) throw ConfigError("stiffness_measure: length mismatch");
  return cfg.alpha * max_norm(f_left) + cfg.beta * max_norm(f_right);
}

/// argmax over `allowed` of alpha|F_left,i| + beta|F_right,i|; smallest index on ties.
template <typename Real>
std::optional<std::size_t> select_swap_index(const Vector<Real>& f_left, const Vector<Real>& f_right,
                                             const StiffnessConfig<Real>& cfg,
                                             const std::vector<std::size_t>& allowed) {
  using std::abs;
  std::optional<std::size_t> best;
  Real best_value{};
  for (auto i : allowed) {
    if (i >= f_left.size() || i >= f_right.size()) throw ConfigError("select_swap_index: index out of range");
    const Real v = cfg.alpha * abs(f_left[i]) + cfg.beta * abs(f_right[i]);
    if (!best || v > best_value || (v == best_value && i < *best)) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

template <typename Real>
std::vector<std::size_t> select_flips(const Vector<Real>& u_left, const Vector<Real>& u_right,
                                      const Real& post_swap_measure, const StiffnessConfig<Real>& cfg,
                                      const std::vector<std::size_t>& excluded) {
  using std::abs;
  std::vector<std::size_t> out;
  if (post_swap_measure < cfg.theta) return out;
  for (std::size_t l = 0; l < u_left.size(); ++l) {
    if (std::find(excluded.begin(), excluded.end(), l) != excluded.end()) continue;
    if (std::min(abs(u_left[l]), abs(u_right[l])) > Real(1)) out.push_back(l);
  }
  return out;
}

namespace detail {

template <typename Real>
Vector<Real> swapped_rhs(const Vector<Real>& f, std::size_t k) {
  Vector<Real> g(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) g[j] = j == k ? Real(1) / f[k] : f[j] / f[k];
  return g;
}

template <typename Real>
std::vector<Transform> assign_auto(const EvolvingMesh<Real>& mesh, const OdeSystem<Real>& system,
                                   const BoundaryConditions<Real>* bc, const StiffnessConfig<Real>& cfg) {
  const std::size_t m = mesh.intervals();
  const std::size_t n = system.n;
  std::vector<Vector<Real>> f;
  f.reserve(mesh.size());
  for (const auto& k : mesh.knots) f.push_back(eval_rhs(system, k.u, k.t));

  std::vector<Transform> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& fl = f[i];
    const auto& fr = f[i + 1];
    const auto& ul = mesh.knots[i].u;
    const auto& ur = mesh.knots[i + 1].u;
    const Real measure = stiffness_measure(fl, fr, cfg);
    if (measure < cfg.theta) continue;

    std::vector<std::size_t> allowed;
    for (std::size_t k = 0; k < n; ++k) {
      if (ul[k] == ur[k] || fl[k] == Real(0) || fr[k] == Real(0)) continue;
      const bool left_end = i == 0;
      const bool right_end = i + 1 == m;
      if (left_end && !(bc && bc->find_pin(Side::Left, k))) continue;
      if (right_end && !(bc && bc->find_pin(Side::Right, k))) continue;
      allowed.push_back(k);
    }
    const auto k = select_swap_index(fl, fr, cfg, allowed);
    Real post = measure;
    std::vector<std::size_t> excluded;
    if (k) {
      post = stiffness_measure(swapped_rhs(fl, *k), swapped_rhs(fr, *k), cfg);
      excluded.push_back(*k);
    }
    out[i] = Transform(k, select_flips(ul, ur, post, cfg, excluded));
  }
  return out;
}

template <typename Real>
Real troesch_lambda(const OdeSystem<Real>& system) {
  if (system.n != 2) throw StrategyError("Troesch strategies need a two-dimensional system");
  const auto it = system.params.find("lambda");
  if (it == system.params.end()) throw StrategyError("Troesch strategies need a 'lambda' parameter");
  return it->second;
}

/// True when component c strictly increases over knots [from, to].
template <typename Real>
bool strictly_increasing(const EvolvingMesh<Real>& mesh, std::size_t c, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i)
    if (!(mesh.knots[i + 1].u[c] > mesh.knots[i].u[c])) return false;
  return true;
}

template <typename Real>
bool positive_on(const EvolvingMesh<Real>& mesh, std::size_t c, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i <= to; ++i)
    if (!(mesh.knots[i].u[c] > Real(0))) return false;
  return true;
}

inline Transform sp1fp2() { return Transform(std::size_t{0}, {std::size_t{1}}); }
inline Transform sp2() { return Transform::swap_only(1); }

/// Identity on knots [0, j), SP1.FP2 from knot j on; all identity when the
/// swap zone is degenerate (u1 not strictly increasing or u2 not positive).
template <typename Real>
std::vector<Transform> tail_sp1fp2(const EvolvingMesh<Real>& mesh, std::size_t j) {
  const std::size_t m = mesh.intervals();
  std::vector<Transform> out(m);
  if (j >= m) return out;
  if (!strictly_increasing(mesh, 0, j, m) || !positive_on(mesh, 1, j, m)) return out;
  for (std::size_t i = j; i < m; ++i) out[i] = sp1fp2();
  return out;
}

template <typename Real>
std::vector<Transform> assign_troesch_sp1fp2(const EvolvingMesh<Real>& mesh, const OdeSystem<Real>& system) {
  troesch_lambda(system);
  std::size_t j = 0;
  while (j < mesh.size() && !(mesh.knots[j].u[1] > Real(1))) ++j;
  return tail_sp1fp2(mesh, j);
}

template <typename Real>
std::vector<Transform> assign_troesch_sp2_sp1fp2(const EvolvingMesh<Real>& mesh, const OdeSystem<Real>& system) {
  using std::sinh;
  const Real lambda = troesch_lambda(system);
  const std::size_t m = mesh.intervals();
  auto f2 = [&](std::size_t i) { return lambda * sinh(lambda * mesh.knots[i].u[0]); };
  auto cube = [&](std::size_t i) {
    const Real u2 = mesh.knots[i].u[1];
    return u2 * u2 * u2;
  };
  std::size_t j1 = 0;
  while (j1 < mesh.size() && !(f2(j1) > Real(1))) ++j1;
  if (j1 >= m) return std::vector<Transform>(m);
  // the second matching point is searched from the first one on
  std::size_t j2 = j1;
  while (j2 < mesh.size() && !(f2(j2) < cube(j2))) ++j2;
  // SP2 cannot reach t = 1: u2(1) is not prescribed
  if (j2 >= m) j2 = m - 1;

  std::vector<Transform> out = tail_sp1fp2(mesh, j2);
  if (out.back().is_identity()) return std::vector<Transform>(m);
  if (j2 > j1 && strictly_increasing(mesh, 1, j1, j2) && positive_on(mesh, 0, j1, j2))
    for (std::size_t i = j1; i < j2; ++i) out[i] = sp2();
  return out;
}

}  // namespace detail

/// Transforms for every interval of `mesh`. `bc` is consulted by the Auto
/// rule to allow swaps of pinned components on the end intervals.
template <typename Real>
std::vector<Transform> assign_transforms(const EvolvingMesh<Real>& mesh, const OdeSystem<Real>& system,
                                         const Strategy<Real>& strategy,
                                         const BoundaryConditions<Real>* bc = nullptr) {
  mesh.check();
  switch (strategy.kind) {
    case StrategyKind::Identity:
      return std::vector<Transform>(mesh.intervals());
    case StrategyKind::Auto:
      strategy.stiffness.validate();
      return detail::assign_auto(mesh, system, bc, strategy.stiffness);
    case StrategyKind::TroeschSp1Fp2:
      return detail::assign_troesch_sp1fp2(mesh, system);
    case StrategyKind::TroeschSp2Sp1Fp2:
      return detail::assign_troesch_sp2_sp1fp2(mesh, system);
  }
  throw StrategyError("unknown strategy");
}

/// Hook for newton_solve that reassigns transforms every sweep.
template <typename Real>
TransformHook<Real> strategy_hook(Strategy<Real> strategy, std::optional<BoundaryConditions<Real>> bc = std::nullopt) {
  return [strategy, bc](const EvolvingMesh<Real>& mesh, const OdeSystem<Real>& system) {
    return assign_transforms(mesh, system, strategy, bc ? &*bc : nullptr);
  };
}

enum class StopCriterion { None, Accuracy, Convergence };

std::string to_string(StopCriterion stop);
StopCriterion parse_stop(std::string_view text);

/// Convergence when the solve failed; Accuracy when either relative error
/// has reached 1.
template <typename Real>
StopCriterion classify_stop(bool solve_failed, const std::optional<std::pair<Real, Real>>& relative_errors) {
  if (solve_failed) return StopCriterion::Convergence;
  if (relative_errors) {
    const auto& [e0, e1] = *relative_errors;
    if (!(e0 < Real(1)) || !(e1 < Real(1))) return StopCriterion::Accuracy;
  }
  return StopCriterion::None;
}

}  // namespace stiffbvp
