#pragma once

// Evolving mesh of (u, t) knots with one transform per interval, plus the
// repair (sort/decimate) and refinement steps applied between Newton
// iterations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "stiffbvp/errors.hpp"
#include "stiffbvp/ode_system.hpp"
#include "stiffbvp/scalar.hpp"
#include "stiffbvp/transform.hpp"

namespace stiffbvp {

template <typename Real>
struct EvolvingMesh {
  std::vector<Knot<Real>> knots;
  std::vector<Transform> transforms;  // transforms[i] governs [knots[i], knots[i+1]]

  std::size_t size() const noexcept { return knots.size(); }
  std::size_t intervals() const noexcept { return knots.empty() ? 0 : knots.size() - 1; }

  void check() const {
    if (knots.size() < 2) throw MeshError("mesh needs at least two knots");
    if (transforms.size() != knots.size() - 1) throw MeshError("one transform per interval expected");
  }
};

template <typename Real>
struct RefinementConfig {
  Real M{};
  Real h_min{};
  Real h_max{};
  std::size_t max_knots = 10'000'000;

  void validate() const {
    if (!(M > Real(0))) throw ConfigError("refinement: M must be positive");
    if (!(h_min > Real(0))) throw ConfigError("refinement: h_min must be positive");
    if (!(h_max >= h_min)) throw ConfigError("refinement: h_max must not be below h_min");
  }
};

/// Dirichlet data used to build the straight-line initial guess.
template <typename Real>
struct EndpointValues {
  std::size_t n = 1;
  std::size_t component = 0;  // component interpolated between left and right
  Real left{};
  Real right{};
  std::vector<std::size_t> slope_components;  // set to the constant slope
};

template <typename Real>
EvolvingMesh<Real> init_linear(Real a, Real b, std::size_t m, const EndpointValues<Real>& values) {
  if (m < 2) throw ConfigError("init_linear: need at least two intervals");
  if (!(a < b)) throw ConfigError("init_linear: need a < b");
  if (values.component >= values.n) throw ConfigError("init_linear: component out of range");
  const Real slope = (values.right - values.left) / (b - a);
  EvolvingMesh<Real> mesh;
  mesh.knots.reserve(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    const Real t = i == m ? b : a + (b - a) * Real(i) / Real(m);
    Knot<Real> k{Vector<Real>(values.n, Real(0)), t};
    k.u[values.component] = i == m ? values.right : values.left + slope * (t - a);
    for (auto c : values.slope_components) k.u.at(c) = slope;
    mesh.knots.push_back(std::move(k));
  }
  mesh.transforms.assign(m, Transform::identity());
  return mesh;
}

/// Independent variable of a knot in the given transform's variables.
template <typename Real>
Real natural_abscissa(const Transform& transform, const Knot<Real>& knot) {
  return transform.swap() ? knot.u[*transform.swap()] : knot.t;
}

template <typename Real>
Real natural_step(const Transform& transform, const Knot<Real>& left, const Knot<Real>& right) {
  using std::abs;
  return abs(natural_abscissa(transform, right) - natural_abscissa(transform, left));
}

template <typename Real>
Knot<Real> interpolate(const Knot<Real>& a, const Knot<Real>& b, const Real& theta) {
  Knot<Real> k{a.u, a.t + theta * (b.t - a.t)};
  for (std::size_t i = 0; i < k.u.size(); ++i) k.u[i] = a.u[i] + theta * (b.u[i] - a.u[i]);
  return k;
}

/// Sorts knots by t and merges knots whose natural step is below
/// `merge_threshold` (or zero) or whose t does not strictly increase. The
/// first and last knots always survive.
template <typename Real>
EvolvingMesh<Real> normalize(const EvolvingMesh<Real>& mesh, const Real& merge_threshold) {
  mesh.check();
  const std::size_t count = mesh.size();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return mesh.knots[i].t < mesh.knots[j].t; });

  auto transform_after = [&](std::size_t original) -> const Transform& {
    return mesh.transforms[std::min(original, count - 2)];
  };
  auto too_close = [&](std::size_t kept, std::size_t candidate) {
    const auto& a = mesh.knots[kept];
    const auto& b = mesh.knots[candidate];
    if (!(b.t > a.t)) return true;
    const Real step = natural_step(transform_after(kept), a, b);
    return step == Real(0) || step < merge_threshold;
  };

  std::vector<std::size_t> kept{order.front()};
  for (std::size_t j = 1; j < count; ++j) {
    const std::size_t cand = order[j];
    if (j + 1 < count) {
      if (!too_close(kept.back(), cand)) kept.push_back(cand);
      continue;
    }
    while (kept.size() > 1 && too_close(kept.back(), cand)) kept.pop_back();
    kept.push_back(cand);
  }
  if (kept.size() < 3) throw MeshError("fewer than three knots survive normalization");

  EvolvingMesh<Real> out;
  out.knots.reserve(kept.size());
  for (auto i : kept) out.knots.push_back(mesh.knots[i]);
  for (std::size_t i = 0; i + 1 < kept.size(); ++i) out.transforms.push_back(transform_after(kept[i]));
  return out;
}

/// Inserts knots (linear interpolation in (u, t)) until every interval has a
/// natural step of at most h_max and either
///   ||T(F)(right) - T(F)(left)||_inf < 2M
/// or a natural step too short to bisect without going below h_min.
template <typename Real>
EvolvingMesh<Real> refine(const EvolvingMesh<Real>& mesh, const OdeSystem<Real>& system,
                          const RefinementConfig<Real>& cfg) {
  using std::ceil;
  mesh.check();
  cfg.validate();
  // absorbs rounding in steps produced by a + i * h
  const Real slack = Real(1000) * machine_epsilon<Real>();
  const Real upper = cfg.h_max * (Real(1) + slack);
  const Real bisect_from = Real(2) * cfg.h_min * (Real(1) - slack);

  std::vector<std::pair<Transform, OdeSystem<Real>>> cache;
  auto system_for = [&](const Transform& t) -> const OdeSystem<Real>& {
    for (const auto& [key, sys] : cache)
      if (key == t) return sys;
    cache.emplace_back(t, apply(t, system));
    return cache.back().second;
  };

  EvolvingMesh<Real> out;
  out.knots.push_back(mesh.knots.front());
  auto emit = [&](const Knot<Real>& k, const Transform& t) {
    if (out.knots.size() >= cfg.max_knots) throw RefinementError("refinement exceeded the knot cap");
    out.knots.push_back(k);
    out.transforms.push_back(t);
  };

  struct Segment {
    Knot<Real> left, right;
  };
  for (std::size_t i = 0; i < mesh.intervals(); ++i) {
    const Transform& transform = mesh.transforms[i];
    const OdeSystem<Real>& tsys = system_for(transform);
    auto rhs_at = [&](const Knot<Real>& k) {
      const auto s = map_state(transform, k.u, k.t);
      return eval_rhs(tsys, s.q, s.tau);
    };

    // depth-first, right half pushed first so knots come out in order
    std::vector<Segment> stack{{mesh.knots[i], mesh.knots[i + 1]}};
    while (!stack.empty()) {
      Segment seg = std::move(stack.back());
      stack.pop_back();
      const Real step = natural_step(transform, seg.left, seg.right);
      if (step > upper) {
        const auto pieces = static_cast<std::size_t>(ceil(step / cfg.h_max - slack));
        for (std::size_t p = pieces; p-- > 0;) {
          const Real lo = Real(p) / Real(pieces);
          const Real hi = Real(p + 1) / Real(pieces);
          stack.push_back({p == 0 ? seg.left : interpolate(seg.left, seg.right, lo),
                           p + 1 == pieces ? seg.right : interpolate(seg.left, seg.right, hi)});
        }
        continue;
      }
      if (step >= bisect_from) {
        const Vector<Real> fl = rhs_at(seg.left);
        const Vector<Real> fr = rhs_at(seg.right);
        Vector<Real> diff(fl.size());
        for (std::size_t j = 0; j < fl.size(); ++j) diff[j] = fr[j] - fl[j];
        if (!(max_norm(diff) < Real(2) * cfg.M)) {
          Knot<Real> mid = interpolate(seg.left, seg.right, Real(1) / Real(2));
          stack.push_back({mid, seg.right});
          stack.push_back({seg.left, std::move(mid)});
          continue;
        }
      }
      emit(seg.right, transform);
    }
  }
  return out;
}

/// Splits every interval into `factor` equal pieces.
template <typename Real>
EvolvingMesh<Real> subdivide(const EvolvingMesh<Real>& mesh, std::size_t factor) {
  mesh.check();
  if (factor == 0) throw ConfigError("subdivide: factor must be positive");
  EvolvingMesh<Real> out;
  out.knots.push_back(mesh.knots.front());
  for (std::size_t i = 0; i < mesh.intervals(); ++i) {
    for (std::size_t p = 1; p <= factor; ++p) {
      out.knots.push_back(p == factor ? mesh.knots[i + 1]
                                      : interpolate(mesh.knots[i], mesh.knots[i + 1], Real(p) / Real(factor)));
      out.transforms.push_back(mesh.transforms[i]);
    }
  }
  return out;
}

}  // namespace stiffbvp
