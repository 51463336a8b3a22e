#pragma once

// Swap and flip changes of variables.
//
// A k-swap exchanges the dependent variable u_k with the independent
// variable t: the new system v'(s) = G(v, s) has G_j = F_j / F_k for j != k
// and G_k = 1 / F_k, evaluated at u = v with u_k = s and t = v_k.
// An l-flip replaces u_l by its reciprocal w_l = 1 / u_l: H_i = F_i for
// i != l and H_l = -F_l w_l^2, evaluated at u_l = 1 / w_l.
//
// Indices are zero-based in the API; the text form ("SP1.FP2") is one-based.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stiffbvp/errors.hpp"
#include "stiffbvp/linalg.hpp"
#include "stiffbvp/ode_system.hpp"
#include "stiffbvp/scalar.hpp"

namespace stiffbvp {

/// At most one swap plus a set of flips; the swap index is never flipped.
class Transform {
 public:
  Transform() = default;
  Transform(std::optional<std::size_t> swap, std::vector<std::size_t> flips) : swap_(swap), flips_(std::move(flips)) {
    std::sort(flips_.begin(), flips_.end());
    flips_.erase(std::unique(flips_.begin(), flips_.end()), flips_.end());
    if (swap_ && std::binary_search(flips_.begin(), flips_.end(), *swap_))
      throw ConfigError("a transform cannot swap and flip the same component");
  }

  static Transform identity() { return {}; }
  static Transform swap_only(std::size_t k) { return Transform(k, {}); }

  const std::optional<std::size_t>& swap() const noexcept { return swap_; }
  const std::vector<std::size_t>& flips() const noexcept { return flips_; }
  bool is_identity() const noexcept { return !swap_ && flips_.empty(); }
  bool flips_component(std::size_t l) const { return std::binary_search(flips_.begin(), flips_.end(), l); }

  /// Throws ConfigError unless every index is below n.
  void validate(std::size_t n) const {
    if (swap_ && *swap_ >= n) throw ConfigError("swap index out of range");
    for (auto l : flips_)
      if (l >= n) throw ConfigError("flip index out of range");
  }

  bool operator==(const Transform&) const = default;

 private:
  std::optional<std::size_t> swap_;
  std::vector<std::size_t> flips_;
};

/// "I" | ("SP"k)? (".FP"l)*, one-based indices.
std::string to_string(const Transform& transform);
/// Inverse of to_string; throws ConfigError on malformed text.
Transform parse_transform(std::string_view text);

template <typename Real>
OdeSystem<Real> swap_system(const OdeSystem<Real>& system, std::size_t k) {
  if (k >= system.n) throw ConfigError("swap index out of range");
  const std::size_t n = system.n;
  OdeSystem<Real> out;
  out.n = n;
  out.params = system.params;

  auto inner = system.rhs;
  auto original_args = [k](const Vector<Real>& v, const Real& s, Real& t) {
    Vector<Real> u = v;
    u[k] = s;
    t = v[k];
    return u;
  };
  out.rhs = [inner, original_args, k](const Vector<Real>& v, const Real& s, const ParamMap<Real>& p) {
    Real t;
    const Vector<Real> u = original_args(v, s, t);
    Vector<Real> f = inner(u, t, p);
    const Real fk = f[k];
    if (fk == Real(0) || !is_finite(fk)) throw EvaluationError("swap: F_k is zero or non-finite", k);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = j == k ? Real(1) / fk : f[j] / fk;
    return f;
  };

  if (system.has_jacobian()) {
    auto inner_jac = system.jac;
    out.jac = [inner, inner_jac, original_args, k, n](const Vector<Real>& v, const Real& s,
                                                     const ParamMap<Real>& p) {
      Real t;
      const Vector<Real> u = original_args(v, s, t);
      const Vector<Real> f = inner(u, t, p);
      const Matrix<Real> jf = inner_jac(u, t, p);
      const Real fk = f[k];
      if (fk == Real(0) || !is_finite(fk)) throw EvaluationError("swap: F_k is zero or non-finite", k);
      // column of the original Jacobian that feeds new variable z
      auto source = [k, n](std::size_t z) { return z == k ? n : (z == n ? k : z); };
      Matrix<Real> jg(n, n + 1);
      for (std::size_t z = 0; z <= n; ++z) {
        const std::size_t c = source(z);
        const Real dfk = jf(k, c);
        for (std::size_t j = 0; j < n; ++j) {
          if (j == k)
            jg(j, z) = -dfk / (fk * fk);
          else
            jg(j, z) = (jf(j, c) - (f[j] / fk) * dfk) / fk;
        }
      }
      return jg;
    };
  }
  return out;
}

template <typename Real>
OdeSystem<Real> flip_system(const OdeSystem<Real>& system, std::size_t l) {
  if (l >= system.n) throw ConfigError("flip index out of range");
  const std::size_t n = system.n;
  OdeSystem<Real> out;
  out.n = n;
  out.params = system.params;

  auto inner = system.rhs;
  auto original_args = [l](const Vector<Real>& w) {
    if (w[l] == Real(0)) throw EvaluationError("flip: reciprocal of zero", l);
    Vector<Real> u = w;
    u[l] = Real(1) / w[l];
    return u;
  };
  out.rhs = [inner, original_args, l](const Vector<Real>& w, const Real& t, const ParamMap<Real>& p) {
    Vector<Real> f = inner(original_args(w), t, p);
    f[l] = -f[l] * w[l] * w[l];
    return f;
  };

  if (system.has_jacobian()) {
    auto inner_jac = system.jac;
    out.jac = [inner, inner_jac, original_args, l, n](const Vector<Real>& w, const Real& t,
                                                     const ParamMap<Real>& p) {
      const Vector<Real> u = original_args(w);
      const Vector<Real> f = inner(u, t, p);
      Matrix<Real> jh = inner_jac(u, t, p);
      const Real du_dw = -u[l] * u[l];
      for (std::size_t i = 0; i < n; ++i) {
        if (i == l) continue;
        jh(i, l) *= du_dw;
      }
      const Real w2 = w[l] * w[l];
      const Real jll = jh(l, l);
      for (std::size_t j = 0; j <= n; ++j) jh(l, j) = -jh(l, j) * w2;
      jh(l, l) = jll - 2 * f[l] * w[l];
      return jh;
    };
  }
  return out;
}

/// The transformed system: all flips, then the swap.
template <typename Real>
OdeSystem<Real> apply(const Transform& transform, const OdeSystem<Real>& system) {
  transform.validate(system.n);
  OdeSystem<Real> out = system;
  for (auto l : transform.flips()) out = flip_system(out, l);
  if (transform.swap()) out = swap_system(out, *transform.swap());
  return out;
}

/// State expressed in a transform's own variables.
template <typename Real>
struct NaturalState {
  Vector<Real> q;
  Real tau{};
};

template <typename Real>
NaturalState<Real> map_state(const Transform& transform, const Vector<Real>& u, const Real& t) {
  NaturalState<Real> s{u, t};
  for (auto l : transform.flips()) {
    if (u[l] == Real(0)) throw DomainError("cannot flip a zero component " + std::to_string(l + 1));
    s.q[l] = Real(1) / u[l];
  }
  if (const auto& k = transform.swap()) {
    s.q[*k] = t;
    s.tau = u[*k];
  }
  return s;
}

template <typename Real>
Knot<Real> unmap_state(const Transform& transform, const NaturalState<Real>& s) {
  Knot<Real> knot{s.q, s.tau};
  for (auto l : transform.flips()) {
    if (s.q[l] == Real(0)) throw DomainError("cannot unflip a zero component " + std::to_string(l + 1));
    knot.u[l] = Real(1) / s.q[l];
  }
  if (const auto& k = transform.swap()) {
    knot.t = s.q[*k];
    knot.u[*k] = s.tau;
  }
  return knot;
}

/// d(q, tau)/d(u, t), (n+1) x (n+1); the last row/column is tau/t.
template <typename Real>
Matrix<Real> map_state_jacobian(const Transform& transform, const Vector<Real>& u) {
  const std::size_t n = u.size();
  Matrix<Real> d = Matrix<Real>::identity(n + 1);
  for (auto l : transform.flips()) d(l, l) = -Real(1) / (u[l] * u[l]);
  if (const auto& k = transform.swap()) {
    d(*k, *k) = 0;
    d(*k, n) = 1;
    d(n, n) = 0;
    d(n, *k) = 1;
  }
  return d;
}

/// d(u, t)/d(q, tau), (n+1) x (n+1).
template <typename Real>
Matrix<Real> unmap_state_jacobian(const Transform& transform, const Vector<Real>& q) {
  const std::size_t n = q.size();
  Matrix<Real> d = Matrix<Real>::identity(n + 1);
  for (auto l : transform.flips()) d(l, l) = -Real(1) / (q[l] * q[l]);
  if (const auto& k = transform.swap()) {
    d(*k, *k) = 0;
    d(*k, n) = 1;
    d(n, n) = 0;
    d(n, *k) = 1;
  }
  return d;
}

}  // namespace stiffbvp
