#pragma once

// Newton linear systems of the trapezoidal scheme.
//
// Unknowns x_0..x_m (n each). Rows: m interval blocks
//     A_i x_i + B_i x_{i+1} = r_i,
// followed by the n boundary rows
//     C x_0 + D x_m = r_bc.
//
// Elimination marches left to right keeping a relation E x_0 + F x_i = g and
// removing x_i with partial pivoting over the 2n rows that contain it; the
// final 2n x 2n system in (x_0, x_m) is solved densely and the interior
// unknowns are recovered by back substitution.

#include <cmath>
#include <cstddef>
#include <vector>

#include "stiffbvp/errors.hpp"
#include "stiffbvp/linalg.hpp"
#include "stiffbvp/scalar.hpp"

namespace stiffbvp {

template <typename Real>
struct BlockSystem {
  std::size_t n = 0;
  std::vector<Matrix<Real>> left;   // A_i
  std::vector<Matrix<Real>> right;  // B_i
  Matrix<Real> bc_left;             // C
  Matrix<Real> bc_right;            // D

  std::size_t intervals() const noexcept { return left.size(); }
  std::size_t dimension() const noexcept { return (left.size() + 1) * n; }

  Matrix<Real> to_dense() const {
    const std::size_t m = intervals();
    Matrix<Real> d(dimension(), dimension());
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
          d(i * n + r, i * n + c) += left[i](r, c);
          d(i * n + r, (i + 1) * n + c) += right[i](r, c);
        }
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        d(m * n + r, c) += bc_left(r, c);
        d(m * n + r, m * n + c) += bc_right(r, c);
      }
    return d;
  }

  Vector<Real> multiply(const Vector<Real>& x) const {
    const std::size_t m = intervals();
    Vector<Real> y(dimension(), Real(0));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
          y[i * n + r] += left[i](r, c) * x[i * n + c] + right[i](r, c) * x[(i + 1) * n + c];
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) y[m * n + r] += bc_left(r, c) * x[c] + bc_right(r, c) * x[m * n + c];
    return y;
  }
};

template <typename Real>
Vector<Real> solve_linear_block(const BlockSystem<Real>& sys, const Vector<Real>& rhs) {
  using std::abs;
  const std::size_t n = sys.n;
  const std::size_t m = sys.intervals();
  if (m == 0 || rhs.size() != sys.dimension()) throw ConfigError("solve_linear_block: size mismatch");

  // Stored rows for back substitution: U x_i + V x_0 + W x_{i+1} = z.
  struct Eliminated {
    Matrix<Real> U, V, W;
    Vector<Real> z;
  };
  std::vector<Eliminated> stored;
  stored.reserve(m > 1 ? m - 1 : 0);

  Matrix<Real> E = sys.left[0];
  Matrix<Real> F = sys.right[0];
  Vector<Real> g(rhs.begin(), rhs.begin() + static_cast<std::ptrdiff_t>(n));

  for (std::size_t i = 1; i < m; ++i) {
    // columns: [x_i (n) | x_0 (n) | x_{i+1} (n) | rhs]
    const std::size_t cols = 3 * n + 1;
    Matrix<Real> w(2 * n, cols);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        w(r, c) = F(r, c);
        w(r, n + c) = E(r, c);
        w(n + r, c) = sys.left[i](r, c);
        w(n + r, 2 * n + c) = sys.right[i](r, c);
      }
      w(r, 3 * n) = g[r];
      w(n + r, 3 * n) = rhs[i * n + r];
    }
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t p = c;
      Real best = abs(w(c, c));
      for (std::size_t r = c + 1; r < 2 * n; ++r)
        if (abs(w(r, c)) > best) {
          best = abs(w(r, c));
          p = r;
        }
      if (best == Real(0) || !is_finite(best)) throw SingularLinearSystem("singular block while eliminating knot " + std::to_string(i), i * n + c);
      w.swap_rows(c, p);
      for (std::size_t r = c + 1; r < 2 * n; ++r) {
        const Real f = w(r, c) / w(c, c);
        if (f == Real(0)) continue;
        for (std::size_t k = c; k < cols; ++k) w(r, k) -= f * w(c, k);
      }
    }
    Eliminated e{Matrix<Real>(n, n), Matrix<Real>(n, n), Matrix<Real>(n, n), Vector<Real>(n)};
    Matrix<Real> E2(n, n), F2(n, n);
    Vector<Real> g2(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        e.U(r, c) = w(r, c);
        e.V(r, c) = w(r, n + c);
        e.W(r, c) = w(r, 2 * n + c);
        E2(r, c) = w(n + r, n + c);
        F2(r, c) = w(n + r, 2 * n + c);
      }
      e.z[r] = w(r, 3 * n);
      g2[r] = w(n + r, 3 * n);
    }
    stored.push_back(std::move(e));
    E = std::move(E2);
    F = std::move(F2);
    g = std::move(g2);
  }

  // [E F; C D] [x_0; x_m] = [g; r_bc]
  Matrix<Real> cond(2 * n, 2 * n);
  Vector<Real> cb(2 * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      cond(r, c) = E(r, c);
      cond(r, n + c) = F(r, c);
      cond(n + r, c) = sys.bc_left(r, c);
      cond(n + r, n + c) = sys.bc_right(r, c);
    }
    cb[r] = g[r];
    cb[n + r] = rhs[m * n + r];
  }
  Vector<Real> ends;
  try {
    ends = DenseLu<Real>(cond).solve(cb);
  } catch (const SingularLinearSystem& e) {
    // condensed unknowns are (x_0, x_m)
    const std::size_t p = e.pivot();
    throw SingularLinearSystem("singular condensed boundary system", p < n ? p : m * n + (p - n));
  }

  Vector<Real> x(sys.dimension());
  for (std::size_t c = 0; c < n; ++c) {
    x[c] = ends[c];
    x[m * n + c] = ends[n + c];
  }
  for (std::size_t i = m - 1; i >= 1; --i) {
    const auto& e = stored[i - 1];
    for (std::size_t rr = n; rr-- > 0;) {
      Real s = e.z[rr];
      for (std::size_t c = 0; c < n; ++c) s -= e.V(rr, c) * x[c] + e.W(rr, c) * x[(i + 1) * n + c];
      for (std::size_t c = rr + 1; c < n; ++c) s -= e.U(rr, c) * x[i * n + c];
      x[i * n + rr] = s / e.U(rr, rr);
    }
  }
  return x;
}

}  // namespace stiffbvp
