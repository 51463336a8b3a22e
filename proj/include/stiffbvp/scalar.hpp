#pragma once

// Real-scalar abstraction. Everything numeric in the library is a template
// over `Real`; any type with std::numeric_limits and ADL-visible elementary
// functions works (double, long double, boost::multiprecision numbers with
// expression templates turned off).

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace stiffbvp {

template <typename Real>
using Vector = std::vector<Real>;

template <typename Real>
using ParamMap = std::map<std::string, Real, std::less<>>;

template <typename Real>
Real machine_epsilon() {
  return std::numeric_limits<Real>::epsilon();
}

template <typename Real>
bool is_finite(const Real& x) {
  using std::isfinite;
  return isfinite(x);
}

template <typename Real>
Real max_norm(const Vector<Real>& v) {
  using std::abs;
  Real m = 0;
  for (const auto& x : v) {
    const Real a = abs(x);
    if (a > m) m = a;
  }
  return m;
}

/// A point of the evolving mesh: dependent variables `u` at abscissa `t`.
template <typename Real>
struct Knot {
  Vector<Real> u;
  Real t{};

  bool operator==(const Knot&) const = default;
};

}  // namespace stiffbvp
