#pragma once

// Small dense matrices. The systems handled here are n x n with n the ODE
// dimension, so a plain row-major buffer is all that is needed.

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <utility>
#include <vector>

#include "stiffbvp/errors.hpp"
#include "stiffbvp/scalar.hpp"

namespace stiffbvp {

template <typename Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Real(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Real& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  const Real& operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(a, c), (*this)(b, c));
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

template <typename Real>
Matrix<Real> operator*(const Matrix<Real>& a, const Matrix<Real>& b) {
  assert(a.cols() == b.rows());
  Matrix<Real> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Real aik = a(i, k);
      if (aik == Real(0)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

template <typename Real>
Vector<Real> operator*(const Matrix<Real>& a, const Vector<Real>& x) {
  assert(a.cols() == x.size());
  Vector<Real> out(a.rows(), Real(0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * x[j];
  return out;
}

/// LU factorization with partial pivoting of a square matrix.
template <typename Real>
class DenseLu {
 public:
  explicit DenseLu(Matrix<Real> a) : lu_(std::move(a)), perm_(lu_.rows()) {
    using std::abs;
    const std::size_t n = lu_.rows();
    if (lu_.cols() != n) throw ConfigError("DenseLu: matrix is not square");
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t p = c;
      Real best = abs(lu_(c, c));
      for (std::size_t r = c + 1; r < n; ++r) {
        const Real v = abs(lu_(r, c));
        if (v > best) {
          best = v;
          p = r;
        }
      }
      if (best == Real(0) || !is_finite(best)) throw SingularLinearSystem("zero pivot in dense LU", c);
      lu_.swap_rows(c, p);
      std::swap(perm_[c], perm_[p]);
      for (std::size_t r = c + 1; r < n; ++r) {
        const Real f = lu_(r, c) / lu_(c, c);
        lu_(r, c) = f;
        if (f == Real(0)) continue;
        for (std::size_t k = c + 1; k < n; ++k) lu_(r, k) -= f * lu_(c, k);
      }
    }
  }

  Vector<Real> solve(const Vector<Real>& b) const {
    const std::size_t n = lu_.rows();
    assert(b.size() == n);
    Vector<Real> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      Real s = b[perm_[i]];
      for (std::size_t k = 0; k < i; ++k) s -= lu_(i, k) * x[k];
      x[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      Real s = x[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= lu_(ii, k) * x[k];
      x[ii] = s / lu_(ii, ii);
    }
    return x;
  }

 private:
  Matrix<Real> lu_;
  std::vector<std::size_t> perm_;
};

}  // namespace stiffbvp
