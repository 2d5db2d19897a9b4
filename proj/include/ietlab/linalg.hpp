#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "ietlab/common.hpp"

namespace ietlab {

// Dense row-major matrix over a templated scalar. Everything here is sized
// by the alphabet (d <= ~10), so simple O(n^3) kernels are fine; the point
// is that they work unchanged for double and for wide floats.
template <class T>
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<T> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, T(0)) {}

  T& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; i++) m(i, i) = T(1);
    return m;
  }

  Mat transposed() const {
    Mat m(cols, rows);
    for (std::size_t i = 0; i < rows; i++)
      for (std::size_t j = 0; j < cols; j++) m(j, i) = (*this)(i, j);
    return m;
  }

  std::vector<T> col(std::size_t j) const {
    std::vector<T> v(rows);
    for (std::size_t i = 0; i < rows; i++) v[i] = (*this)(i, j);
    return v;
  }
  void set_col(std::size_t j, const std::vector<T>& v) {
    for (std::size_t i = 0; i < rows; i++) (*this)(i, j) = v[i];
  }
};

template <class T>
Mat<T> operator*(const Mat<T>& x, const Mat<T>& y) {
  Mat<T> z(x.rows, y.cols);
  for (std::size_t i = 0; i < x.rows; i++)
    for (std::size_t k = 0; k < x.cols; k++) {
      const T& f = x(i, k);
      if (f == T(0)) continue;
      for (std::size_t j = 0; j < y.cols; j++) z(i, j) += f * y(k, j);
    }
  return z;
}

template <class T>
std::vector<T> operator*(const Mat<T>& m, const std::vector<T>& v) {
  std::vector<T> r(m.rows, T(0));
  for (std::size_t i = 0; i < m.rows; i++)
    for (std::size_t j = 0; j < m.cols; j++) r[i] += m(i, j) * v[j];
  return r;
}

template <class T>
T dot(const std::vector<T>& x, const std::vector<T>& y) {
  T s(0);
  for (std::size_t i = 0; i < x.size(); i++) s += x[i] * y[i];
  return s;
}

template <class T>
T norm2(const std::vector<T>& x) {
  using std::sqrt;
  return sqrt(dot(x, x));
}

template <class T>
T norm_inf(const std::vector<T>& x) {
  using std::abs;
  T m(0);
  for (const T& v : x) m = std::max(m, T(abs(v)));
  return m;
}

// Max absolute row sum; the norm convention used for all full-matrix norms.
template <class T>
T norm_rowsum(const Mat<T>& m) {
  using std::abs;
  T best(0);
  for (std::size_t i = 0; i < m.rows; i++) {
    T s(0);
    for (std::size_t j = 0; j < m.cols; j++) s += abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

template <class T>
void axpy(std::vector<T>& y, const T& a, const std::vector<T>& x) {
  for (std::size_t i = 0; i < y.size(); i++) y[i] += a * x[i];
}

// Modified Gram-Schmidt with one reorthogonalization pass. Returns Q with
// orthonormal columns and (optionally) R. Columns that collapse below
// `rank_tol` relative to their input norm are flagged in *degenerate.
template <class T>
Mat<T> mgs_qr(const Mat<T>& m, Mat<T>* r_out = nullptr, bool* degenerate = nullptr) {
  Mat<T> q = m;
  std::size_t n = m.cols;
  Mat<T> r(n, n);
  if (degenerate) *degenerate = false;
  for (std::size_t j = 0; j < n; j++) {
    auto v = q.col(j);
    T nin = norm2(v);
    for (int pass = 0; pass < 2; pass++) {
      for (std::size_t i = 0; i < j; i++) {
        auto qi = q.col(i);
        T p = dot(qi, v);
        r(i, j) += p;
        axpy(v, T(-p), qi);
      }
    }
    T nv = norm2(v);
    r(j, j) = nv;
    if (nv == T(0) || (nin > T(0) && nv / nin < T(1e-300))) {
      if (degenerate) *degenerate = true;
      // keep a zero column; caller decides
      for (auto& x : v) x = T(0);
    } else {
      for (auto& x : v) x /= nv;
    }
    q.set_col(j, v);
  }
  if (r_out) *r_out = r;
  return q;
}

// Gaussian elimination with partial pivoting; square solve.
template <class T>
std::vector<T> gauss_solve(Mat<T> m, std::vector<T> b) {
  using std::abs;
  std::size_t n = m.rows;
  if (m.cols != n || b.size() != n) throw ietlab_error("gauss_solve: shape mismatch");
  for (std::size_t k = 0; k < n; k++) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; i++)
      if (abs(m(i, k)) > abs(m(piv, k))) piv = i;
    if (m(piv, k) == T(0)) throw ietlab_error("gauss_solve: singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; j++) std::swap(m(piv, j), m(k, j));
      std::swap(b[piv], b[k]);
    }
    for (std::size_t i = k + 1; i < n; i++) {
      T f = m(i, k) / m(k, k);
      if (f == T(0)) continue;
      for (std::size_t j = k; j < n; j++) m(i, j) -= f * m(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<T> x(n);
  for (std::size_t i = n; i-- > 0;) {
    T s = b[i];
    for (std::size_t j = i + 1; j < n; j++) s -= m(i, j) * x[j];
    x[i] = s / m(i, i);
  }
  return x;
}

template <class T>
Mat<T> inverse(const Mat<T>& m) {
  std::size_t n = m.rows;
  Mat<T> inv(n, n);
  for (std::size_t j = 0; j < n; j++) {
    std::vector<T> e(n, T(0));
    e[j] = T(1);
    inv.set_col(j, gauss_solve(m, e));
  }
  return inv;
}

// Singular values by one-sided Jacobi on columns, descending order.
template <class T>
std::vector<T> singular_values(Mat<T> m) {
  using std::abs;
  using std::sqrt;
  std::size_t n = m.cols;
  for (int sweep = 0; sweep < 60; sweep++) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; p++)
      for (std::size_t q = p + 1; q < n; q++) {
        T app(0), aqq(0), apq(0);
        for (std::size_t i = 0; i < m.rows; i++) {
          app += m(i, p) * m(i, p);
          aqq += m(i, q) * m(i, q);
          apq += m(i, p) * m(i, q);
        }
        if (apq == T(0)) continue;
        T denom = sqrt(app * aqq);
        if (denom == T(0)) continue;
        if (abs(apq) / denom < T(1e-40)) continue;
        rotated = true;
        T tau = (aqq - app) / (T(2) * apq);
        T t = (tau >= T(0) ? T(1) : T(-1)) / (abs(tau) + sqrt(T(1) + tau * tau));
        T c = T(1) / sqrt(T(1) + t * t), s = c * t;
        for (std::size_t i = 0; i < m.rows; i++) {
          T mp = m(i, p), mq = m(i, q);
          m(i, p) = c * mp - s * mq;
          m(i, q) = s * mp + c * mq;
        }
      }
    if (!rotated) break;
  }
  std::vector<T> sv(n);
  for (std::size_t j = 0; j < n; j++) sv[j] = norm2(m.col(j));
  std::sort(sv.begin(), sv.end(), std::greater<T>());
  return sv;
}

template <class T>
Mat<T> hcat(const Mat<T>& x, const Mat<T>& y) {
  Mat<T> z(x.rows, x.cols + y.cols);
  for (std::size_t i = 0; i < x.rows; i++) {
    for (std::size_t j = 0; j < x.cols; j++) z(i, j) = x(i, j);
    for (std::size_t j = 0; j < y.cols; j++) z(i, x.cols + j) = y(i, j);
  }
  return z;
}

template <class T, class U>
Mat<U> mat_cast(const Mat<T>& m) {
  Mat<U> z(m.rows, m.cols);
  for (std::size_t i = 0; i < m.a.size(); i++) z.a[i] = static_cast<U>(m.a[i]);
  return z;
}

}  // namespace ietlab
