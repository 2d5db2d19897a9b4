#pragma once

#include <cstddef>
#include <vector>

#include "ietlab/common.hpp"
#include "ietlab/linalg.hpp"

namespace ietlab {

using IMat = Mat<bigint>;

inline IMat imat_identity(std::size_t n) { return IMat::identity(n); }

// Fraction-free Gaussian elimination (Bareiss); exact determinant.
inline bigint det(IMat m) {
  std::size_t n = m.rows;
  bigint prev(1);
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; k++) {
    if (m(k, k) == 0) {
      std::size_t piv = k + 1;
      while (piv < n && m(piv, k) == 0) piv++;
      if (piv == n) return bigint(0);
      for (std::size_t j = 0; j < n; j++) std::swap(m(k, j), m(piv, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; i++)
      for (std::size_t j = k + 1; j < n; j++)
        m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
    prev = m(k, k);
  }
  return sign > 0 ? m(n - 1, n - 1) : -m(n - 1, n - 1);
}

inline bigint norm_rowsum(const IMat& m) {
  bigint best(0);
  for (std::size_t i = 0; i < m.rows; i++) {
    bigint s(0);
    for (std::size_t j = 0; j < m.cols; j++) s += abs(m(i, j));
    if (s > best) best = s;
  }
  return best;
}

inline double log_norm_rowsum(const IMat& m) {
  bigint n = norm_rowsum(m);
  if (n == 0) return -std::numeric_limits<double>::infinity();
  // log of a big integer via msb split
  double bits = static_cast<double>(boost::multiprecision::msb(n));
  bigint shifted = n >> std::max<long>(0, long(bits) - 52);
  return std::log(static_cast<double>(shifted)) +
         std::max<long>(0, long(bits) - 52) * std::log(2.0);
}

template <class T>
Mat<T> to_real(const IMat& m) {
  Mat<T> z(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; i++)
    for (std::size_t j = 0; j < m.cols; j++) z(i, j) = T(m(i, j));
  return z;
}

template <class T>
std::vector<T> mat_vec(const IMat& m, const std::vector<T>& v) {
  std::vector<T> r(m.rows, T(0));
  for (std::size_t i = 0; i < m.rows; i++)
    for (std::size_t j = 0; j < m.cols; j++)
      if (m(i, j) != 0) r[i] += T(m(i, j)) * v[j];
  return r;
}

}  // namespace ietlab
