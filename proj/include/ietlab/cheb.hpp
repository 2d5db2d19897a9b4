#pragma once

#include <map>
#include <vector>

#include "ietlab/common.hpp"

namespace ietlab {

// Chebyshev interpolation on [0, 1] at second-kind points, stored as values.
// Node and cosine tables are cached per (scalar, point count) and built by
// angle recurrences; wide-float cos() is far too slow to call per entry.
template <class T>
struct ChebTable {
  std::size_t n;                    // degree; n+1 points
  std::vector<T> t;                 // nodes in [0,1], increasing
  std::vector<T> w;                 // barycentric weights
  std::vector<std::vector<T>> cm;   // cm[j][i] = cos(j * theta_i), theta_i = pi - i pi/n

  static const ChebTable& get(std::size_t n) {
    static std::map<std::size_t, ChebTable> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    ChebTable tab;
    tab.n = n;
    tab.t.resize(n + 1);
    tab.w.resize(n + 1);
    T pi = acos_minus_one();
    using std::cos;
    using std::sin;
    T cd = cos(pi / T(n)), sd = sin(pi / T(n));
    // cos(i pi / n), sin(i pi / n) by rotation
    std::vector<T> ci(n + 1), si(n + 1);
    ci[0] = T(1);
    si[0] = T(0);
    for (std::size_t i = 1; i <= n; i++) {
      ci[i] = ci[i - 1] * cd - si[i - 1] * sd;
      si[i] = si[i - 1] * cd + ci[i - 1] * sd;
    }
    ci[n] = T(-1);  // pin the endpoint exactly
    si[n] = T(0);
    for (std::size_t i = 0; i <= n; i++) {
      tab.t[i] = (T(1) - ci[i]) / T(2);
      tab.w[i] = (i % 2 == 0 ? T(1) : T(-1));
    }
    tab.w[0] /= T(2);
    tab.w[n] /= T(2);
    // cos(j theta_i) with cos(theta_i) = -ci[i], via the Chebyshev recurrence
    tab.cm.assign(n + 1, std::vector<T>(n + 1));
    for (std::size_t i = 0; i <= n; i++) {
      tab.cm[0][i] = T(1);
      if (n >= 1) tab.cm[1][i] = -ci[i];
    }
    for (std::size_t j = 2; j <= n; j++)
      for (std::size_t i = 0; i <= n; i++)
        tab.cm[j][i] = T(2) * tab.cm[1][i] * tab.cm[j - 1][i] - tab.cm[j - 2][i];
    return cache.emplace(n, std::move(tab)).first->second;
  }

  static T acos_minus_one() {
    using std::acos;
    static const T pi = acos(T(-1));
    return pi;
  }
};

// quantized node counts so the table cache stays small
inline std::size_t quantize_nodes(std::size_t n) {
  for (std::size_t q : {std::size_t(8), std::size_t(12), std::size_t(16), std::size_t(24),
                        std::size_t(32), std::size_t(48), std::size_t(64), std::size_t(96),
                        std::size_t(128), std::size_t(192), std::size_t(256), std::size_t(384)})
    if (n <= q) return q;
  return 384;
}

// f given by values at the n+1 nodes of [0,1]; evaluate at u in [0,1].
template <class T>
T cheb_eval(const std::vector<T>& vals, const T& u) {
  const auto& tab = ChebTable<T>::get(vals.size() - 1);
  T num(0), den(0);
  for (std::size_t i = 0; i < vals.size(); i++) {
    T diff = u - tab.t[i];
    if (diff == T(0)) return vals[i];
    T q = tab.w[i] / diff;
    num += q * vals[i];
    den += q;
  }
  return num / den;
}

// Clenshaw evaluation from coefficients at u in [0,1]; multiplication-only,
// preferred on batched grids over the barycentric form
template <class T>
T cheb_clenshaw(const std::vector<T>& c, const T& u) {
  T x = T(2) * u - T(1);
  T b1(0), b2(0);
  for (std::size_t j = c.size(); j-- > 1;) {
    T b0 = T(2) * x * b1 - b2 + c[j];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c[0];
}

// values -> Chebyshev coefficients (basis T_j(2u-1))
template <class T>
std::vector<T> cheb_coeffs(const std::vector<T>& vals) {
  std::size_t n = vals.size() - 1;
  const auto& tab = ChebTable<T>::get(n);
  std::vector<T> c(n + 1, T(0));
  for (std::size_t j = 0; j <= n; j++) {
    T s(0);
    for (std::size_t i = 0; i <= n; i++) {
      T term = vals[i] * tab.cm[j][i];
      if (i == 0 || i == n) term /= T(2);
      s += term;
    }
    c[j] = s * T(2) / T(n);
  }
  c[0] /= T(2);
  c[n] /= T(2);
  return c;
}

template <class T>
std::vector<T> cheb_values_from_coeffs(const std::vector<T>& c) {
  std::size_t n = c.size() - 1;
  const auto& tab = ChebTable<T>::get(n);
  std::vector<T> vals(n + 1, T(0));
  for (std::size_t i = 0; i <= n; i++) {
    T x = T(2) * tab.t[i] - T(1);
    T b1(0), b2(0);
    for (std::size_t j = n + 1; j-- > 1;) {
      T b0 = T(2) * x * b1 - b2 + c[j];
      b2 = b1;
      b1 = b0;
    }
    vals[i] = x * b1 - b2 + c[0];
  }
  return vals;
}

// integral over [0,1] from coefficients
template <class T>
T cheb_integral_from_coeffs(const std::vector<T>& c) {
  T s = c[0];
  for (std::size_t j = 2; j < c.size(); j += 2) s -= c[j] / T(j * j - 1);
  return s;
}

template <class T>
T cheb_integral(const std::vector<T>& vals) {
  return cheb_integral_from_coeffs(cheb_coeffs(vals));
}

// derivative values (d/du on [0,1]) of the interpolant
template <class T>
std::vector<T> cheb_derivative(const std::vector<T>& vals) {
  auto c = cheb_coeffs(vals);
  std::size_t n = c.size() - 1;
  std::vector<T> dc(n + 1, T(0));
  for (std::size_t j = n; j >= 1; j--)
    dc[j - 1] = (j + 1 <= n ? dc[j + 1] : T(0)) + T(2) * T(j) * c[j];
  dc[0] /= T(2);
  auto dv = cheb_values_from_coeffs(dc);
  for (auto& v : dv) v *= T(2);  // d/du = 2 d/dx
  return dv;
}

template <class T>
double cheb_tail_from_coeffs(const std::vector<T>& c) {
  using std::abs;
  T tail(0);
  std::size_t n = c.size();
  for (std::size_t j = n > 3 ? n - 3 : 0; j < n; j++) tail += abs(c[j]);
  return to_double(tail);
}

template <class T>
double cheb_tail_estimate(const std::vector<T>& vals) {
  return cheb_tail_from_coeffs(cheb_coeffs(vals));
}

// last coefficient index above rel_tol * max|c|
template <class T>
std::size_t effective_degree(const std::vector<T>& c, double rel_tol) {
  using std::abs;
  T mx(0);
  for (const auto& v : c) mx = std::max(mx, T(abs(v)));
  if (mx == T(0)) return 0;
  T cut = mx * T(rel_tol);
  std::size_t deg = 0;
  for (std::size_t j = 0; j < c.size(); j++)
    if (abs(c[j]) > cut) deg = j;
  return deg;
}

}  // namespace ietlab
