#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ietlab {

// Exact integers for cocycle matrices; Q(k) entries overflow any fixed width.
using bigint = boost::multiprecision::cpp_int;

// Wide floats for the renormalization pipeline. Corrected special Birkhoff
// sums decay through cancellation between exponentially large contributions,
// so the working precision bounds how deep the decay can be resolved.
using real50 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<50>>;
using real160 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<160>>;

template <class T>
double to_double(const T& x) {
  return static_cast<double>(x);
}
inline double to_double(double x) { return x; }

struct ietlab_error : std::runtime_error {
  explicit ietlab_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct precondition_error : ietlab_error {
  using ietlab_error::ietlab_error;
};

struct convergence_error : ietlab_error {
  std::vector<double> history;
  convergence_error(const std::string& msg, std::vector<double> h)
      : ietlab_error(msg), history(std::move(h)) {}
};

// Least-squares line fit y = a + b x, with confidence half-width for b from
// the residual spread. Used throughout for log-norm slope (rate) estimates.
struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_halfwidth = 0;  // ~2 sigma
  double r2 = 0;
  std::size_t n = 0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  LineFit f;
  std::size_t n = std::min(xs.size(), ys.size());
  f.n = n;
  if (n < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; i++) {
    sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
  }
  double den = n * sxx - sx * sx;
  if (den == 0) return f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0, ybar = sy / n;
  for (std::size_t i = 0; i < n; i++) {
    double e = ys[i] - (f.intercept + f.slope * xs[i]);
    ss_res += e * e;
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (n > 2) {
    double se = std::sqrt(ss_res / double(n - 2) / (sxx - sx * sx / n));
    f.slope_halfwidth = 2.0 * se;
  }
  return f;
}

// Fitted decay rate of a positive sequence a_k over k in [k0, k1]:
// slope of log a_k vs k. Entries <= 0 or non-finite are skipped.
inline LineFit fit_log_rate(const std::vector<double>& vals, std::size_t k0, std::size_t k1) {
  std::vector<double> xs, ys;
  for (std::size_t k = k0; k <= k1 && k < vals.size(); k++) {
    if (vals[k] > 0 && std::isfinite(vals[k])) {
      xs.push_back(double(k));
      ys.push_back(std::log(vals[k]));
    }
  }
  return fit_line(xs, ys);
}

}  // namespace ietlab
