#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ietlab/rauzy.hpp"

namespace ietlab {

// Numerically estimated Lyapunov spectrum of the accelerated cocycle.
// Exponents are reported per acceleration level (the unit every other rate
// in the library is measured in) and per elementary step.
struct Spectrum {
  int g = 0;      // positive exponents (from the rank of the intersection form)
  int gamma = 1;  // number of marked points; gamma-1 central directions
  std::vector<double> lambda;            // all d exponents, descending, per level
  std::vector<double> lambda_per_step;   // same, per elementary step
  std::vector<double> confidence;        // ~2 sigma half-widths, per level units
  std::vector<double> symmetry_residual; // |lambda_i + lambda_{d+1-i}|
  std::vector<std::string> warnings;

  double lambda_pos(int i) const { return lambda.at(i - 1); }  // lambda_i, i=1..g
  // lambda_j for signed index: +i -> lambda_i, 0 -> 0 band, -j -> -lambda_j
  double lambda_signed(int j) const {
    if (j > 0) return lambda.at(j - 1);
    if (j < 0) return lambda.at(lambda.size() + j);
    return 0.0;
  }
};

struct SpectrumOptions {
  std::size_t k_min = 5;    // discard transient levels
  std::size_t k_max = 0;    // 0: fit to the end of the run
  std::size_t trials = 8;   // bootstrap blocks for the confidence estimate
};

template <class TT>
Spectrum estimate_spectrum(const CocycleRun<TT>& run, const SpectrumOptions& opt = {}) {
  std::size_t d = run.dim(), K = run.depth();
  if (K < 20) throw precondition_error("estimate_spectrum: run too short");
  auto [g, gamma] = genus_and_marks(run.base.perm);

  // treppeniteration: push a full frame, re-orthonormalize, log the growth
  Mat<double> f = Mat<double>::identity(d);
  std::vector<std::vector<double>> cum(d, std::vector<double>(K + 1, 0.0));
  for (std::size_t k = 0; k < K; k++) {
    f = to_real<double>(run.Z[k]) * f;
    Mat<double> r;
    f = mgs_qr(f, &r);
    for (std::size_t i = 0; i < d; i++) {
      double rd = std::abs(r(i, i));
      cum[i][k + 1] = cum[i][k] + (rd > 0 ? std::log(rd) : -745.0);
    }
  }

  Spectrum sp;
  sp.g = g;
  sp.gamma = gamma;
  sp.lambda.resize(d);
  sp.lambda_per_step.resize(d);
  sp.confidence.resize(d);
  std::size_t k_hi = opt.k_max > 0 ? std::min(opt.k_max, K) : K;
  std::vector<double> ks, ns;
  for (std::size_t k = opt.k_min; k <= k_hi; k++) {
    ks.push_back(double(k));
    ns.push_back(double(run.levels[k].n));
  }
  for (std::size_t i = 0; i < d; i++) {
    std::vector<double> ys;
    for (std::size_t k = opt.k_min; k <= k_hi; k++) ys.push_back(cum[i][k]);
    sp.lambda[i] = fit_line(ks, ys).slope;
    sp.lambda_per_step[i] = fit_line(ns, ys).slope;
    // bootstrap over contiguous blocks
    std::size_t nb = std::max<std::size_t>(2, opt.trials);
    std::size_t blk = ys.size() / nb;
    std::vector<double> slopes;
    for (std::size_t b = 0; b + 1 < nb && blk >= 4; b++) {
      std::vector<double> xs2(ks.begin() + b * blk, ks.begin() + (b + 1) * blk);
      std::vector<double> ys2(ys.begin() + b * blk, ys.begin() + (b + 1) * blk);
      slopes.push_back(fit_line(xs2, ys2).slope);
    }
    if (slopes.size() >= 2) {
      double m = 0, v = 0;
      for (double s : slopes) m += s;
      m /= slopes.size();
      for (double s : slopes) v += (s - m) * (s - m);
      v /= (slopes.size() - 1);
      sp.confidence[i] = 2.0 * std::sqrt(v / slopes.size());
    } else {
      sp.confidence[i] = std::abs(sp.lambda[i]);
      sp.warnings.push_back("confidence from too few blocks");
    }
  }
  sp.symmetry_residual.resize(d);
  for (std::size_t i = 0; i < d; i++)
    sp.symmetry_residual[i] = std::abs(sp.lambda[i] + sp.lambda[d - 1 - i]);

  if (sp.lambda[0] <= sp.confidence[0])
    sp.warnings.push_back("top exponent not separated from zero");
  for (int i = 0; i + 1 < g; i++)
    if (sp.lambda[i] - sp.lambda[i + 1] < sp.confidence[i] + sp.confidence[i + 1])
      sp.warnings.push_back("gap " + std::to_string(i + 1) + "/" + std::to_string(i + 2) +
                            " within confidence");
  for (int i = g; i + g < int(d); i++)
    if (std::abs(sp.lambda[i]) > 2 * sp.confidence[i] + 0.05 * sp.lambda[0])
      sp.warnings.push_back("central exponent " + std::to_string(i) + " not near zero");
  return sp;
}

// Signed flag indices. U-side: j in {2..g+1} (span of the j-1 fastest
// directions) or j in {0,-1..-g} (everything above the j-dim stable tail,
// j=0 meaning all of R^A). E-side: j in {1..g+1} (growth <= lambda_j) or
// j in {-1..-g} (the |j|-dim stable tail).
inline std::size_t u_dim(int j, std::size_t d) {
  if (j >= 2) return std::size_t(j - 1);
  if (j <= 0) return d - std::size_t(-j);
  throw precondition_error("u_dim: bad index");
}
inline std::size_t e_dim(int j, std::size_t d) {
  if (j >= 1) return d - std::size_t(j) + 1;
  if (j <= -1) return std::size_t(-j);
  throw precondition_error("e_dim: bad index");
}

// Oseledets filtration estimate over a window of acceleration levels.
// Backward frames H[k] have orthonormal columns ordered fast -> slow; the
// trailing columns estimate the E-flags at level k, the leading columns of
// H[0] fix the complementary U-flags at level 0.
template <class T>
struct Filtration {
  int g = 0, gamma = 1;
  std::size_t d = 0;
  std::size_t window = 0;  // frames valid for k = 0..window
  std::size_t buffer = 0;
  std::vector<Mat<T>> H;
  Spectrum spectrum;

  // basis vectors at level 0: h_1..h_g, c_1..c_{gamma-1}, h_{-g}..h_{-1}
  std::vector<T> h_vec(int j) const {  // j in +-{1..g}
    if (j >= 1) return H[0].col(j - 1);
    return H[0].col(d + j);  // h_{-j} is the (d+1-j)-th column
  }
  std::vector<T> c_vec(int s) const { return H[0].col(g + s - 1); }  // s = 1..gamma-1

  Mat<T> u_frame0(int j) const {  // level-0 U_j frame (columns of H[0])
    std::size_t m = u_dim(j, d);
    Mat<T> f(d, m);
    for (std::size_t c = 0; c < m; c++) f.set_col(c, H[0].col(c));
    return f;
  }
  Mat<T> e_frame(std::size_t k, int j) const {  // E_j^(k) estimate
    std::size_t m = e_dim(j, d);
    Mat<T> f(d, m);
    for (std::size_t c = 0; c < m; c++) f.set_col(c, H.at(k).col(d - m + c));
    return f;
  }
};

template <class T, class TT>
Filtration<T> estimate_flags(const CocycleRun<TT>& run, std::size_t window, std::size_t buffer,
                             std::optional<Spectrum> spectrum = std::nullopt) {
  std::size_t d = run.dim();
  if (window + buffer > run.depth())
    throw precondition_error("estimate_flags: run shorter than window + buffer");
  Filtration<T> filt;
  auto [g, gamma] = genus_and_marks(run.base.perm);
  filt.g = g;
  filt.gamma = gamma;
  filt.d = d;
  filt.window = window;
  filt.buffer = buffer;
  filt.spectrum = spectrum ? *spectrum : estimate_spectrum(run);

  std::size_t K = window + buffer;
  std::vector<Mat<T>> H(window + 1);
  Mat<T> h = Mat<T>::identity(d);
  for (std::size_t k = K; k-- > 0;) {
    h = to_real<T>(run.Z[k]).transposed() * h;
    bool degenerate = false;
    h = mgs_qr(h, static_cast<Mat<T>*>(nullptr), &degenerate);
    if (degenerate) throw convergence_error("estimate_flags: frame collapse in backward sweep", {});
    if (k <= window) H[k] = h;
  }
  // deterministic sign convention: largest-magnitude entry positive
  for (auto& m : H)
    for (std::size_t c = 0; c < d; c++) {
      auto col = m.col(c);
      std::size_t arg = 0;
      using std::abs;
      for (std::size_t i = 1; i < d; i++)
        if (abs(col[i]) > abs(col[arg])) arg = i;
      if (col[arg] < T(0)) {
        for (auto& v : col) v = -v;
        m.set_col(c, col);
      }
    }
  filt.H = std::move(H);
  return filt;
}

// U-frame pushed forward by the cocycle with per-column normalization; the
// accumulated log scales track the growth so nothing overflows.
template <class T>
struct PushedFrame {
  std::vector<Mat<T>> frames;              // [k]: d x m, unit columns
  std::vector<std::vector<T>> log_scale;   // [k][col]
};

template <class T, class TT>
PushedFrame<T> push_frame(const CocycleRun<TT>& run, Mat<T> f0, std::size_t upto) {
  using std::log;
  PushedFrame<T> pf;
  std::size_t m = f0.cols;
  pf.frames.reserve(upto + 1);
  pf.log_scale.assign(upto + 1, std::vector<T>(m, T(0)));
  pf.frames.push_back(f0);
  for (std::size_t k = 0; k < upto; k++) {
    Mat<T> f = to_real<T>(run.Z[k]) * pf.frames.back();
    for (std::size_t c = 0; c < m; c++) {
      auto col = f.col(c);
      T n = norm2(col);
      if (n == T(0)) throw convergence_error("push_frame: column collapsed", {});
      for (auto& v : col) v /= n;
      f.set_col(c, col);
      pf.log_scale[k + 1][c] = pf.log_scale[k][c] + log(n);
    }
    pf.frames.push_back(f);
  }
  return pf;
}

// Oblique projection onto span(U) along span(E); P_U + P_E = Id by
// construction. Frames need unit columns, not orthonormality.
template <class T>
Mat<T> oblique_projection(const Mat<T>& u, const Mat<T>& e) {
  std::size_t d = u.rows;
  Mat<T> m = hcat(u, e);
  Mat<T> minv = inverse(m);
  Mat<T> sel(d, d);
  for (std::size_t i = 0; i < u.cols; i++) sel(i, i) = T(1);
  return m * sel * minv;
}

template <class T>
T spectral_norm(const Mat<T>& m) {
  auto sv = singular_values(m);
  return sv.empty() ? T(0) : sv.front();
}

// sin of the minimal angle between complementary subspaces, via the norm of
// the oblique projection: ||P|| = 1/sin(theta_min).
template <class T>
T sin_angle(const Mat<T>& u, const Mat<T>& e) {
  T n = spectral_norm(oblique_projection(u, e));
  return n > T(0) ? T(1) / n : T(0);
}

// ||Q(k,l) restricted to V^(k)||: top singular value of Q(k,l) composed with
// an orthonormal frame of V^(k). Returns the log to keep deep spans usable.
template <class T, class TT>
double log_restricted_norm(const CocycleRun<TT>& run, std::size_t k, std::size_t l,
                           const Mat<T>& v_frame, bool inverse_norm = false) {
  using std::log;
  Mat<T> f = mgs_qr(v_frame);
  double scale = 0;
  for (std::size_t j = k; j < l; j++) {
    f = to_real<T>(run.Z[j]) * f;
    T mx(0);
    using std::abs;
    for (const auto& v : f.a) mx = std::max(mx, T(abs(v)));
    if (mx > T(0)) {
      for (auto& v : f.a) v /= mx;
      scale += to_double(log(mx));
    }
  }
  auto sv = singular_values(f);
  T s = inverse_norm ? sv.back() : sv.front();
  if (s <= T(0)) return inverse_norm ? std::numeric_limits<double>::infinity() : -1e300;
  double r = scale + to_double(log(s));
  return inverse_norm ? -r : r;
}

// Diophantine partial-sum diagnostics. All four families share the shape
// sum_l ||Q restricted||' * ||Z|| * weight(l); r(k,l) is taken as l-k.
struct DioSeries {
  std::vector<double> partial;  // partial sums by truncation depth
  double value = 0;             // deepest partial sum
  double fitted_rate = 0;       // of the term sequence, per level
  bool convergent = false;
  std::vector<double> terms;
};

namespace detail {
inline DioSeries assemble_series(std::vector<double> terms) {
  DioSeries s;
  s.terms = terms;
  double acc = 0;
  for (double t : terms) {
    acc += t;
    s.partial.push_back(acc);
  }
  s.value = acc;
  if (terms.size() >= 6) {
    LineFit f = fit_log_rate(terms, terms.size() / 3, terms.size() - 1);
    s.fitted_rate = f.slope;
    s.convergent = f.slope < 0;
  }
  return s;
}
}  // namespace detail

// K^{a,i,tau}_k: forward series with inverse norms restricted to U_i^(k).
template <class T, class TT>
DioSeries dio_series_K(const CocycleRun<TT>& run, const Filtration<T>& filt, double a, int i,
                       double tau, std::size_t k, std::size_t depth) {
  std::vector<double> terms;
  PushedFrame<T> pf = push_frame(run, filt.u_frame0(i), std::min(k + depth + 1, run.depth()));
  for (std::size_t l = k; l < k + depth && l + 1 <= run.depth(); l++) {
    double invn = log_restricted_norm(run, k, l + 1, pf.frames[k], true);
    double logz = run.log_norm_Z(l);
    double logq_l = run.levels[l].log_norm_q;
    double logq_l1 = run.levels[l + 1].log_norm_q;
    double wa = a > 0 ? a * logq_l : std::log(1.0 + logq_l);
    terms.push_back(std::exp(invn + logz + wa + tau * logq_l1));
  }
  return detail::assemble_series(terms);
}

// C^{a,i,tau}_k: backward series with norms restricted to E_i^(l+1).
template <class T, class TT>
DioSeries dio_series_C(const CocycleRun<TT>& run, const Filtration<T>& filt, double a, int i,
                       double tau, std::size_t k) {
  std::vector<double> terms;
  for (std::size_t l = 0; l < k; l++) {
    double nrm = log_restricted_norm(run, l + 1, k, filt.e_frame(l + 1, i), false);
    double logz = run.log_norm_Z(l);
    double logq_l = run.levels[l].log_norm_q;
    double logq_l1 = run.levels[l + 1].log_norm_q;
    double wa = a > 0 ? a * logq_l : std::log(1.0 + logq_l);
    terms.push_back(std::exp(nrm + logz + wa + tau * logq_l1));
  }
  return detail::assemble_series(terms);
}

// V^{j,tau}_k(s): forward series against a weight sequence s_l.
template <class T, class TT>
DioSeries dio_series_V(const CocycleRun<TT>& run, const Filtration<T>& filt, int j, double tau,
                       const std::vector<double>& s, std::size_t k, std::size_t depth) {
  std::vector<double> terms;
  PushedFrame<T> pf = push_frame(run, filt.u_frame0(-j), std::min(k + depth + 1, run.depth()));
  for (std::size_t l = k; l < k + depth && l + 1 <= run.depth() && l < s.size(); l++) {
    if (s[l] <= 0) { terms.push_back(0); continue; }
    double invn = log_restricted_norm(run, k, l + 1, pf.frames[k], true);
    double logz = run.log_norm_Z(l);
    double logq_l1 = run.levels[l + 1].log_norm_q;
    terms.push_back(std::exp(invn + logz + tau * logq_l1 + std::log(s[l])));
  }
  return detail::assemble_series(terms);
}

// W^{j,tau}_k(s): backward series against a weight sequence s_l.
template <class T, class TT>
DioSeries dio_series_W(const CocycleRun<TT>& run, const Filtration<T>& filt, int j, double tau,
                       const std::vector<double>& s, std::size_t k) {
  std::vector<double> terms;
  for (std::size_t l = 0; l < k && l < s.size(); l++) {
    if (s[l] <= 0) { terms.push_back(0); continue; }
    double nrm = log_restricted_norm(run, l + 1, k, filt.e_frame(l + 1, -j), false);
    double logz = run.log_norm_Z(l);
    double logq_l1 = run.levels[l + 1].log_norm_q;
    terms.push_back(std::exp(nrm + logz + tau * logq_l1 + std::log(s[l])));
  }
  return detail::assemble_series(terms);
}

}  // namespace ietlab
