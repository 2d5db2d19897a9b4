#pragma once

#include <string>
#include <vector>

#include "ietlab/birkhoff.hpp"
#include "ietlab/flags.hpp"

namespace ietlab {

// index choices against the estimated spectrum; `sym` is the symmetrized
// positive exponent (the +/- pair averaged), lambda_{g+1} pinned to zero
inline double spectrum_sym(const Spectrum& sp, int i) {
  if (i == sp.g + 1) return 0.0;
  std::size_t d = sp.lambda.size();
  return (sp.lambda.at(i - 1) - sp.lambda.at(d - i)) / 2;
}

struct IndexChoice {
  int value = 0;
  bool marginal = false;  // the deciding comparison fell within confidence
};

// smallest 2 <= i <= g+1 with lambda_i <= a lambda_1
inline IndexChoice index_i_a(const Spectrum& sp, double a) {
  double l1 = spectrum_sym(sp, 1);
  IndexChoice c;
  for (int i = 2; i <= sp.g + 1; i++) {
    double gap = spectrum_sym(sp, i) - a * l1;
    if (gap <= 0) {
      c.value = i;
      c.marginal = std::abs(gap) < sp.confidence[std::min<std::size_t>(i - 1, sp.g - 1)];
      return c;
    }
  }
  c.value = sp.g + 1;
  return c;
}

// largest 1 <= j <= g with lambda_j >= (1-a) lambda_1
inline IndexChoice index_j_a(const Spectrum& sp, double a) {
  double l1 = spectrum_sym(sp, 1);
  IndexChoice c{1, false};
  for (int j = 1; j <= sp.g; j++) {
    double gap = spectrum_sym(sp, j) - (1 - a) * l1;
    if (gap >= 0) {
      c.value = j;
      c.marginal = std::abs(gap) < sp.confidence[j - 1];
    }
  }
  return c;
}

// largest 1 <= j <= g with lambda_j >= lambda_1 - lambda_i
inline IndexChoice index_j_i(const Spectrum& sp, int i) {
  double target = spectrum_sym(sp, 1) - spectrum_sym(sp, i);
  IndexChoice c{1, false};
  for (int j = 1; j <= sp.g; j++) {
    double gap = spectrum_sym(sp, j) - target;
    if (gap >= 0) {
      c.value = j;
      c.marginal = std::abs(gap) < sp.confidence[j - 1];
    }
  }
  return c;
}

// smallest 2 <= i <= g+1 with lambda_i <= lambda_1 - lambda_j
inline IndexChoice index_i_j(const Spectrum& sp, int j) {
  double target = spectrum_sym(sp, 1) - spectrum_sym(sp, j);
  IndexChoice c{sp.g + 1, false};
  for (int i = 2; i <= sp.g + 1; i++) {
    double gap = spectrum_sym(sp, i) - target;
    if (gap <= 0) {
      c.value = i;
      c.marginal = std::abs(gap) < sp.confidence[std::min<std::size_t>(i - 1, sp.g - 1)];
      return c;
    }
  }
  return c;
}

template <class T>
struct CorrectionResult {
  std::string tag;
  std::vector<T> coeffs;      // in the level-0 flag basis columns of U
  std::vector<T> output;      // assembled piecewise-constant vector
  int u_index = 0;
  std::size_t depth = 0;
  std::vector<double> increment_norms;
  double fitted_rate = 0;
  double tail_estimate = 0;
  double solve_residual = 0;   // worst oblique-solve residual, relative
  bool converged = true;
  bool marginal = false;
};

struct CorrectionOptions {
  std::size_t max_depth = 40;
  double increment_tol = 1e-12;  // relative to the largest increment
  bool throw_on_divergence = true;
};

// Correction series: pull the new mean mass at each level back to level 0
// through the cocycle, keep the component along the complementary flag, and
// sum. The pushed frames carry per-column log scales so nothing overflows.
template <class T, class TT>
class CorrectionEngine {
 public:
  CorrectionEngine(const CocycleRun<TT>& run, const Filtration<T>& filt,
                   PipelineOptions popt = {}, CorrectionOptions copt = {})
      : run_(run), filt_(filt), popt_(popt), copt_(copt) {}

  const Filtration<T>& filtration() const { return filt_; }
  const CocycleRun<TT>& run() const { return run_; }
  const PipelineOptions& pipeline_options() const { return popt_; }

  // series for the operator with target flag U_{u_index}
  CorrectionResult<T> series(BirkhoffPipeline<T, TT>& pipe, int u_index,
                             bool throw_on_divergence) const {
    std::size_t d = run_.dim();
    std::size_t m = u_dim(u_index, d);
    std::size_t L = std::min(copt_.max_depth, filt_.window);
    Mat<T> u0 = filt_.u_frame0(u_index);
    PushedFrame<T> pf = push_frame(run_, u0, L);

    CorrectionResult<T> res;
    res.u_index = u_index;
    res.coeffs.assign(m, T(0));
    std::vector<T> prev_means;
    T inc_max(0);
    using std::abs;
    using std::exp;

    for (std::size_t l = 0; l <= L; l++) {
      pipe.extend_to(l);
      const std::vector<T>& v = pipe.stats[l].means;
      std::vector<T> dv = v;
      if (l > 0) {
        auto zv = mat_vec(run_.Z[l - 1], prev_means);
        for (std::size_t i = 0; i < d; i++) dv[i] -= zv[i];
      }
      prev_means = v;

      // oblique solve in the pushed-U / backward-E pair at level l
      std::vector<T> y = solve_split(pf, l, u_index, dv, &res.solve_residual);
      std::vector<T> xl(m);
      for (std::size_t c = 0; c < m; c++) {
        xl[c] = y[c] * exp(-pf.log_scale[l][c]);
        res.coeffs[c] += xl[c];
      }
      T n2 = norm2(xl);
      res.increment_norms.push_back(to_double(n2));
      inc_max = std::max(inc_max, n2);
      res.depth = l;
      if (l > 3 && n2 < T(copt_.increment_tol) * inc_max) break;
    }

    // convergence diagnosis from the increment history
    std::size_t n = res.increment_norms.size();
    if (n >= 8) {
      LineFit f = fit_log_rate(res.increment_norms, n / 2, n - 1);
      res.fitted_rate = f.slope;
      res.converged = f.slope < 0.0;
      double last = res.increment_norms.back();
      if (res.converged) {
        double r = std::exp(f.slope);
        res.tail_estimate = last * r / (1 - r);
      } else {
        res.tail_estimate = std::numeric_limits<double>::infinity();
      }
    }
    if (!res.converged && throw_on_divergence)
      throw convergence_error("correction series diverges (fitted rate " +
                                  std::to_string(res.fitted_rate) + ")",
                              res.increment_norms);
    res.output = assemble(u0, res.coeffs);
    return res;
  }

  // level-k one-shot value Q(k)^{-1} P_U M^(k) S(k) phi, for the
  // telescoping identity diagnostics
  std::vector<T> one_shot(BirkhoffPipeline<T, TT>& pipe, int u_index, std::size_t k) const {
    Mat<T> u0 = filt_.u_frame0(u_index);
    PushedFrame<T> pf = push_frame(run_, u0, k);
    pipe.extend_to(k);
    double rres = 0;
    std::vector<T> y = solve_split(pf, k, u_index, pipe.stats[k].means, &rres);
    std::size_t m = u_dim(u_index, run_.dim());
    std::vector<T> coeffs(m);
    using std::exp;
    for (std::size_t c = 0; c < m; c++) coeffs[c] = y[c] * exp(-pf.log_scale[k][c]);
    return coeffs;
  }

  // h_j, 2 <= j <= g+1 (unstable-side correction on C^{0+PaG})
  CorrectionResult<T> expanding(const PiecewiseFun<T>& phi, int j) const {
    check_expanding_pre(j, to_double(phi.a));
    BirkhoffPipeline<T, TT> pipe(run_, phi, popt_);
    auto res = series(pipe, j, copt_.throw_on_divergence);
    res.tag = "expanding(" + std::to_string(j) + ")";
    res.marginal = marginal_;
    return res;
  }

  // h*_j, 0 <= j <= g (bounded-variation correction); non-summability is
  // reported in the result rather than thrown
  CorrectionResult<T> bounded_variation(const PiecewiseFun<T>& phi, int j) const {
    BirkhoffPipeline<T, TT> pipe(run_, phi, popt_);
    auto res = series(pipe, -j, false);
    res.tag = "bv(" + std::to_string(j) + ")";
    return res;
  }

  // h_{-j,i} = h*_j o K_i with K_i(phi) = phi - primitive(h_i(D phi))
  CorrectionResult<T> extended(const PiecewiseFun<T>& phi, int j, int i) const {
    check_extended_pre(j, i, to_double(phi.a));
    PiecewiseFun<T> k_phi = k_operator(phi, i);
    BirkhoffPipeline<T, TT> pipe(run_, k_phi, popt_);
    auto res = series(pipe, -j, copt_.throw_on_divergence);
    res.tag = "extended(-" + std::to_string(j) + "," + std::to_string(i) + ")";
    res.marginal = marginal_;
    return res;
  }

  // h_0 = h*_0 o K on C^{2+PaG}
  CorrectionResult<T> central(const PiecewiseFun<T>& phi) const {
    check_central_pre(to_double(phi.a));
    PiecewiseFun<T> k_phi = central_k_operator(phi);
    BirkhoffPipeline<T, TT> pipe(run_, k_phi, popt_);
    auto res = series(pipe, 0, copt_.throw_on_divergence);
    res.tag = "central";
    res.marginal = marginal_;
    return res;
  }

  // K_i(phi) = phi - primitive(h_i(D phi))
  PiecewiseFun<T> k_operator(const PiecewiseFun<T>& phi, int i) const {
    PiecewiseFun<T> dphi = phi.derivative();
    BirkhoffPipeline<T, TT> pipe(run_, dphi, popt_);
    auto hi = series(pipe, i, copt_.throw_on_divergence);
    auto corr =
        PiecewiseFun<T>::from_gamma(phi.layout, hi.output, std::max<std::size_t>(phi.nodes(), 4))
            .primitive();
    PiecewiseFun<T> out = phi;
    corr *= T(-1);
    out += corr;
    return out;
  }

  // K(phi) for the central correction, linking two derivative levels
  PiecewiseFun<T> central_k_operator(const PiecewiseFun<T>& phi) const {
    int g = filt_.g;
    PiecewiseFun<T> dphi = phi.derivative();
    PiecewiseFun<T> d2phi = dphi.derivative();
    BirkhoffPipeline<T, TT> p2(run_, d2phi, popt_);
    auto w2 = series(p2, 2, copt_.throw_on_divergence);
    auto p1 = PiecewiseFun<T>::from_gamma(phi.layout, w2.output,
                                          std::max<std::size_t>(phi.nodes(), 4))
                  .primitive();
    // psi = D phi - p1 already has a vanishing second-level correction
    PiecewiseFun<T> psi = dphi;
    {
      PiecewiseFun<T> neg = p1;
      neg *= T(-1);
      psi += neg;
    }
    BirkhoffPipeline<T, TT> pp(run_, psi, popt_);
    auto mg = series(pp, -g, copt_.throw_on_divergence);
    PiecewiseFun<T> out = phi;
    {
      auto t1 = p1.primitive();
      t1 *= T(-1);
      out += t1;
      auto t2 = PiecewiseFun<T>::from_gamma(phi.layout, mg.output,
                                            std::max<std::size_t>(phi.nodes(), 4))
                    .primitive();
      t2 *= T(-1);
      out += t2;
    }
    return out;
  }

 private:
  std::vector<T> assemble(const Mat<T>& u0, const std::vector<T>& coeffs) const {
    std::vector<T> out(run_.dim(), T(0));
    for (std::size_t c = 0; c < coeffs.size(); c++)
      axpy(out, coeffs[c], u0.col(c));
    return out;
  }

  std::vector<T> solve_split(const PushedFrame<T>& pf, std::size_t l, int u_index,
                             const std::vector<T>& rhs, double* residual) const {
    std::size_t d = run_.dim();
    std::size_t m = u_dim(u_index, d);
    Mat<T> msys(d, d);
    for (std::size_t c = 0; c < m; c++) msys.set_col(c, pf.frames[l].col(c));
    if (m < d) {
      int e_index = complementary_e_index(u_index, int(d));
      Mat<T> ef = filt_.e_frame(l, e_index);
      for (std::size_t c = 0; c < d - m; c++) msys.set_col(m + c, ef.col(c));
    }
    std::vector<T> sol = gauss_solve(msys, rhs);
    if (residual) {
      auto back = msys * sol;
      using std::abs;
      T err(0), scale(0);
      for (std::size_t i = 0; i < d; i++) {
        err = std::max(err, T(abs(back[i] - rhs[i])));
        scale = std::max(scale, T(abs(rhs[i])));
      }
      if (scale > T(0)) *residual = std::max(*residual, to_double(err / scale));
    }
    sol.resize(m);
    return sol;
  }

  static int complementary_e_index(int u_index, int d) {
    return u_index >= 2 ? u_index : -(d - int(u_dim(u_index, d)));
  }

  void check_expanding_pre(int j, double a) const {
    if (j < 2 || j > filt_.g + 1) throw precondition_error("expanding correction: bad index");
    double l1 = spectrum_sym(filt_.spectrum, 1);
    double gap = spectrum_sym(filt_.spectrum, j - 1) - a * l1;
    marginal_ = std::abs(gap) < filt_.spectrum.confidence[j - 2 < 0 ? 0 : j - 2];
    if (gap <= 0 && !marginal_)
      throw precondition_error("expanding correction: a lambda_1 >= lambda_{j-1}");
  }

  void check_extended_pre(int j, int i, double a) const {
    if (j < 1 || j > filt_.g || i < 2 || i > filt_.g + 1)
      throw precondition_error("extended correction: bad indices");
    const Spectrum& sp = filt_.spectrum;
    double l1 = spectrum_sym(sp, 1);
    double conf = sp.confidence[0];
    double m1 = spectrum_sym(sp, i - 1) - a * l1;
    double rhs = l1 - (j + 1 <= sp.g ? spectrum_sym(sp, j + 1) : 0.0);
    double m2 = rhs - std::max(a * l1, spectrum_sym(sp, i));
    marginal_ = std::abs(m1) < conf || std::abs(m2) < conf;
    if ((m1 <= 0 || m2 <= 0) && !marginal_)
      throw precondition_error("extended correction: spectrum margins violated");
  }

  void check_central_pre(double a) const {
    const Spectrum& sp = filt_.spectrum;
    double l1 = spectrum_sym(sp, 1);
    double rho0 = std::min({l1 - spectrum_sym(sp, 2), l1 * (1 - a), spectrum_sym(sp, sp.g)});
    marginal_ = rho0 < sp.confidence[0];
    if (rho0 <= 0 && !marginal_)
      throw precondition_error("central correction: nonpositive decay margin");
  }

  const CocycleRun<TT>& run_;
  const Filtration<T>& filt_;
  PipelineOptions popt_;
  CorrectionOptions copt_;
  mutable bool marginal_ = false;
};

}  // namespace ietlab
