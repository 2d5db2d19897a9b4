#pragma once

#include <vector>

#include "ietlab/flags.hpp"
#include "ietlab/pfun.hpp"
#include "ietlab/rauzy.hpp"

namespace ietlab {

template <class T, class TT>
Layout<T> layout_of(const CocycleRun<TT>& run, std::size_t k) {
  // normalize so the base interval has unit length
  return Layout<T>::template from_iet<TT>(run.level_iet(k), run.base.total);
}

struct PipelineOptions {
  std::size_t min_nodes = 48;        // for inputs with atoms
  std::size_t max_nodes = 384;
  double capture_digits = 32;        // target accuracy of smooth-tail capture
  bool track_stats = true;
};

template <class T>
struct LevelStats {
  std::vector<T> means;
  double sup = 0, l1 = 0;
  bool sup_unbounded = false;
  double capture_error = 0;  // trailing-coefficient estimate, absolute
};

// Special Birkhoff sums S(k)phi computed level by level through the
// one-step towers. Polynomial parts collapse exactly; atoms transport to
// the matching level-(k+1) endpoint when their floor is flush with it and
// are otherwise smooth on the floor and absorbed into the Chebyshev part.
template <class T, class TT = bigint>
struct BirkhoffPipeline {
  const CocycleRun<TT>* run = nullptr;
  PipelineOptions opt;
  std::size_t start = 0;               // phi lives on level `start`
  std::vector<PiecewiseFun<T>> level;  // level[j] = S(start, start + j) phi
  std::vector<LevelStats<T>> stats;

  BirkhoffPipeline() = default;
  BirkhoffPipeline(const CocycleRun<TT>& r, PiecewiseFun<T> phi, PipelineOptions o = {},
                   std::size_t start_level = 0)
      : run(&r), opt(o), start(start_level) {
    level.push_back(std::move(phi));
    if (opt.track_stats) stats.push_back(make_stats(level[0]));
  }

  std::size_t depth() const { return level.size() - 1; }

  const PiecewiseFun<T>& at(std::size_t k) {
    extend_to(k);
    return level[k];
  }

  void extend_to(std::size_t k) {
    while (depth() < k) step();
  }

  void step() {
    std::size_t k = start + depth();
    if (k + 1 >= run->levels.size())
      throw precondition_error("birkhoff pipeline: run depth exhausted");
    const OneStep<TT>& os = run->one_step(k);
    const PiecewiseFun<T>& src = level.back();
    Layout<T> lay = layout_of<T>(*run, k + 1);
    std::size_t d = lay.size();

    // anchored-atom transport needs to decide exactly whether a floor is
    // flush with an interval end; with integer lengths this is exact, with
    // floating runs we snap within a wide margin of the working precision
    auto is_flush = [&](const TT& gap, const TT& scale) {
      if constexpr (std::numeric_limits<TT>::is_integer) {
        return gap == TT(0);
      } else {
        using std::abs;
        using std::sqrt;
        TT eps = std::numeric_limits<TT>::epsilon();
        return abs(gap) <= sqrt(eps) * scale;
      }
    };

    // choose the node count from the distance of the nearest non-flush
    // anchor, relative to the target interval length
    std::size_t n_nodes;
    if (!src.has_atoms()) {
      n_nodes = src.nodes();
    } else {
      double delta = 1.0;
      const auto& cur = run->level_iet(k);
      const auto& nxt = run->level_iet(k + 1);
      for (std::size_t b = 0; b < d; b++) {
        for (std::size_t j = 0; j < os.gamma[b].size(); j++) {
          int g = os.gamma[b][j];
          if (src.pieces[g].atoms.empty()) continue;
          TT off = os.off[b][j];
          TT right_gap = cur.lambda[g] - off - nxt.lambda[b];
          for (const auto& at : src.pieces[g].atoms) {
            const TT& gap = at.left ? off : right_gap;
            if (is_flush(gap, cur.lambda[g])) continue;  // transported exactly
            double rel = ratio(gap, nxt.lambda[b]);
            delta = std::min(delta, rel);
          }
        }
      }
      double rho = 1.0 + 2.0 * delta + 2.0 * std::sqrt(delta * (1.0 + delta));
      double need = opt.capture_digits * std::log(10.0) / std::log(rho);
      // restriction of a piece is only exact up to its own content: keep
      // enough nodes to carry the source's effective degree through
      std::size_t src_need = 0;
      for (const auto& p : src.pieces)
        src_need = std::max(src_need, effective_degree(cheb_coeffs(p.vals),
                                                       std::pow(10.0, -opt.capture_digits)) + 6);
      n_nodes = std::max({opt.min_nodes, std::size_t(need) + 2, src_need});
      n_nodes = std::min(opt.max_nodes, quantize_nodes(n_nodes));
    }

    PiecewiseFun<T> out = PiecewiseFun<T>::zero(lay, n_nodes);
    out.n = src.n;
    out.a = src.a;
    const auto& tab = ChebTable<T>::get(n_nodes);
    const auto& cur = run->level_iet(k);
    const auto& nxt = run->level_iet(k + 1);

    std::vector<std::vector<T>> src_coeffs(d);
    for (std::size_t g = 0; g < d; g++) src_coeffs[g] = cheb_coeffs(src.pieces[g].vals);

    for (std::size_t b = 0; b < d; b++) {
      const T len_b = lay.lengths[b];
      std::vector<T>& acc = out.pieces[b].vals;
      for (std::size_t j = 0; j < os.gamma[b].size(); j++) {
        int g = os.gamma[b][j];
        T off = to_unit(os.off[b][j]);
        const T len_g = src.layout.lengths[g];
        // chebyshev part of the source, restricted to the floor
        for (std::size_t i = 0; i <= n_nodes; i++) {
          T x = off + tab.t[i] * len_b;
          acc[i] += cheb_clenshaw(src_coeffs[g], x / len_g);
        }
        if (src.pieces[g].atoms.empty()) continue;
        bool flush_left = is_flush(os.off[b][j], cur.lambda[g]);
        bool flush_right =
            is_flush(TT(cur.lambda[g] - os.off[b][j] - nxt.lambda[b]), cur.lambda[g]);
        for (const auto& at : src.pieces[g].atoms) {
          if (at.left && flush_left) {
            out.add_atom(b, at);
          } else if (!at.left && flush_right) {
            out.add_atom(b, at);
          } else {
            for (std::size_t i = 0; i <= n_nodes; i++) {
              T x = off + tab.t[i] * len_b;
              T s = at.left ? x : len_g - x;
              acc[i] += at.eval(s);
            }
          }
        }
      }
    }
    level.push_back(std::move(out));
    if (opt.track_stats) stats.push_back(make_stats(level.back()));
  }

  LevelStats<T> make_stats(const PiecewiseFun<T>& f) const {
    LevelStats<T> st;
    const ScanRule<T>& rule = ScanRule<T>::get();
    st.means.resize(f.pieces.size());
    double cap = 0;
    using std::abs;
    T sup(0), l1(0);
    st.sup_unbounded = false;
    for (std::size_t al = 0; al < f.pieces.size(); al++) {
      auto c = cheb_coeffs(f.pieces[al].vals);
      T v = cheb_integral_from_coeffs(c) * f.layout.lengths[al];
      v += f.atom_integral(al);
      st.means[al] = v / f.layout.lengths[al];
      cap = std::max(cap, cheb_tail_from_coeffs(c));
      for (const auto& at : f.pieces[al].atoms)
        if (at.coef != T(0) && (at.exponent < T(0) || (at.exponent == T(0) && at.logpow > 0)))
          st.sup_unbounded = true;
      for (const auto& nv : f.pieces[al].vals) sup = std::max(sup, T(abs(nv)));
      auto sv = scan_values(f.pieces[al], f.layout.lengths[al]);
      T piece_l1(0);
      for (std::size_t i = 0; i < sv.size(); i++) {
        sup = std::max(sup, T(abs(sv[i])));
        if (rule.weight[i] != T(0)) piece_l1 += rule.weight[i] * abs(sv[i]);
      }
      l1 += piece_l1 * f.layout.lengths[al];
    }
    st.capture_error = cap;
    st.sup = to_double(sup);
    st.l1 = to_double(l1);
    return st;
  }

  // log(sup / |I^(k)|-normalized L1) trajectories for rate fitting
  std::vector<double> sup_trajectory(std::size_t k0, std::size_t k1) {
    extend_to(k1);
    std::vector<double> v;
    for (std::size_t k = k0; k <= k1; k++) v.push_back(stats[k].sup);
    return v;
  }
  std::vector<double> l1_density_trajectory(std::size_t k0, std::size_t k1) {
    extend_to(k1);
    std::vector<double> v;
    for (std::size_t k = k0; k <= k1; k++) {
      double len = ratio_total(k);
      v.push_back(stats[k].l1 / len);
    }
    return v;
  }

 private:
  T to_unit(const TT& x) const { return T(x) / T(run->base.total); }
  static double ratio(const TT& a, const TT& b) {
    if constexpr (std::numeric_limits<TT>::is_integer) {
      return bigratio(a, b);
    } else {
      return to_double(a / b);
    }
  }
  double ratio_total(std::size_t j) const {
    return ratio(run->level_iet(start + j).total, run->base.total);
  }
};

// Direct evaluation of S(k)phi at one point by walking the tower floors;
// cost is the return time, usable only at small k. Oracle for the pipeline.
template <class T, class TT>
T birkhoff_sum_direct(const CocycleRun<TT>& run, const PiecewiseFun<T>& phi, std::size_t k,
                      int beta, const T& x_local) {
  const Iet<TT>& base = run.base;
  const Iet<TT>& lev = run.level_iet(k);
  IMat q = run.Q(k);
  bigint h(0);
  for (std::size_t b = 0; b < run.dim(); b++) h += bigint(q(beta, b));
  long steps = h.template convert_to<long>();
  T unit = T(base.total);
  // absolute position of the point, in base units
  T pos = (T(lev.left[beta]) + x_local * unit) / unit;
  T acc(0);
  T snap = std::numeric_limits<T>::is_integer ? T(0) : std::numeric_limits<T>::epsilon() * T(1e4);
  std::vector<T> left(run.dim()), len(run.dim()), w(run.dim());
  for (std::size_t a = 0; a < run.dim(); a++) {
    left[a] = T(base.left[a]) / unit;
    len[a] = T(base.lambda[a]) / unit;
    w[a] = T(base.w[a]) / unit;
  }
  for (long i = 0; i < steps; i++) {
    // locate in base layout (unit-normalized coordinates)
    int g = -1;
    for (std::size_t a = 0; a < run.dim(); a++) {
      T rel = pos - left[a];
      if (rel >= -snap && rel < len[a] + snap && (g < 0 || rel >= T(0))) g = int(a);
    }
    if (g < 0) throw ietlab_error("birkhoff_sum_direct: point escaped the layout");
    acc += phi.eval_local(g, pos - left[g]);
    pos += w[g];
  }
  return acc;
}

}  // namespace ietlab
