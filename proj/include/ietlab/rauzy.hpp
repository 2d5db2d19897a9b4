#pragma once

#include <functional>
#include <map>
#include <variant>
#include <vector>

#include "ietlab/exact.hpp"
#include "ietlab/iet.hpp"

namespace ietlab {

// One elementary induction step: first return to [0, max(l_top, l_bot)).
template <class T>
struct RauzyStep {
  int eps = 0;     // 0: top length wins, 1: bottom length wins
  int winner = 0;  // letter pi_eps^{-1}(d)
  int loser = 0;   // letter pi_{1-eps}^{-1}(d)
  IMat A;          // Id + E_{winner,loser}; lambda_next = A^{-1} lambda
  Iet<T> next;
};

template <class T>
RauzyStep<T> rauzy_step(const Iet<T>& iet, const T& tie_tol = T(0)) {
  using std::abs;
  std::size_t d = iet.size();
  int top = iet.perm.letter_at(0, int(d) - 1);
  int bot = iet.perm.letter_at(1, int(d) - 1);
  T lt = iet.lambda[top], lb = iet.lambda[bot];
  bool tie;
  if constexpr (std::numeric_limits<T>::is_integer) {
    tie = lt == lb;
  } else {
    T tol = tie_tol > T(0) ? tie_tol : T(1e-14) * iet.total;
    tie = abs(lt - lb) <= tol;
  }
  if (tie)
    throw precondition_error("rauzy_step: length tie at the right end (Keane violation)");

  RauzyStep<T> st;
  st.eps = lt > lb ? 0 : 1;
  st.winner = st.eps == 0 ? top : bot;
  st.loser = st.eps == 0 ? bot : top;
  st.A = imat_identity(d);
  st.A(st.winner, st.loser) = 1;

  std::vector<T> lam = iet.lambda;
  lam[st.winner] = lam[st.winner] - lam[st.loser];

  // successor permutation: the winner's row is unchanged; in the other row
  // the loser is reinserted just after the winner.
  Perm p = iet.perm;
  std::vector<int>& moved = st.eps == 0 ? p.pi1 : p.pi0;
  int wp = moved[st.winner];
  int lp = moved[st.loser];  // == d-1
  for (std::size_t l = 0; l < d; l++)
    if (moved[l] > wp && moved[l] < lp) moved[l]++;
  moved[st.loser] = wp + 1;

  st.next = Iet<T>(p, lam);
  return st;
}

// Acceleration policies. Zorich groups maximal runs of equal type; an
// optional cap splits the rare huge blocks (large partial quotients) so a
// single level cannot dominate downstream pipelines.
struct ZorichPolicy {
  long max_block_steps = 1000000;
};
struct BalancedPolicy {
  double kappa_star;
};
struct FixedPolicy {
  std::vector<long> cuts;  // elementary indices n_1 < n_2 < ...
};
using AccelPolicy = std::variant<ZorichPolicy, BalancedPolicy, FixedPolicy>;

template <class T>
struct Level {
  long n = 0;          // elementary step count at this level
  Iet<T> iet;          // T^(k)
  double kappa = 0;    // max |I^(k)| / |I^(k)_a|
  double log_norm_q = 0;  // log ||Q(0,k)|| (row-sum norm)
};

// One-step tower data between consecutive acceleration levels. Floor j of
// the column over letter `beta` sits in level-k interval gamma[j] at offset
// off[j] from its left endpoint (level-local coordinates).
template <class T>
struct OneStep {
  std::vector<std::vector<int>> gamma;  // [beta][j]
  std::vector<std::vector<T>> off;      // [beta][j]
};

// Accelerated Rauzy-Veech history: levels T^(k), cocycle matrices Z(k),
// cached prefix products Q(0,k), and one-step tower geometry.
template <class T>
struct CocycleRun {
  Iet<T> base;
  std::vector<Level<T>> levels;  // levels[k], k = 0..k_max
  std::vector<IMat> Z;           // Z[k] = Z(k+1), k = 0..k_max-1
  std::vector<int> eps_path;     // elementary step types

  mutable std::vector<IMat> q_prefix;  // Q(0,k) cache
  mutable std::vector<OneStep<T>> onestep;  // [k]: level k -> k+1

  std::size_t depth() const { return Z.size(); }
  std::size_t dim() const { return base.size(); }

  const Iet<T>& level_iet(std::size_t k) const { return levels.at(k).iet; }

  const IMat& Q(std::size_t k) const {  // Q(0,k)
    build_q_prefix(k);
    return q_prefix[k];
  }

  IMat Q(std::size_t k, std::size_t l) const {  // Q(k,l) = Z(l)...Z(k+1)
    if (l < k) throw precondition_error("Q(k,l): need k <= l");
    IMat m = imat_identity(dim());
    for (std::size_t j = k; j < l; j++) m = Z[j] * m;
    return m;
  }

  double log_norm_Z(std::size_t k) const { return log_norm_rowsum(Z.at(k)); }

  // w^(k) = Omega(pi^(k)) lambda^(k); equals Q(0,k) w^(0) as vectors.
  std::vector<T> translation_vector(std::size_t k) const { return levels.at(k).iet.w; }

  const OneStep<T>& one_step(std::size_t k) const {
    build_onestep(k);
    return onestep[k];
  }

 private:
  void build_q_prefix(std::size_t k) const {
    if (q_prefix.empty()) q_prefix.push_back(imat_identity(dim()));
    while (q_prefix.size() <= k) {
      std::size_t j = q_prefix.size() - 1;
      if (j >= Z.size()) throw precondition_error("Q(0,k): k beyond run depth");
      q_prefix.push_back(Z[j] * q_prefix.back());
    }
  }

  void build_onestep(std::size_t k) const {
    if (onestep.size() > k && !onestep[k].gamma.empty()) return;
    if (onestep.size() <= k) onestep.resize(k + 1);
    if (k + 1 >= levels.size()) throw precondition_error("one_step: level beyond run depth");
    const Iet<T>& cur = levels[k].iet;
    const Iet<T>& nxt = levels[k + 1].iet;
    std::size_t d = dim();
    OneStep<T> os;
    os.gamma.resize(d);
    os.off.resize(d);
    T snap = snap_tol();
    for (std::size_t b = 0; b < d; b++) {
      bigint height(0);
      for (std::size_t g = 0; g < d; g++) height += Z[k](b, g);
      T p = nxt.left[b];
      for (bigint j = 0; j < height; j++) {
        int g = cur.locate(p, snap);
        os.gamma[b].push_back(g);
        os.off[b].push_back(p - cur.left[g]);
        p = p + cur.w[g];
      }
      using std::abs;
      if (!(p < nxt.total + snap * cur.total))
        throw ietlab_error("one_step: return point drifted outside the induced interval");
    }
    onestep[k] = std::move(os);
  }

  T snap_tol() const {
    if constexpr (std::numeric_limits<T>::is_integer) {
      return T(0);
    } else {
      T eps = std::numeric_limits<T>::epsilon();
      using std::sqrt;
      return sqrt(eps);
    }
  }
};

struct AccelDiagnostics {
  double achieved_kappa = 0;
};

template <class T>
double balance_of(const Iet<T>& iet) {
  T mn = iet.lambda[0];
  for (const T& l : iet.lambda) mn = std::min(mn, l);
  if constexpr (std::numeric_limits<T>::is_integer) {
    return bigratio(iet.total, mn);
  } else {
    return to_double(iet.total / mn);
  }
}

// Run the induction with the given acceleration policy for k_max levels.
// `max_elementary_per_level` bounds the work of a single acceleration step;
// exceeding it raises a diagnostic error carrying the achieved balance.
template <class T>
CocycleRun<T> accelerate(const Iet<T>& iet, const AccelPolicy& policy, std::size_t k_max,
                         long max_elementary_per_level = 100000) {
  CocycleRun<T> run;
  run.base = iet;
  Level<T> lv0{0, iet, balance_of(iet), 0.0};
  run.levels.push_back(lv0);

  Iet<T> cur = iet;
  long n = 0;
  const FixedPolicy* fixed = std::get_if<FixedPolicy>(&policy);
  std::size_t fixed_idx = 0;

  for (std::size_t k = 0; k < k_max; k++) {
    IMat group = imat_identity(iet.size());
    long taken = 0;
    int first_eps = -1;
    while (true) {
      if (taken >= max_elementary_per_level) {
        AccelDiagnostics diag{balance_of(cur)};
        throw convergence_error(
            "accelerate: step budget exhausted before cut (achieved kappa " +
                std::to_string(diag.achieved_kappa) + ")",
            {diag.achieved_kappa});
      }
      RauzyStep<T> st = rauzy_step(cur);
      if (first_eps < 0) first_eps = st.eps;
      if (const ZorichPolicy* zp = std::get_if<ZorichPolicy>(&policy)) {
        // group is a maximal run of equal type: peek before committing
        if (st.eps != first_eps || taken >= zp->max_block_steps) break;
      }
      group = group * st.A;  // product in application order
      run.eps_path.push_back(st.eps);
      cur = st.next;
      n++;
      taken++;
      if (const BalancedPolicy* bp = std::get_if<BalancedPolicy>(&policy)) {
        if (balance_of(cur) <= bp->kappa_star) break;
      } else if (fixed) {
        if (fixed_idx < fixed->cuts.size() && n >= fixed->cuts[fixed_idx]) {
          fixed_idx++;
          break;
        }
        if (fixed_idx >= fixed->cuts.size())
          throw precondition_error("accelerate: fixed cut list exhausted");
      }
    }
    IMat z = group.transposed();
    run.Z.push_back(z);
    Level<T> lv;
    lv.n = n;
    lv.iet = cur;
    lv.kappa = balance_of(cur);
    run.levels.push_back(lv);
  }
  // fill log ||Q(0,k)|| mirrors without materializing big products in floats
  {
    Mat<double> qhat = Mat<double>::identity(iet.size());
    double scale = 0;
    for (std::size_t k = 0; k < run.Z.size(); k++) {
      qhat = to_real<double>(run.Z[k]) * qhat;
      double nrm = to_double(norm_rowsum(qhat));
      if (nrm > 1e100) {
        for (auto& v : qhat.a) v /= nrm;
        scale += std::log(nrm);
        nrm = 1.0;
      }
      run.levels[k + 1].log_norm_q = scale + std::log(to_double(norm_rowsum(qhat)));
    }
  }
  return run;
}

// Rokhlin tower over level k: floors T^i(I^(k)_a), 0 <= i < Q_a(k), at
// level-0 coordinates. Cost is the number of floors; intended for small k.
template <class T>
struct Towers {
  std::vector<bigint> heights;                    // per letter
  std::vector<std::vector<std::pair<T, T>>> floors;  // [letter][i] = [a,b)
};

template <class T>
Towers<T> towers(const CocycleRun<T>& run, std::size_t k, bigint floor_budget = bigint(2000000)) {
  if (k >= run.levels.size()) throw precondition_error("towers: k beyond run");
  const Iet<T>& base = run.base;
  const Iet<T>& lev = run.level_iet(k);
  IMat q = run.Q(k);
  std::size_t d = run.dim();
  Towers<T> tw;
  tw.heights.resize(d);
  bigint total(0);
  for (std::size_t a = 0; a < d; a++) {
    bigint h(0);
    for (std::size_t b = 0; b < d; b++) h += q(a, b);
    tw.heights[a] = h;
    total += h;
  }
  if (total > floor_budget)
    throw precondition_error("towers: floor count exceeds budget at this level");
  tw.floors.resize(d);
  for (std::size_t a = 0; a < d; a++) {
    T lo = lev.left[a], len = lev.lambda[a];
    long h = tw.heights[a].template convert_to<long>();
    tw.floors[a].reserve(h);
    T x = lo;
    for (long i = 0; i < h; i++) {
      tw.floors[a].emplace_back(x, x + len);
      // translate the whole floor: it sits inside one exchanged interval
      int g = base.locate(x, std::numeric_limits<T>::epsilon() * T(1e4));
      x = x + base.w[g];
    }
  }
  return tw;
}

template <class T>
struct RtcReport {
  bool ok = false;
  long p = 0;           // tower height found
  double measure = 0;   // p * |I^(k)| / |I|, fraction of the base interval
};

// Largest p <= min_a Q_a(k) such that T^i(I^(k)), i < p, are disjoint
// intervals; success iff their total measure reaches delta * |I|.
template <class T>
RtcReport<T> rtc_check(const CocycleRun<T>& run, std::size_t k, double delta,
                       long p_budget = 2000000) {
  const Iet<T>& base = run.base;
  const Iet<T>& lev = run.level_iet(k);
  IMat q = run.Q(k);
  std::size_t d = run.dim();
  bigint minq;
  for (std::size_t a = 0; a < d; a++) {
    bigint h(0);
    for (std::size_t b = 0; b < d; b++) h += q(a, b);
    if (a == 0 || h < minq) minq = h;
  }
  long cap = minq > p_budget ? p_budget : minq.template convert_to<long>();

  std::map<T, T> occupied;  // left -> right, disjoint sorted floors
  auto disjoint_insert = [&](const T& a, const T& b) {
    auto it = occupied.upper_bound(a);
    if (it != occupied.begin()) {
      auto prev = std::prev(it);
      if (prev->second > a) return false;
    }
    if (it != occupied.end() && it->first < b) return false;
    occupied.emplace(a, b);
    return true;
  };

  RtcReport<T> rep;
  T a = T(0), b = lev.total;
  long p = 0;
  while (p < cap) {
    if (!disjoint_insert(a, b)) break;
    p++;
    // need T continuous on [a,b): both endpoints in the same interval
    int ga = base.locate(a, std::numeric_limits<T>::epsilon() * T(1e4));
    if (!(b <= base.right[ga] + std::numeric_limits<T>::epsilon() * base.total)) break;
    a = a + base.w[ga];
    b = a + lev.total;
  }
  rep.p = p;
  if constexpr (std::numeric_limits<T>::is_integer) {
    rep.measure = double(p) * bigratio(lev.total, base.total);
  } else {
    rep.measure = double(p) * to_double(lev.total / base.total);
  }
  rep.ok = rep.measure >= delta && p >= 1;
  return rep;
}

}  // namespace ietlab
