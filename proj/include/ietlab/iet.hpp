#pragma once

#include <optional>
#include <vector>

#include "ietlab/perm.hpp"

namespace ietlab {

// Interval exchange transformation over scalar T. Intervals are half-open
// [l_a, r_a), the map is x -> x + w_a with w = Omega(pi) * lambda.
// Values are immutable after construction; all member functions are const.
template <class T>
struct Iet {
  Perm perm;
  std::vector<T> lambda;  // by letter
  // derived
  std::vector<T> left, right;  // by letter
  std::vector<T> w;            // translation by letter
  std::vector<int> order;      // position -> letter (top order)
  T total = T(0);

  Iet() = default;
  Iet(Perm p, std::vector<T> lam) : perm(std::move(p)), lambda(std::move(lam)) {
    std::size_t d = perm.size();
    if (lambda.size() != d) throw precondition_error("iet: lambda size mismatch");
    for (const T& l : lambda)
      if (!(l > T(0))) throw precondition_error("iet: lengths must be positive");
    if (!perm.irreducible()) throw precondition_error("iet: reducible permutation");
    order.resize(d);
    for (std::size_t l = 0; l < d; l++) order[perm.pi0[l]] = int(l);
    left.assign(d, T(0));
    right.assign(d, T(0));
    T acc(0);
    for (std::size_t pos = 0; pos < d; pos++) {
      int a = order[pos];
      left[a] = acc;
      acc += lambda[a];
      right[a] = acc;
    }
    total = acc;
    IMat om = omega(perm);
    w = mat_vec(om, lambda);
  }

  std::size_t size() const { return perm.size(); }

  // letter of the interval containing x; points within snap*total of a left
  // endpoint are snapped onto it (guards iterated endpoint orbits).
  int locate(const T& x, const T& snap = T(0)) const {
    std::size_t d = size();
    if (snap > T(0)) {
      using std::abs;
      for (std::size_t pos = 0; pos < d; pos++) {
        int a = order[pos];
        if (abs(x - left[a]) <= snap * total) return a;
      }
      if (abs(x - total) <= snap * total) return order[d - 1];
    }
    if (!(x >= T(0) && x < total)) throw precondition_error("iet: point outside domain");
    std::size_t lo = 0, hi = d - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi + 1) / 2;
      if (x >= left[order[mid]]) lo = mid;
      else hi = mid - 1;
    }
    return order[lo];
  }

  T apply_point(const T& x) const { return x + w[locate(x)]; }

  Iet normalized() const {
    std::vector<T> lam = lambda;
    for (T& l : lam) l /= total;
    return Iet(perm, lam);
  }
};

template <class T>
struct KeaneReport {
  bool ok = true;
  // witness when violated: T^m l_alpha == l_beta
  long m = 0;
  int alpha = 0, beta = 0;
};

// Orbits of left endpoints may not hit other left endpoints (with
// pi0(beta) != 1, i.e. l_beta != 0) within `depth` iterates, up to `tol`.
template <class T>
KeaneReport<T> keane_check(const Iet<T>& iet, long depth, std::optional<T> tol_opt = std::nullopt) {
  using std::abs;
  std::size_t d = iet.size();
  T tol = tol_opt ? *tol_opt : T(1e-10) * iet.total;
  KeaneReport<T> rep;
  for (std::size_t a = 0; a < d; a++) {
    T x = iet.left[a];
    for (long m = 1; m <= depth; m++) {
      x = iet.apply_point(x);
      for (std::size_t b = 0; b < d; b++) {
        if (iet.perm.pi0[b] == 0) continue;  // l_beta = 0 excluded
        if (abs(x - iet.left[b]) <= tol) {
          rep.ok = false;
          rep.m = m;
          rep.alpha = int(a);
          rep.beta = int(b);
          return rep;
        }
      }
    }
  }
  return rep;
}

}  // namespace ietlab
