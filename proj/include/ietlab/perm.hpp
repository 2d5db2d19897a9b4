#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "ietlab/bigmat.hpp"
#include "ietlab/common.hpp"

namespace ietlab {

// Pair of bijections from a d-letter alphabet onto positions 0..d-1
// (top row pi0, bottom row pi1). Letters are indices into `names`.
struct Perm {
  std::vector<std::string> names;  // letter -> display symbol
  std::vector<int> pi0, pi1;       // letter -> position (0-based)

  std::size_t size() const { return pi0.size(); }

  static Perm from_rows(const std::vector<std::string>& top,
                        const std::vector<std::string>& bottom) {
    Perm p;
    p.names = top;
    std::size_t d = top.size();
    if (bottom.size() != d) throw precondition_error("permutation rows differ in length");
    p.pi0.assign(d, -1);
    p.pi1.assign(d, -1);
    for (std::size_t pos = 0; pos < d; pos++) p.pi0[pos] = int(pos);
    for (std::size_t pos = 0; pos < d; pos++) {
      std::size_t letter = d;
      for (std::size_t l = 0; l < d; l++)
        if (top[l] == bottom[pos]) letter = l;
      if (letter == d) throw precondition_error("bottom row is not a permutation of the top row");
      p.pi1[letter] = int(pos);
    }
    return p;
  }

  // Top row id, bottom row given as positions of the top letters, 1-based,
  // e.g. symmetric_d(4) == from_rows({A,B,C,D},{D,C,B,A}).
  static Perm from_bottom(const std::vector<int>& bottom_one_based) {
    std::size_t d = bottom_one_based.size();
    std::vector<std::string> top(d), bottom(d);
    for (std::size_t i = 0; i < d; i++) top[i] = std::string(1, char('A' + i));
    for (std::size_t i = 0; i < d; i++) bottom[i] = top[bottom_one_based[i] - 1];
    return from_rows(top, bottom);
  }

  static Perm symmetric(std::size_t d) {
    std::vector<int> bot(d);
    for (std::size_t i = 0; i < d; i++) bot[i] = int(d - i);
    return from_bottom(bot);
  }

  int letter_at(int eps, int pos) const {
    const auto& pi = eps == 0 ? pi0 : pi1;
    for (std::size_t l = 0; l < pi.size(); l++)
      if (pi[l] == pos) return int(l);
    throw ietlab_error("letter_at: bad position");
  }

  bool irreducible() const {
    std::size_t d = size();
    // pi1(pi0^{-1}{0..k}) == {0..k} for some k < d-1 means reducible
    std::vector<int> inv0(d);
    for (std::size_t l = 0; l < d; l++) inv0[pi0[l]] = int(l);
    int maxseen = -1;
    for (std::size_t k = 0; k + 1 < d; k++) {
      maxseen = std::max(maxseen, pi1[inv0[k]]);
      if (maxseen == int(k)) return false;
    }
    return true;
  }

  bool operator==(const Perm& o) const { return pi0 == o.pi0 && pi1 == o.pi1; }
};

// Antisymmetric intersection form: +1 iff pi1(a) > pi1(b) and pi0(a) < pi0(b).
inline IMat omega(const Perm& p) {
  if (!p.irreducible()) throw precondition_error("omega: reducible permutation");
  std::size_t d = p.size();
  IMat m(d, d);
  for (std::size_t a = 0; a < d; a++)
    for (std::size_t b = 0; b < d; b++) {
      if (p.pi1[a] > p.pi1[b] && p.pi0[a] < p.pi0[b]) m(a, b) = 1;
      else if (p.pi1[a] < p.pi1[b] && p.pi0[a] > p.pi0[b]) m(a, b) = -1;
    }
  return m;
}

// genus g and number of marked points gamma of the suspension class,
// derived from rank(omega) = 2g and d = 2g + gamma - 1.
inline std::pair<int, int> genus_and_marks(const Perm& p) {
  IMat om = omega(p);
  // integer rank via fraction-free elimination
  std::size_t d = p.size(), rank = 0;
  Mat<double> m = to_real<double>(om);
  for (std::size_t c = 0; c < d && rank < d; c++) {
    std::size_t piv = rank;
    for (std::size_t i = rank; i < d; i++)
      if (std::abs(m(i, c)) > std::abs(m(piv, c))) piv = i;
    if (std::abs(m(piv, c)) < 1e-9) continue;
    for (std::size_t j = 0; j < d; j++) std::swap(m(piv, j), m(rank, j));
    for (std::size_t i = rank + 1; i < d; i++) {
      double f = m(i, c) / m(rank, c);
      for (std::size_t j = 0; j < d; j++) m(i, j) -= f * m(rank, j);
    }
    rank++;
  }
  int g = int(rank) / 2;
  int gamma = int(d) - 2 * g + 1;
  return {g, gamma};
}

}  // namespace ietlab
