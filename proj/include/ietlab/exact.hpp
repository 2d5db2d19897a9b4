#pragma once

#include <random>

#include "ietlab/iet.hpp"

namespace ietlab {

// Quotient of big integers as double, safe against overflow of either side.
inline double bigratio(const bigint& num, const bigint& den) {
  if (num == 0) return 0.0;
  if (den == 0) throw ietlab_error("bigratio: zero denominator");
  long shift = 0;
  bigint n = abs(num), d = abs(den);
  long bn = long(boost::multiprecision::msb(n));
  long bd = long(boost::multiprecision::msb(d));
  // align both to ~60 bits
  if (bn > 60) { n >>= (bn - 60); shift += (bn - 60); }
  if (bd > 60) { d >>= (bd - 60); shift -= (bd - 60); }
  double r = n.convert_to<double>() / d.convert_to<double>() * std::pow(2.0, double(shift));
  bool neg = (num < 0) != (den < 0);
  return neg ? -r : r;
}

inline double log_big(const bigint& n) {
  if (n <= 0) throw ietlab_error("log_big: nonpositive");
  long b = long(boost::multiprecision::msb(n));
  bigint shifted = b > 52 ? bigint(n >> (b - 52)) : n;
  return std::log(shifted.convert_to<double>()) + std::max(0L, b - 52) * std::log(2.0);
}

// Lengths as integers make the induction path exact: floating Rauzy paths
// lose the true combinatorics after O(precision / lyapunov) steps, while an
// integer path stays valid until the lengths are exhausted (roughly
// bits * ln 2 / lambda_1 elementary steps).
inline Iet<bigint> exact_iet(const Perm& p, const std::vector<double>& lambda, unsigned bits) {
  if (bits < 64) throw precondition_error("exact_iet: need at least 64 bits");
  std::vector<bigint> lam(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); i++) {
    long long hi = std::llround(lambda[i] * 9007199254740992.0);  // 2^53
    if (hi <= 0) throw precondition_error("exact_iet: nonpositive length");
    lam[i] = bigint(hi) << (bits - 53);
    // perturb the low bits deterministically; exact rational relations in
    // the input would otherwise produce early induction ties
    lam[i] |= (lam[i] >> 7) & bigint((1u << 16) - 1);
    lam[i] |= 1;
  }
  return Iet<bigint>(p, lam);
}

inline Iet<bigint> random_exact_iet(const Perm& p, std::mt19937_64& rng, unsigned bits) {
  std::vector<bigint> lam(p.size());
  for (auto& l : lam) {
    bigint v(0);
    for (unsigned got = 0; got < bits; got += 64) {
      v <<= 64;
      v += bigint(rng());
    }
    l = v | 1;
  }
  return Iet<bigint>(p, lam);
}

}  // namespace ietlab
