#include "minlp/interval.hpp"

namespace minlp {

Interval ivRecip(const Interval& a) {
  if (a.lo == 0.0 && a.hi == 0.0) throw EmptyDomain("reciprocal of [0,0]");
  if (a.lo > 0.0 || a.hi < 0.0)
    return detail::widen({1.0 / a.hi, 1.0 / a.lo});
  if (a.lo == 0.0) return detail::widen({1.0 / a.hi, kInf});
  if (a.hi == 0.0) return detail::widen({-kInf, 1.0 / a.lo});
  return Interval::entire();  // straddles zero
}

static double ipow(double b, int k) {
  double r = 1.0;
  double p = b;
  for (int e = k; e > 0; e >>= 1) {
    if (e & 1) r *= p;
    p *= p;
  }
  return r;
}

Interval ivPow(const Interval& a, int k) {
  if (k % 2 == 0) {
    double m1 = ipow(std::fabs(a.lo), k), m2 = ipow(std::fabs(a.hi), k);
    double hi = std::max(m1, m2);
    double lo = a.contains(0.0) ? 0.0 : std::min(m1, m2);
    return detail::widen({lo, hi});
  }
  return detail::widen({ipow(a.lo, k), ipow(a.hi, k)});
}

Interval ivExp(const Interval& a) {
  return detail::widen({std::isfinite(a.lo) ? std::exp(a.lo) : (a.lo < 0 ? 0.0 : kInf),
                        std::isfinite(a.hi) ? std::exp(a.hi) : (a.hi < 0 ? 0.0 : kInf)});
}

Interval ivLog(const Interval& a) {
  if (a.hi <= 0.0) throw EmptyDomain("log of nonpositive interval");
  double lo = a.lo > 0.0 ? std::log(a.lo) : -kInf;
  return detail::widen({lo, std::isfinite(a.hi) ? std::log(a.hi) : kInf});
}

Interval ivSqrt(const Interval& a) {
  if (a.hi < 0.0) throw EmptyDomain("sqrt of negative interval");
  double lo = a.lo > 0.0 ? std::sqrt(a.lo) : 0.0;
  return detail::widen({lo, std::isfinite(a.hi) ? std::sqrt(a.hi) : kInf});
}

Interval ivRootEven(const Interval& a, int k) {
  Interval c = a.intersect({0.0, kInf});
  if (c.empty()) return c;
  double lo = std::pow(c.lo, 1.0 / k);
  double hi = std::isfinite(c.hi) ? std::pow(c.hi, 1.0 / k) : kInf;
  return detail::widen({lo, hi});
}

double signedRoot(double v, int k) {
  if (!std::isfinite(v)) return v;
  return v < 0 ? -std::pow(-v, 1.0 / k) : std::pow(v, 1.0 / k);
}

}  // namespace minlp
