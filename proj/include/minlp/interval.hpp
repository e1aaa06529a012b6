#pragma once

#include <algorithm>
#include <vector>

#include "minlp/common.hpp"

namespace minlp {

// Closed interval over the extended reals. Arithmetic is outward rounded
// by one ulp per operation so that enclosures survive floating point.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  Interval() = default;
  Interval(double l, double h) : lo(l), hi(h) {}
  static Interval point(double v) { return {v, v}; }
  static Interval entire() { return {-kInf, kInf}; }

  bool empty() const { return lo > hi; }
  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
  double width() const { return hi - lo; }
  double mid() const {
    if (finite()) return 0.5 * (lo + hi);
    if (std::isfinite(lo)) return lo;
    if (std::isfinite(hi)) return hi;
    return 0.0;
  }
  bool contains(double v, double tol = 0.0) const {
    return v >= lo - tol && v <= hi + tol;
  }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }

  Interval intersect(const Interval& o) const {
    return {std::max(lo, o.lo), std::min(hi, o.hi)};
  }
  Interval hull(const Interval& o) const {
    if (empty()) return o;
    if (o.empty()) return *this;
    return {std::min(lo, o.lo), std::max(hi, o.hi)};
  }
};

namespace detail {
inline double stepDown(double v) {
  return std::isfinite(v) ? std::nextafter(v, -kInf) : v;
}
inline double stepUp(double v) {
  return std::isfinite(v) ? std::nextafter(v, kInf) : v;
}
inline Interval widen(Interval r) {
  return {stepDown(r.lo), stepUp(r.hi)};
}
// Product with the convention 0 * inf = 0 (hull semantics over finite
// representatives).
inline double prod(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}
}  // namespace detail

inline Interval operator+(const Interval& a, const Interval& b) {
  return detail::widen({a.lo + b.lo, a.hi + b.hi});
}
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
inline Interval operator-(const Interval& a, const Interval& b) {
  return detail::widen({a.lo - b.hi, a.hi - b.lo});
}
inline Interval operator*(const Interval& a, const Interval& b) {
  using detail::prod;
  double p1 = prod(a.lo, b.lo), p2 = prod(a.lo, b.hi);
  double p3 = prod(a.hi, b.lo), p4 = prod(a.hi, b.hi);
  return detail::widen({std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})});
}
inline Interval operator*(double s, const Interval& a) {
  return Interval::point(s) * a;
}

Interval ivRecip(const Interval& a);                   // 1/a, unbounded across 0
Interval ivPow(const Interval& a, int k);              // k >= 2
Interval ivExp(const Interval& a);
Interval ivLog(const Interval& a);                     // EmptyDomain if a.hi <= 0
Interval ivSqrt(const Interval& a);                    // EmptyDomain if a.hi < 0
Interval ivRootEven(const Interval& a, int k);         // principal root, a >= 0
double signedRoot(double v, int k);                    // odd k

// Per-variable bounds, dense over VarId.
class Box {
 public:
  Box() = default;
  explicit Box(size_t n) : iv_(n) {}
  Box(std::initializer_list<Interval> iv) : iv_(iv) {}

  size_t size() const { return iv_.size(); }
  Interval& operator[](VarId v) { return iv_[v]; }
  const Interval& operator[](VarId v) const { return iv_[v]; }

  bool containedIn(const Box& outer, double tol = 0.0) const {
    for (size_t i = 0; i < iv_.size(); ++i)
      if (iv_[i].lo < outer.iv_[i].lo - tol || iv_[i].hi > outer.iv_[i].hi + tol)
        return false;
    return true;
  }

  auto begin() const { return iv_.begin(); }
  auto end() const { return iv_.end(); }

 private:
  std::vector<Interval> iv_;
};

}  // namespace minlp
