/* -----------------------------------------------------------
 * Outward-rounded interval arithmetic on binary64 endpoints.
 *
 * Directed rounding is realized by nudging round-to-nearest
 * results to the adjacent representable number whenever the
 * residual term (2Sum / fma) shows the result is not exact.
 * This keeps every operation enclosure-safe without touching
 * the global FPU rounding mode.
 * ----------------------------------------------------------- */

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <stdexcept>

namespace fhn {

struct DivisionByZeroInterval : std::runtime_error {
  DivisionByZeroInterval() : std::runtime_error("interval division by an interval containing zero") {}
};

namespace rnd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kMax = std::numeric_limits<double>::max();
// Below this magnitude the fma residual may itself be inexact (subnormal
// range), so results there are always nudged.
inline constexpr double kTiny = 0x1p-1021;

inline double next_down(double x) { return std::nextafter(x, -kInf); }
inline double next_up(double x) { return std::nextafter(x, kInf); }

inline double add_down(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) {
    if (std::isnan(s)) return -kInf;
    if (std::isinf(a) || std::isinf(b)) return s;
    return s > 0 ? kMax : -kInf;
  }
  double bv = s - a;
  double err = (a - (s - bv)) + (b - bv);
  if (std::isnan(err) || err < 0) return next_down(s);
  return s;
}

inline double add_up(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) {
    if (std::isnan(s)) return kInf;
    if (std::isinf(a) || std::isinf(b)) return s;
    return s > 0 ? kInf : -kMax;
  }
  double bv = s - a;
  double err = (a - (s - bv)) + (b - bv);
  if (std::isnan(err) || err > 0) return next_up(s);
  return s;
}

inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

inline double mul_down(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  double p = a * b;
  if (!std::isfinite(p)) {
    if (std::isnan(p)) return -kInf;
    if (std::isinf(a) || std::isinf(b)) return p;
    return p > 0 ? kMax : -kInf;
  }
  if (std::fabs(p) < kTiny) return next_down(p);
  double err = std::fma(a, b, -p);
  if (std::isnan(err) || err < 0) return next_down(p);
  return p;
}

inline double mul_up(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  double p = a * b;
  if (!std::isfinite(p)) {
    if (std::isnan(p)) return kInf;
    if (std::isinf(a) || std::isinf(b)) return p;
    return p > 0 ? kInf : -kMax;
  }
  if (std::fabs(p) < kTiny) return next_up(p);
  double err = std::fma(a, b, -p);
  if (std::isnan(err) || err > 0) return next_up(p);
  return p;
}

inline double div_down(double a, double b) {
  if (a == 0.0) return 0.0;
  double q = a / b;
  if (!std::isfinite(q)) {
    if (std::isnan(q)) return -kInf;
    if (std::isinf(a)) return q;
    return q > 0 ? kMax : -kInf;
  }
  if (std::fabs(q) < kTiny) return next_down(q);
  // residual q*b - a tells on which side of the exact quotient q fell
  double err = std::fma(q, b, -a);
  if (std::isnan(err)) return next_down(q);
  if (b > 0 ? err > 0 : err < 0) return next_down(q);
  return q;
}

inline double div_up(double a, double b) {
  if (a == 0.0) return 0.0;
  double q = a / b;
  if (!std::isfinite(q)) {
    if (std::isnan(q)) return kInf;
    if (std::isinf(a)) return q;
    return q > 0 ? kInf : -kMax;
  }
  if (std::fabs(q) < kTiny) return next_up(q);
  double err = std::fma(q, b, -a);
  if (std::isnan(err)) return next_up(q);
  if (b > 0 ? err < 0 : err > 0) return next_up(q);
  return q;
}

}  // namespace rnd

class Interval {
 public:
  Interval() : lo_(0.0), hi_(0.0) {}
  explicit Interval(double v) { assign(v, v); }
  Interval(double lo, double hi) { assign(lo, hi); }

  static Interval whole() { return Interval(-rnd::kInf, rnd::kInf); }
  static Interval empty_marker() { return Interval(); }

  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double mid() const {
    if (lo_ == -rnd::kInf && hi_ == rnd::kInf) return 0.0;
    if (lo_ == -rnd::kInf) return -rnd::kMax;
    if (hi_ == rnd::kInf) return rnd::kMax;
    double m = 0.5 * (lo_ + hi_);
    if (!std::isfinite(m)) m = 0.5 * lo_ + 0.5 * hi_;
    return m;
  }
  double width() const { return rnd::sub_up(hi_, lo_); }
  // magnitude: largest absolute value over the interval
  double mag() const { return std::max(std::fabs(lo_), std::fabs(hi_)); }
  // mignitude: smallest absolute value over the interval
  double mig() const { return contains(0.0) ? 0.0 : std::min(std::fabs(lo_), std::fabs(hi_)); }

  bool is_finite() const { return std::isfinite(lo_) && std::isfinite(hi_); }
  bool contains(double v) const { return lo_ <= v && v <= hi_; }
  bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  bool subset_of(const Interval& o) const { return o.contains(*this); }
  bool strict_subset_of(const Interval& o) const { return o.lo_ < lo_ && hi_ < o.hi_; }
  bool disjoint_from(const Interval& o) const { return hi_ < o.lo_ || o.hi_ < lo_; }

  Interval operator-() const { return make(-hi_, -lo_); }

  friend Interval operator+(const Interval& a, const Interval& b) {
    return make(rnd::add_down(a.lo_, b.lo_), rnd::add_up(a.hi_, b.hi_));
  }
  friend Interval operator-(const Interval& a, const Interval& b) {
    return make(rnd::sub_down(a.lo_, b.hi_), rnd::sub_up(a.hi_, b.lo_));
  }
  friend Interval operator*(const Interval& a, const Interval& b) {
    // sign case analysis keeps the common cases at two directed products
    using rnd::mul_down;
    using rnd::mul_up;
    if (a.lo_ >= 0) {
      if (b.lo_ >= 0) return make(mul_down(a.lo_, b.lo_), mul_up(a.hi_, b.hi_));
      if (b.hi_ <= 0) return make(mul_down(a.hi_, b.lo_), mul_up(a.lo_, b.hi_));
      return make(mul_down(a.hi_, b.lo_), mul_up(a.hi_, b.hi_));
    }
    if (a.hi_ <= 0) {
      if (b.lo_ >= 0) return make(mul_down(a.lo_, b.hi_), mul_up(a.hi_, b.lo_));
      if (b.hi_ <= 0) return make(mul_down(a.hi_, b.hi_), mul_up(a.lo_, b.lo_));
      return make(mul_down(a.lo_, b.hi_), mul_up(a.lo_, b.lo_));
    }
    if (b.lo_ >= 0) return make(mul_down(a.lo_, b.hi_), mul_up(a.hi_, b.hi_));
    if (b.hi_ <= 0) return make(mul_down(a.hi_, b.lo_), mul_up(a.lo_, b.lo_));
    return make(std::min(mul_down(a.lo_, b.hi_), mul_down(a.hi_, b.lo_)),
                std::max(mul_up(a.lo_, b.lo_), mul_up(a.hi_, b.hi_)));
  }
  friend Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains(0.0)) throw DivisionByZeroInterval();
    double d1 = rnd::div_down(a.lo_, b.lo_), d2 = rnd::div_down(a.lo_, b.hi_);
    double d3 = rnd::div_down(a.hi_, b.lo_), d4 = rnd::div_down(a.hi_, b.hi_);
    double u1 = rnd::div_up(a.lo_, b.lo_), u2 = rnd::div_up(a.lo_, b.hi_);
    double u3 = rnd::div_up(a.hi_, b.lo_), u4 = rnd::div_up(a.hi_, b.hi_);
    return make(std::min(std::min(d1, d2), std::min(d3, d4)),
                std::max(std::max(u1, u2), std::max(u3, u4)));
  }

  Interval& operator+=(const Interval& o) { return *this = *this + o; }
  Interval& operator-=(const Interval& o) { return *this = *this - o; }
  Interval& operator*=(const Interval& o) { return *this = *this * o; }
  Interval& operator/=(const Interval& o) { return *this = *this / o; }

  friend Interval operator+(const Interval& a, double b) { return a + Interval(b, b); }
  friend Interval operator+(double a, const Interval& b) { return Interval(a, a) + b; }
  friend Interval operator-(const Interval& a, double b) { return a - Interval(b, b); }
  friend Interval operator-(double a, const Interval& b) { return Interval(a, a) - b; }
  friend Interval operator*(const Interval& a, double b) { return a * Interval(b, b); }
  friend Interval operator*(double a, const Interval& b) { return Interval(a, a) * b; }
  friend Interval operator/(const Interval& a, double b) { return a / Interval(b, b); }
  friend Interval operator/(double a, const Interval& b) { return Interval(a, a) / b; }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

  Interval sqr() const {
    Interval p = (*this) * (*this);
    return make(contains(0.0) ? 0.0 : std::max(0.0, p.lo()), p.hi());
  }

  friend Interval hull(const Interval& a, const Interval& b) {
    return make(std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_));
  }
  // intersection; invalid (lo > hi) results are reported via ok
  friend Interval intersect(const Interval& a, const Interval& b, bool& ok) {
    double l = std::max(a.lo_, b.lo_), h = std::min(a.hi_, b.hi_);
    ok = l <= h;
    return ok ? make(l, h) : Interval();
  }

  Interval inflated(double abs_pad) const {
    return make(rnd::sub_down(lo_, abs_pad), rnd::add_up(hi_, abs_pad));
  }
  Interval widened_ulp() const { return make(rnd::next_down(lo_), rnd::next_up(hi_)); }

 private:
  static Interval make(double lo, double hi) {
    Interval r;
    r.lo_ = lo;
    r.hi_ = hi;
    return r;
  }
  void assign(double lo, double hi) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
      lo_ = -rnd::kInf;
      hi_ = rnd::kInf;
    } else {
      lo_ = lo;
      hi_ = hi;
    }
  }
  double lo_, hi_;
};

// Enclosure of the rational p/q built from exact integer-valued doubles.
inline Interval rational(double p, double q) { return Interval(p) / Interval(q); }

// Parses a decimal literal and inflates by one ulp per side, so the result
// encloses the exact decimal value regardless of the round-to-nearest parse.
Interval interval_from_decimal(const std::string& text);

// Bit-exact hexfloat rendering of endpoints, plus helpers used by reports.
std::string to_hex(double v);
double from_hex(const std::string& s);
std::string interval_to_string(const Interval& v);

// Strict sign checks used by every verification routine: an endpoint that
// has overflowed to infinity can never certify an inequality.
inline bool certainly_positive(const Interval& v) { return v.is_finite() && v.lo() > 0.0; }
inline bool certainly_negative(const Interval& v) { return v.is_finite() && v.hi() < 0.0; }

}  // namespace fhn
