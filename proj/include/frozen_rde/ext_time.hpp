#ifndef FROZEN_RDE_EXT_TIME_HPP
#define FROZEN_RDE_EXT_TIME_HPP

#include <compare>
#include <ostream>
#include <stdexcept>

namespace frozen_rde {

class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/** A time in [0,1] or the value infinity. Finite arithmetic only happens on value(). */
class ExtTime {
public:
  constexpr ExtTime() = default;

  static constexpr ExtTime infinity() { return ExtTime{0.0, true}; }

  /** Any finite double is accepted; callers that need [0,1] check with in_unit_interval(). */
  static constexpr ExtTime finite(double t) { return ExtTime{t, false}; }

  constexpr bool is_infinite() const { return inf_; }
  constexpr bool is_finite() const { return !inf_; }

  double value() const {
    if (inf_) throw DomainError("ExtTime::value() on infinity");
    return v_;
  }

  /** Finite value, or `fallback` for infinity. */
  constexpr double value_or(double fallback) const { return inf_ ? fallback : v_; }

  constexpr bool in_unit_interval() const { return inf_ || (v_ >= 0.0 && v_ <= 1.0); }

  friend constexpr bool operator==(const ExtTime &a, const ExtTime &b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.v_ == b.v_);
  }

  friend constexpr std::partial_ordering operator<=>(const ExtTime &a, const ExtTime &b) {
    if (a.inf_ || b.inf_) {
      if (a.inf_ && b.inf_) return std::partial_ordering::equivalent;
      return a.inf_ ? std::partial_ordering::greater : std::partial_ordering::less;
    }
    return a.v_ <=> b.v_;
  }

  friend std::ostream &operator<<(std::ostream &os, const ExtTime &t) {
    if (t.inf_) return os << "inf";
    return os << t.v_;
  }

private:
  constexpr ExtTime(double v, bool inf) : v_(v), inf_(inf) {}

  double v_ = 0.0;
  bool inf_ = false;
};

inline constexpr ExtTime kInfinity = ExtTime::infinity();

constexpr ExtTime min(const ExtTime &a, const ExtTime &b) { return (b < a) ? b : a; }
constexpr ExtTime max(const ExtTime &a, const ExtTime &b) { return (a < b) ? b : a; }

/** Strict comparison of an ExtTime with a finite time: infinity exceeds every time. */
constexpr bool exceeds(const ExtTime &x, double t) { return x.is_infinite() || x.value_or(0.0) > t; }

} // namespace frozen_rde

#endif // FROZEN_RDE_EXT_TIME_HPP
