#pragma once

#include <limits>
#include <ostream>

namespace gradflow {

/// A nonnegative real or +infinity, tagged explicitly.
class ExtendedReal {
public:
  constexpr ExtendedReal() = default;
  constexpr explicit ExtendedReal(double v) : value_(v) {}

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  /// The finite value; +inf as a double when infinite.
  constexpr double value() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr bool operator==(const ExtendedReal &a, const ExtendedReal &b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend constexpr bool operator<(const ExtendedReal &a, const ExtendedReal &b) {
    if (a.infinite_) return false;
    return b.infinite_ || a.value_ < b.value_;
  }
  friend std::ostream &operator<<(std::ostream &os, const ExtendedReal &r) {
    return r.infinite_ ? os << "+inf" : os << r.value_;
  }

private:
  double value_ = 0.0;
  bool infinite_ = false;
};

} // namespace gradflow
