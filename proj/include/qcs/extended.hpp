#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <type_traits>

#include "qcs/errors.hpp"

namespace qcs {

// A value of T, or one of the two sentinels below and above every T.
template <class T>
class Extended {
 public:
  enum class Kind : std::uint8_t { neg_inf = 0, finite = 1, pos_inf = 2 };

  Extended(const T& v) : kind_(Kind::finite), value_(v) {}  // NOLINT: implicit on purpose

  static Extended neg_inf() { return Extended(Kind::neg_inf); }
  static Extended pos_inf() { return Extended(Kind::pos_inf); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::finite; }
  bool is_neg_inf() const { return kind_ == Kind::neg_inf; }
  bool is_pos_inf() const { return kind_ == Kind::pos_inf; }

  const T& value() const {
    if (!is_finite()) throw QueryError("value() on an infinite sentinel");
    return value_;
  }

  // Sentinels map to -inf / +inf for floating point T.
  T to_scalar() const
    requires std::is_floating_point_v<T>
  {
    if (kind_ == Kind::neg_inf) return -std::numeric_limits<T>::infinity();
    if (kind_ == Kind::pos_inf) return std::numeric_limits<T>::infinity();
    return value_;
  }

  friend bool operator==(const Extended& a, const Extended& b) {
    if (a.kind_ != b.kind_) return false;
    return !a.is_finite() || a.value_ == b.value_;
  }

  friend bool operator<(const Extended& a, const Extended& b) {
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
    return a.is_finite() && a.value_ < b.value_;
  }
  friend bool operator>(const Extended& a, const Extended& b) { return b < a; }
  friend bool operator<=(const Extended& a, const Extended& b) { return !(b < a); }
  friend bool operator>=(const Extended& a, const Extended& b) { return !(a < b); }

  // Translation; sentinels are fixed points.
  friend Extended operator+(const Extended& a, const T& shift)
    requires std::is_arithmetic_v<T>
  {
    return a.is_finite() ? Extended(a.value_ + shift) : a;
  }
  friend Extended operator-(const Extended& a, const T& shift)
    requires std::is_arithmetic_v<T>
  {
    return a.is_finite() ? Extended(a.value_ - shift) : a;
  }

 private:
  explicit Extended(Kind k) : kind_(k), value_() {}

  Kind kind_;
  T value_;
};

template <class T>
const Extended<T>& max(const Extended<T>& a, const Extended<T>& b) {
  return a < b ? b : a;
}

template <class T>
const Extended<T>& min(const Extended<T>& a, const Extended<T>& b) {
  return b < a ? b : a;
}

}  // namespace qcs
