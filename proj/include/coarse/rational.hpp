#pragma once

#include <boost/rational.hpp>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace coarse {

/// Exact scalar used for every distance, scale and offset.
using Rational = boost::rational<std::int64_t>;

/// Largest integer not exceeding a nonnegative or negative rational.
std::int64_t floor(const Rational& q);
std::int64_t ceil(const Rational& q);

/// "p/q", or "p" when the denominator is one.
std::string to_string(const Rational& q);
/// Accepts "p/q" or "p"; throws Error(ParseError).
Rational parse_rational(std::string_view text);

/// 2^k as an exact rational; k must be in [0, 62].
Rational pow2(int k);

/// A nonnegative rational or +infinity. The infinite value is a sentinel
/// that never compares equal to any finite value.
class Extended {
public:
  Extended() = default;
  Extended(Rational value) : value_(value) {}  // NOLINT(implicit)
  Extended(std::int64_t value) : value_(value) {}  // NOLINT(implicit)

  static Extended infinity() {
    Extended e;
    e.infinite_ = true;
    return e;
  }

  bool is_infinite() const noexcept { return infinite_; }
  bool is_finite() const noexcept { return !infinite_; }
  /// Throws Error(InvalidArgument) on the infinite sentinel.
  const Rational& value() const;

  friend bool operator==(const Extended& a, const Extended& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend std::strong_ordering operator<=>(const Extended& a, const Extended& b) {
    if (a.infinite_ || b.infinite_) {
      if (a.infinite_ && b.infinite_) return std::strong_ordering::equal;
      return a.infinite_ ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (b.value_ < a.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend Extended operator+(const Extended& a, const Rational& b) {
    return a.infinite_ ? a : Extended(a.value_ + b);
  }

private:
  Rational value_{0};
  bool infinite_ = false;
};

/// "inf" for the sentinel.
std::string to_string(const Extended& e);
Extended parse_extended(std::string_view text);

std::ostream& operator<<(std::ostream& os, const Extended& e);

}  // namespace coarse
