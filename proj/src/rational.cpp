#include "coarse/rational.hpp"

#include "coarse/error.hpp"

#include <charconv>
#include <ostream>

namespace coarse {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NotACover: return "NotACover";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::ScaleMismatch: return "ScaleMismatch";
    case ErrorCode::SeedInvalid: return "SeedInvalid";
    case ErrorCode::WindowExhausted: return "WindowExhausted";
    case ErrorCode::ChainViolation: return "ChainViolation";
    case ErrorCode::NoCoveringSet: return "NoCoveringSet";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::int64_t floor(const Rational& q) {
  std::int64_t n = q.numerator();
  std::int64_t d = q.denominator();  // always positive after normalization
  std::int64_t r = n / d;
  if (n % d != 0 && n < 0) --r;
  return r;
}

std::int64_t ceil(const Rational& q) { return -floor(-q); }

std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

namespace {

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::ParseError, "bad rational '" + std::string(whole) + "'");
  return v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text, text));
  std::int64_t num = parse_int(text.substr(0, slash), text);
  std::int64_t den = parse_int(text.substr(slash + 1), text);
  if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string(text) + "'");
  return Rational(num, den);
}

Rational pow2(int k) {
  if (k < 0 || k > 62) throw Error(ErrorCode::SizeLimit, "2^" + std::to_string(k) + " out of range");
  return Rational(std::int64_t{1} << k);
}

const Rational& Extended::value() const {
  if (infinite_) throw Error(ErrorCode::InvalidArgument, "value() of infinite distance");
  return value_;
}

std::string to_string(const Extended& e) { return e.is_infinite() ? "inf" : to_string(e.value()); }

Extended parse_extended(std::string_view text) {
  if (text == "inf") return Extended::infinity();
  return Extended(parse_rational(text));
}

std::ostream& operator<<(std::ostream& os, const Extended& e) { return os << to_string(e); }

}  // namespace coarse
