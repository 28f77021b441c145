#include "coarse/error.hpp"
#include "coarse/rational.hpp"

#include <doctest.h>

using namespace coarse;

TEST_CASE("floor and ceil round toward the correct side") {
  CHECK(floor(Rational(17, 5)) == 3);
  CHECK(ceil(Rational(17, 5)) == 4);
  CHECK(floor(Rational(-7, 2)) == -4);
  CHECK(ceil(Rational(-7, 2)) == -3);
  CHECK(floor(Rational(6)) == 6);
  CHECK(ceil(Rational(6)) == 6);
}

TEST_CASE("rationals print as p/q and parse back") {
  CHECK(to_string(Rational(5, 2)) == "5/2");
  CHECK(to_string(Rational(4, 2)) == "2");
  CHECK(to_string(Rational(-3, 9)) == "-1/3");
  for (const char* text : {"0", "7", "-7", "5/2", "-11/6"}) CHECK(to_string(parse_rational(text)) == text);
  CHECK(parse_rational("6/4") == Rational(3, 2));
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
  CHECK_THROWS_AS(parse_rational("abc"), Error);
  CHECK_THROWS_AS(parse_rational("1.5"), Error);
}

TEST_CASE("pow2 is exact and bounded") {
  CHECK(pow2(0) == Rational(1));
  CHECK(pow2(10) == Rational(1024));
  CHECK_THROWS_AS(pow2(63), Error);
  CHECK_THROWS_AS(pow2(-1), Error);
}

TEST_CASE("extended values order infinity above every rational") {
  const Extended inf = Extended::infinity();
  CHECK(inf > Extended(Rational(1000000)));
  CHECK(inf == Extended::infinity());
  CHECK(Extended(3) < Extended(Rational(7, 2)));
  CHECK(Extended(3) != inf);
  CHECK((inf + Rational(5)).is_infinite());
  CHECK((Extended(2) + Rational(1, 2)) == Extended(Rational(5, 2)));
  CHECK_THROWS_AS(inf.value(), Error);
  CHECK(to_string(inf) == "inf");
  CHECK(parse_extended("inf").is_infinite());
  CHECK(parse_extended("9/4") == Extended(Rational(9, 4)));
}
