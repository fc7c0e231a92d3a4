#include <catch2/catch_amalgamated.hpp>

#include "cgfp/bigfloat.hpp"

using namespace cgfp;
using Catch::Approx;

TEST_CASE("context precision maps digits to bits with margin") {
  PrecisionContext ctx(64);
  CHECK(ctx.digits() == 64);
  CHECK(ctx.bits() >= 64 * 3.32);
  CHECK_THROWS_AS(PrecisionContext(16), Error);
}

TEST_CASE("promotion from double is exact") {
  PrecisionContext ctx(64);
  double v = 0.1;  // not representable; promotion must keep the double bits
  BigFloat b = ctx.make(v);
  CHECK(b.to_double() == v);
  BigFloat diff = b - BigFloat(v, 64);
  CHECK(diff.is_zero());
}

TEST_CASE("arithmetic rounds at the context width") {
  PrecisionContext ctx(64);
  BigFloat two = ctx.make(2.0);
  BigFloat r = sqrt(two);
  BigFloat err = abs(r * r - two) / two;
  CHECK(err.log10_abs() < -60.0);
}

TEST_CASE("string round trip at full precision") {
  PrecisionContext ctx(48);
  BigFloat x = sqrt(ctx.make(3.0));
  std::string s = x.str();
  BigFloat y = ctx.parse(s.c_str());
  CHECK(abs(x - y).log10_abs() < -45.0);
}

TEST_CASE("pow10 and log10_abs agree far outside the double range") {
  PrecisionContext ctx(40);
  BigFloat tiny = ctx.pow10(-500);
  CHECK(tiny.log10_abs() == Approx(-500.0).margin(1e-9));
  CHECK(tiny.to_double() == 0.0);  // underflows double, value itself survives
  CHECK(tiny > 0.0);
}

TEST_CASE("fused accumulate matches plain ops") {
  PrecisionContext ctx(50);
  BigFloat acc = ctx.make(1.0);
  add_product(acc, ctx.make(3.0), ctx.make(0.25));
  CHECK(acc.to_double() == 1.75);
  sub_product(acc, ctx.make(0.5), ctx.make(1.5));
  CHECK(acc.to_double() == 1.0);
}

TEST_CASE("comparison against double needs no promotion") {
  BigFloat x(1.5, 128);
  CHECK(x > 1.0);
  CHECK(x <= 1.5);
  CHECK(x == 1.5);
}
