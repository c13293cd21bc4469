#include <doctest.h>

#include <cmath>

#include "shipa/stochastic.hpp"

using namespace shipa;

TEST_CASE("deterministic clock") {
  ClockStructure c{EventId{1}, Deterministic{2.0}, {}, 7};
  RandomStream s(1, 7, 0);
  for (std::size_t n : {1u, 2u, 9u}) {
    const auto l = draw_lifetime(c, s, n, Vector::Zero(3));
    CHECK(l.value == 2.0);
    CHECK(l.d_dtheta.size() == 3);
    CHECK(l.d_dtheta.isZero(0.0));
  }
}

TEST_CASE("exponential clock is reproducible") {
  ClockStructure c{EventId{1}, Exponential{1.0}, {}, 3};
  RandomStream a(42, 3, 0);
  RandomStream b(42, 3, 0);
  const auto first = draw_lifetime(c, a, 1, Vector::Zero(1));
  CHECK(first.value > 0.0);
  CHECK(draw_lifetime(c, b, 1, Vector::Zero(1)).value == first.value);
  // Random access: the same index later in the sequence gives the same draw.
  const double fifth = draw_lifetime(c, a, 5, Vector::Zero(1)).value;
  RandomStream again(42, 3, 0);
  CHECK(draw_lifetime(c, again, 5, Vector::Zero(1)).value == fifth);
  CHECK(draw_lifetime(c, again, 1, Vector::Zero(1)).value == first.value);
}

TEST_CASE("scale-family clock carries its theta derivative") {
  ClockStructure c{EventId{2}, Uniform{0.5, 1.5}, scaled_by_theta(0), 4};
  RandomStream s(5, 4, 0);
  RandomStream base(5, 4, 0);
  Vector theta(2);
  theta << 1.7, 3.0;
  for (std::size_t n = 1; n <= 10; ++n) {
    const double w = sample(c.sampler, base.uniform(n), n);
    const auto l = draw_lifetime(c, s, n, theta);
    CHECK(l.value == doctest::Approx(1.7 * w));
    CHECK(l.d_dtheta[0] == w);
    CHECK(l.d_dtheta[1] == 0.0);
  }
  CHECK_FALSE(c.theta_free());
}

TEST_CASE("jump processes") {
  RandomStream s(9, 1001, 0);
  JumpProcess e{Empirical{{1.5, 0.5, 2.0}}, 0, 1001};
  CHECK(draw_jump(e, s, 2) == 0.5);
  CHECK(draw_jump(e, s, 4) == 1.5);
  JumpProcess u{Uniform{0.0, 4.0}, 0, 1001};
  for (std::size_t n = 1; n <= 1000; ++n) {
    const double v = draw_jump(u, s, n);
    CHECK(v >= 0.0);
    CHECK(v <= 4.0);
  }
  JumpProcess d{Deterministic{1.0}, 0, 1001};
  CHECK(draw_jump(d, s, 3) == 1.0);
}

TEST_CASE("misconfigured samplers are rejected") {
  RandomStream s(1, 1, 0);
  CHECK_THROWS_AS(draw_jump({Uniform{2.0, 2.0}, 0, 0}, s, 1), ConfigError);
  CHECK_THROWS_AS(draw_jump({Empirical{}, 0, 0}, s, 1), ConfigError);
  CHECK_THROWS_AS(draw_lifetime({EventId{1}, Exponential{0.0}, {}, 0}, s, 1, Vector::Zero(1)),
                  ConfigError);
  CHECK_THROWS_AS(draw_lifetime({EventId{1}, Deterministic{-1.0}, {}, 0}, s, 1, Vector::Zero(1)),
                  ConfigError);
  CHECK_THROWS_AS(draw_lifetime({EventId{1}, Uniform{-1.0, 1.0}, {}, 0}, s, 1, Vector::Zero(1)),
                  ConfigError);
  CHECK_THROWS_AS(draw_jump({Deterministic{1.0}, 0, 0}, s, 0), ConfigError);
  CHECK_NOTHROW(draw_jump({Uniform{-1.0, 1.0}, 0, 0}, s, 1));
}

TEST_CASE("distinct streams are uncorrelated") {
  RandomStream a(123, 1, 0);
  RandomStream b(123, 2, 0);
  RandomStream c(123, 1, 1);
  constexpr int n = 10000;
  auto corr = [&](RandomStream& x, RandomStream& y) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double u = x.uniform(i);
      const double v = y.uniform(i);
      sx += u;
      sy += v;
      sxx += u * u;
      syy += v * v;
      sxy += u * v;
    }
    const double cov = sxy / n - sx / n * sy / n;
    return cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  };
  CHECK(std::abs(corr(a, b)) < 0.05);
  CHECK(std::abs(corr(a, c)) < 0.05);
}

TEST_CASE("uniform variates stay inside the open unit interval") {
  RandomStream s(0, 0, 0);
  double mean = 0.0;
  for (std::size_t i = 1; i <= 20000; ++i) {
    const double u = s.uniform(i);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    mean += u;
  }
  CHECK(mean / 20000 == doctest::Approx(0.5).epsilon(0.02));
  CHECK_THROWS_AS(s.uniform(0), ConfigError);
}

TEST_CASE("support and describe") {
  CHECK(support(Uniform{1.0, 3.0}) == std::pair{1.0, 3.0});
  CHECK(support(Empirical{{2.0, -1.0, 4.0}}) == std::pair{-1.0, 4.0});
  CHECK(std::isinf(support(Exponential{2.0}).second));
  CHECK(describe(Exponential{2.0}) == "exponential(2)");
}
