#ifndef SHIPA_TESTS_SUPPORT_HPP
#define SHIPA_TESTS_SUPPORT_HPP

#include "shipa/catalog.hpp"
#include "shipa/ipa.hpp"

namespace shipa::testing {

/// alpha = 2, beta = 1 for ever, capacity 1, empty start.
inline SfmParams deterministic_sfm() {
  SfmParams p;
  p.theta = 1.0;
  p.alpha_clock.reset();
  p.beta_clock.reset();
  return p;
}

inline Vector theta1(double v) { return Vector::Constant(1, v); }

inline IntegratorConfig coarse_config() {
  IntegratorConfig c;
  c.step = 0.01;
  return c;
}

}  // namespace shipa::testing

#endif  // SHIPA_TESTS_SUPPORT_HPP
