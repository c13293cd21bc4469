#include <doctest.h>

#include <cmath>

#include "shipa/optimizer.hpp"
#include "support.hpp"

using namespace shipa;
using namespace shipa::testing;

namespace {

Box box(double lo, double hi) { return {Vector::Constant(1, lo), Vector::Constant(1, hi)}; }

}  // namespace

TEST_CASE("sgd_step") {
  const Box b = box(0.2, 5.0);
  CHECK(sgd_step(theta1(1.0), RowVector::Constant(1, 2.0), 0.1, b)[0] == doctest::Approx(0.8));
  CHECK(sgd_step(theta1(0.25), RowVector::Constant(1, 2.0), 0.1, b)[0] == 0.2);
  CHECK(sgd_step(theta1(1.3), RowVector::Zero(1), 0.1, b)[0] == 1.3);
  CHECK(sgd_step(theta1(4.9), RowVector::Constant(1, -5.0), 1.0, b)[0] == 5.0);
  CHECK_THROWS_AS(sgd_step(theta1(1.0), RowVector::Constant(1, NAN), 0.1, b), NumericalError);
}

TEST_CASE("step rules") {
  StepRule c{StepRule::Kind::constant, 0.3};
  StepRule h{StepRule::Kind::harmonic, 0.3};
  CHECK(c.at(7) == 0.3);
  CHECK(h.at(1) == 0.3);
  CHECK(h.at(3) == doctest::Approx(0.1));
}

TEST_CASE("objective checks") {
  const auto m = build_single_node_sfm(SfmParams{});
  ObjectiveSpec ok{{{"workload", 1.0}, {"loss", 10.0}}, Normalization::raw};
  CHECK_NOTHROW(ok.check(m));
  ObjectiveSpec zero{{{"workload", 0.0}}, Normalization::raw};
  CHECK_THROWS_AS(zero.check(m), ConfigError);
  ObjectiveSpec unknown{{{"delay", 1.0}}, Normalization::raw};
  CHECK_THROWS_AS(unknown.check(m), ConfigError);
}

TEST_CASE("workload alone drives capacity to its lower bound") {
  const auto m = build_single_node_sfm(deterministic_sfm());
  ObjectiveSpec obj{{{"workload", 1.0}}, Normalization::raw};
  OptimizerSettings s;
  s.iterations = 40;
  s.replications = 1;
  s.step = {StepRule::Kind::constant, 0.05};
  s.bounds = box(0.2, 2.0);
  IntegratorConfig cfg;
  const auto trace = optimize(m, obj, theta1(1.5), 3.0, cfg, s, 1);
  CHECK(trace.final_theta[0] == 0.2);
  for (std::size_t k = 1; k < trace.iterations.size(); ++k)
    CHECK(trace.iterations[k].J <= trace.iterations[k - 1].J);
  for (const auto& it : trace.iterations) CHECK(it.grad[0] == doctest::Approx(3.0 - it.theta[0]));
}

TEST_CASE("degenerate settings leave theta alone") {
  const auto m = build_single_node_sfm(SfmParams{});
  const auto cfg = coarse_config();
  OptimizerSettings s;
  s.iterations = 1;
  s.replications = 2;
  s.step = {StepRule::Kind::constant, 0.0};
  s.bounds = box(0.2, 5.0);
  ObjectiveSpec obj{{{"workload", 1.0}, {"loss", 10.0}}, Normalization::raw};
  CHECK(optimize(m, obj, theta1(1.3), 20.0, cfg, s, 4).final_theta[0] == 1.3);

  s.iterations = 5;
  s.step = {StepRule::Kind::harmonic, 1.0};
  s.bounds = box(1.0, 1.0);
  const auto pinned = optimize(m, obj, theta1(1.0), 20.0, cfg, s, 4);
  for (const auto& it : pinned.iterations) CHECK(it.theta[0] == 1.0);
  CHECK(pinned.final_theta[0] == 1.0);

  ObjectiveSpec none{{{"workload", 0.0}}, Normalization::raw};
  s.bounds = box(0.2, 5.0);
  const auto flat = optimize(m, none, theta1(2.0), 20.0, cfg, s, 4);
  for (const auto& it : flat.iterations) {
    CHECK(it.grad[0] == 0.0);
    CHECK(it.theta[0] == 2.0);
  }
}

TEST_CASE("traces are feasible and reproducible") {
  const auto m = build_single_node_sfm(SfmParams{});
  const auto cfg = coarse_config();
  OptimizerSettings s;
  s.iterations = 15;
  s.replications = 3;
  s.step = {StepRule::Kind::harmonic, 0.5};
  s.bounds = box(0.2, 5.0);
  ObjectiveSpec obj{{{"workload", 1.0}, {"loss", 10.0}}, Normalization::raw};
  const auto a = optimize(m, obj, theta1(4.0), 30.0, cfg, s, 11);
  const auto b = optimize(m, obj, theta1(4.0), 30.0, cfg, s, 11);
  REQUIRE(a.iterations.size() == b.iterations.size());
  for (std::size_t k = 0; k < a.iterations.size(); ++k) {
    CHECK(a.iterations[k].theta == b.iterations[k].theta);
    CHECK(a.iterations[k].J == b.iterations[k].J);
    CHECK(a.iterations[k].grad == b.iterations[k].grad);
    CHECK(s.bounds.contains(a.iterations[k].theta));
  }
  CHECK(a.final_theta == b.final_theta);
}

TEST_CASE("gradient tolerance stops early") {
  const auto m = build_single_node_sfm(deterministic_sfm());
  OptimizerSettings s;
  s.iterations = 50;
  s.replications = 1;
  s.step = {StepRule::Kind::constant, 0.5};
  s.bounds = box(0.2, 5.0);
  s.grad_tol = 1e-6;
  ObjectiveSpec obj{{{"workload", 1.0}}, Normalization::raw};
  // dQ/dtheta = 3 - theta vanishes at the upper end of an extended box.
  s.bounds = box(0.2, 3.0);
  const auto t = optimize(m, obj, theta1(3.0), 3.0, IntegratorConfig{}, s, 0);
  CHECK(t.converged);
  CHECK(t.stop_reason == OptimizerTrace::StopReason::gradient_tolerance);
  CHECK(t.iterations.size() == 1);
}

TEST_CASE("optimize validates settings") {
  const auto m = build_single_node_sfm(SfmParams{});
  ObjectiveSpec obj{{{"workload", 1.0}}, Normalization::raw};
  OptimizerSettings s;
  s.bounds = box(0.2, 5.0);
  s.iterations = 0;
  CHECK_THROWS_AS(optimize(m, obj, theta1(1.0), 10.0, coarse_config(), s, 0), ConfigError);
  s.iterations = 1;
  s.bounds = box(2.0, 1.0);
  CHECK_THROWS_AS(optimize(m, obj, theta1(1.0), 10.0, coarse_config(), s, 0), ConfigError);
}
