#include <doctest.h>

#include <algorithm>

#include "support.hpp"

using namespace shipa;
using namespace shipa::testing;

namespace {

bool has_failure(const ValidationReport& r, const std::string& needle) {
  const auto f = r.failures();
  return std::any_of(f.begin(), f.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::string dump(const ValidationReport& r) {
  std::string out;
  for (const auto& f : r.failures()) out += f + "\n";
  return out;
}

}  // namespace

TEST_CASE("catalog models validate cleanly") {
  for (const auto& m :
       {build_single_node_sfm(SfmParams{}), build_single_node_sfm(deterministic_sfm()),
        build_two_mode_buffer({}), build_parametric_rate_buffer({}), build_reset_test({})}) {
    CAPTURE(m.name);
    const auto r = validate_model(m);
    CHECK_MESSAGE(r.passed(), dump(r));
    CHECK(r.checks.size() > 5);
  }
}

TEST_CASE("a null guard is reported") {
  auto m = build_single_node_sfm(SfmParams{});
  m.guards[0].value = [](const EvalPoint&) { return 0.0; };
  m.guards[0].d_dx = [](const EvalPoint&) { return RowVector::Zero(5); };
  CHECK(has_failure(validate_model(m), "guard identically zero"));
}

TEST_CASE("inconsistent partials are reported") {
  auto m = build_two_mode_buffer({});
  auto good = m.fields[1].df_dtheta;
  m.fields[1].df_dtheta = [good](const EvalPoint& p) { return Matrix(1.1 * good(p)); };
  CHECK(has_failure(validate_model(m), "partial mismatch"));

  auto s = build_single_node_sfm(SfmParams{});
  s.guards[1].d_dtheta = [](const EvalPoint&) { return RowVector::Constant(1, -0.9); };
  CHECK(has_failure(validate_model(s), "partial mismatch"));

  auto c = build_single_node_sfm(SfmParams{});
  c.costs[0].d_dx = [](ModeId, const EvalPoint&) { return RowVector::Zero(5); };
  CHECK(has_failure(validate_model(c), "partial mismatch"));
}

TEST_CASE("structural defects are reported") {
  SUBCASE("reset touching a component outside its mask") {
    auto m = build_single_node_sfm(SfmParams{});
    m.resets[0].reset_mask[sfm::alpha] = false;
    CHECK(has_failure(validate_model(m), "not in reset_mask"));
  }
  SUBCASE("timer not decaying at unit rate") {
    auto m = build_reset_test({});
    m.fields[1].f = [](const EvalPoint&) {
      Vector f(2);
      f << -1.0, -0.5;
      return f;
    };
    CHECK(has_failure(validate_model(m), "does not decay"));
  }
  SUBCASE("timer event missing from a mode") {
    auto m = build_single_node_sfm(SfmParams{});
    m.transitions.table.erase(m.transitions.table.begin() + 1);
    m.resets.erase(m.resets.begin());
    CHECK(has_failure(validate_model(m), "has no transition in mode 0"));
  }
  SUBCASE("initial state outside its mode invariant") {
    auto m = build_single_node_sfm(SfmParams{});
    m.initial.mode = [](const Vector&, const Vector&) { return sfm::empty; };
    CHECK(has_failure(validate_model(m), "initial state violates"));
  }
  SUBCASE("wrong dimensions") {
    auto m = build_single_node_sfm(SfmParams{});
    m.timer_mask.pop_back();
    const auto r = validate_model(m);
    CHECK_FALSE(r.passed());
    CHECK(has_failure(r, "timer_mask"));
  }
}

TEST_CASE("event classification on the buffer") {
  const auto m = build_single_node_sfm(SfmParams{});
  CHECK(classify_event(m, EventId{1}) == EventClass::endogenous);
  CHECK(classify_event(m, EventId{2}) == EventClass::endogenous);
  CHECK(classify_event(m, EventId{3}) == EventClass::endogenous);
  CHECK(classify_event(m, EventId{4}) == EventClass::exogenous);
  CHECK(classify_event(m, EventId{5}) == EventClass::exogenous);
  CHECK_THROWS_AS(classify_event(m, EventId{6}), ConfigError);
  CHECK_THROWS_AS(classify_event(m, EventId{0}), ConfigError);
  for (int i = 1; i <= 5; ++i)
    CHECK(classify_event(m, EventId{i}) == classify_event(m, EventId{i}));
}

TEST_CASE("induced and theta-driven timer events") {
  const auto rt = build_reset_test({});
  CHECK(classify_event(rt, EventId{1}) == EventClass::exogenous);
  CHECK(classify_event(rt, EventId{2}) == EventClass::induced);

  auto scaled = build_parametric_rate_buffer({});
  scaled.clocks[0].reparam = scaled_by_theta(0);
  CHECK(classify_event(scaled, EventId{1}) == EventClass::endogenous);
  CHECK(to_string(EventClass::induced) == "induced");
}

TEST_CASE("parameter vectors and boxes") {
  ParameterVector p{Vector::Constant(1, 1.0), Box{Vector::Constant(1, 0.2), Vector::Constant(1, 5.0)}};
  CHECK_NOTHROW(p.check());
  p.values[0] = 6.0;
  CHECK_THROWS_AS(p.check(), ConfigError);
  CHECK(p.bounds->project(p.values)[0] == 5.0);
  CHECK(p.bounds->contains(Vector::Constant(1, 0.2)));
  ParameterVector empty{Vector(0), {}};
  CHECK_THROWS_AS(empty.check(), ConfigError);
}
