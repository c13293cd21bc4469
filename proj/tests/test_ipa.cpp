#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace shipa;
using namespace shipa::testing;

namespace {

Vector sfm_state(double alpha, double beta, double x) {
  Vector s(5);
  s << alpha, beta, x, 7.0, 7.0;
  return s;
}

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double d : v) m(i++, 0) = d;
  return m;
}

/// x' = 1 against g = x - theta with x reset to 0 at every hit: a sawtooth
/// whose k-th tooth starts at k theta, so x'(t) = -k after the k-th reset.
AutomatonModel sawtooth() {
  AutomatonModel m;
  m.name = "sawtooth";
  m.num_modes = 1;
  m.num_states = 1;
  m.num_params = 1;
  m.num_events = 1;
  m.state_names = {"x"};
  m.timer_mask = {false};
  VectorField vf;
  vf.mode = ModeId{0};
  vf.f = [](const EvalPoint&) { return Vector::Ones(1); };
  vf.df_dx = [](const EvalPoint&) { return Matrix::Zero(1, 1); };
  m.fields.push_back(vf);
  GuardFunction g;
  g.event = EventId{1};
  g.value = [](const EvalPoint& p) { return p.x[0] - p.theta[0]; };
  g.d_dx = [](const EvalPoint&) { return RowVector::Ones(1); };
  g.d_dtheta = [](const EvalPoint&) { return RowVector::Constant(1, -1.0); };
  m.guards.push_back(g);
  m.transitions.table.push_back({ModeId{0}, EventId{1}, ModeId{0}});
  ResetMap r;
  r.source = ModeId{0};
  r.target = ModeId{0};
  r.event = EventId{1};
  r.r = [](const EvalPoint&, const Draws&) { return Vector::Zero(1); };
  r.dr_dx = [](const EvalPoint&, const Draws&) { return Matrix::Zero(1, 1); };
  r.reset_mask = {true};
  m.resets.push_back(r);
  m.initial.x = Vector::Zero(1);
  m.initial.mode = [](const Vector&, const Vector&) { return ModeId{0}; };
  CostIntegrand c;
  c.name = "workload";
  c.value = [](ModeId, const EvalPoint& p) { return p.x[0]; };
  c.d_dx = [](ModeId, const EvalPoint&) { return RowVector::Ones(1); };
  m.costs.push_back(c);
  m.sampling.x_lower = Vector::Zero(1);
  m.sampling.x_upper = Vector::Ones(1);
  m.sampling.theta_lower = Vector::Constant(1, 0.5);
  m.sampling.theta_upper = Vector::Constant(1, 1.5);
  return m;
}

std::vector<std::tuple<int, std::size_t, std::size_t>> sequence(const SamplePath& p) {
  std::vector<std::tuple<int, std::size_t, std::size_t>> s;
  for (const auto& r : p.records) s.emplace_back(r.event.value, r.from.index, r.to.index);
  return s;
}

struct FdCheck {
  int compared = 0;
  int changed = 0;
  double worst = 0.0;
};

/// Central differences with common random numbers against run_ipa.
FdCheck fd_against_ipa(const AutomatonModel& m, double theta, double horizon, int seeds,
                       const IntegratorConfig& cfg, double h = 1e-5) {
  FdCheck out;
  for (int s = 1; s <= seeds; ++s) {
    const auto path = simulate(m, theta1(theta), horizon, cfg, static_cast<std::uint64_t>(s));
    const auto up = simulate(m, theta1(theta + h), horizon, cfg, static_cast<std::uint64_t>(s));
    const auto down = simulate(m, theta1(theta - h), horizon, cfg, static_cast<std::uint64_t>(s));
    if (sequence(up) != sequence(path) || sequence(down) != sequence(path)) {
      ++out.changed;
      continue;
    }
    const auto rep = run_ipa(m, path, cfg);
    const auto rup = run_ipa(m, up, cfg);
    const auto rdown = run_ipa(m, down, cfg);
    for (std::size_t c = 0; c < rep.costs.size(); ++c) {
      const double fd = (rup.L[c] - rdown.L[c]) / (2 * h);
      const double err = std::abs(rep.dL[c][0] - fd) / std::max(std::abs(fd), 1e-8);
      out.worst = std::max(out.worst, err);
    }
    ++out.compared;
  }
  return out;
}

}  // namespace

TEST_CASE("event_time_derivative on the buffer guards") {
  const auto m = build_single_node_sfm(SfmParams{});
  const Vector th = theta1(1.0);
  const Vector u;
  const Matrix up = Matrix::Zero(0, 1);

  const Vector s2 = sfm_state(2, 1, 1);
  auto r2 = event_time_derivative(m, m.guard(EventId{2}), sfm::partial, {1.0, s2, u, th},
                                  Matrix::Zero(5, 1), up, 1e-8);
  CHECK(r2.values[0] == doctest::Approx(1.0));

  const Vector s4 = sfm_state(2, 1, 0.5);
  auto r4 = event_time_derivative(m, m.guard(EventId{4}), sfm::partial, {1.0, s4, u, th},
                                  Matrix::Zero(5, 1), up, 1e-8);
  CHECK(r4.values[0] == 0.0);

  const Vector s3 = sfm_state(0.5, 1, 0);
  auto r3 = event_time_derivative(m, m.guard(EventId{3}), sfm::partial, {1.0, s3, u, th},
                                  column({0, 0, 1, 0, 0}), up, 1e-8);
  CHECK(r3.values[0] == doctest::Approx(2.0));

  const Vector flat = sfm_state(1, 1, 1);
  CHECK_THROWS_AS(event_time_derivative(m, m.guard(EventId{2}), sfm::partial, {1.0, flat, u, th},
                                        Matrix::Zero(5, 1), up, 1e-8),
                  AssumptionViolation);
}

TEST_CASE("state_derivative_jump on buffer transitions") {
  const auto m = build_single_node_sfm(SfmParams{});
  const Vector th = theta1(1.0);
  const Vector u;
  const Matrix up = Matrix::Zero(0, 1);
  const auto none = reset_matrices(m, nullptr, {0, th, u, th}, {});

  SUBCASE("entering a full period sets x' to 1") {
    const double lambda = 1.7;
    const Vector s = sfm_state(1 + lambda, 1, 1);
    for (double xp0 : {0.0, 0.3, 1.0}) {
      const Matrix xp = column({0, 0, xp0, 0, 0});
      const RowVector tp = RowVector::Constant(1, (1 - xp0) / lambda);
      const Matrix out = state_derivative_jump(xp, m.field(sfm::partial).f({0, s, u, th}),
                                               m.field(sfm::full).f({0, s, u, th}), tp, none, up);
      CHECK(out(sfm::x, 0) == doctest::Approx(1.0));
    }
  }
  SUBCASE("ending a busy period sets x' to 0") {
    const Vector s = sfm_state(0.5, 1, 0);
    const Matrix xp = column({0, 0, 1, 0, 0});
    const RowVector tp = RowVector::Constant(1, 2.0);
    const Matrix out = state_derivative_jump(xp, m.field(sfm::partial).f({0, s, u, th}),
                                             m.field(sfm::empty).f({0, s, u, th}), tp, none, up);
    CHECK(std::abs(out(sfm::x, 0)) < 1e-15);
  }
  SUBCASE("continuous field with identity reset leaves x' alone") {
    const Vector s = sfm_state(2, 1, 0.4);
    const Matrix xp = column({0, 0, 0.6, 0, 0});
    const Vector f = m.field(sfm::partial).f({0, s, u, th});
    const Matrix out = state_derivative_jump(xp, f, f, RowVector::Constant(1, 0.8), none, up);
    CHECK((out.array() == xp.array()).all());
  }
  SUBCASE("reset to gamma theta") {
    ResetTestParams p;
    p.gamma = 2.5;
    const auto rt = build_reset_test(p);
    const Vector s = Vector::Zero(2);
    const Draws d{{1.0, RowVector::Zero(1)}};
    const auto rm = reset_matrices(rt, rt.reset(ModeId{0}, EventId{1}), {0, s, u, th}, d);
    const Matrix out = state_derivative_jump(Matrix::Zero(2, 1), rt.field(ModeId{0}).f({0, s, u, th}),
                                             rt.field(ModeId{1}).f({0, s, u, th}),
                                             RowVector::Zero(1), rm, up);
    CHECK(out(0, 0) == 2.5);
    CHECK(out(1, 0) == 0.0);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(state_derivative_jump(Matrix::Zero(5, 1), Vector::Zero(4), Vector::Zero(5),
                                          RowVector::Zero(1), none, up),
                    ModelError);
  }
}

TEST_CASE("endogenous resets pick up the timing shift") {
  const auto m = sawtooth();
  IntegratorConfig cfg = coarse_config();
  const auto path = simulate(m, theta1(0.7), 3.0, cfg, 0);
  const auto rep = run_ipa(m, path, cfg);
  REQUIRE(path.records.size() == 4);
  CHECK(rep.final_x_prime(0, 0) == doctest::Approx(-4.0));
  const auto fd = fd_against_ipa(m, 0.7, 3.0, 1, cfg);
  CHECK(fd.compared == 1);
  CHECK(fd.worst < 1e-6);
}

TEST_CASE("state_derivative_flow") {
  ParametricRateParams p;
  p.c = 1.3;
  const auto m = build_parametric_rate_buffer(p);
  const Vector th = theta1(1.0);
  const Vector x0 = Vector::Zero(2);
  const Vector x1 = Vector::Ones(2);
  const Matrix xp0 = column({0.25, 0});
  const Matrix xp1 = state_derivative_flow(m, ModeId{1}, 2.0, x0, 2.4, x1, th, xp0);
  CHECK(xp1(0, 0) == doctest::Approx(0.25 + 1.3 * 0.4));
  CHECK(state_derivative_flow(m, ModeId{1}, 2.0, x0, 2.0, x0, th, xp0) == xp0);
  CHECK(state_derivative_flow(m, ModeId{0}, 2.0, x0, 2.4, x1, th, xp0) == xp0);

  SUBCASE("state feedback matches the linear ODE solution") {
    // x' = -a x + theta  =>  dx/dtheta = (1 - exp(-a t)) / a
    AutomatonModel lin;
    lin.num_modes = 1;
    lin.num_states = 1;
    lin.num_params = 1;
    const double a = 0.8;
    VectorField vf;
    vf.mode = ModeId{0};
    vf.f = [a](const EvalPoint& q) { return Vector::Constant(1, -a * q.x[0] + q.theta[0]); };
    vf.df_dx = [a](const EvalPoint&) { return Matrix::Constant(1, 1, -a); };
    vf.df_dtheta = [](const EvalPoint&) { return Matrix::Ones(1, 1); };
    lin.fields.push_back(vf);
    Matrix xp = Matrix::Zero(1, 1);
    const double h = 1e-3;
    for (int k = 0; k < 2000; ++k)
      xp = state_derivative_flow(lin, ModeId{0}, k * h, Vector::Zero(1), (k + 1) * h,
                                 Vector::Zero(1), th, xp);
    const double exact = (1 - std::exp(-a * 2.0)) / a;
    CHECK(std::abs(xp(0, 0) - exact) / exact < 1e-6);
  }
}

TEST_CASE("deterministic buffer: workload and loss gradients") {
  // Q(theta) = T theta - theta^2 / (2 lambda), loss(theta) = lambda T - theta.
  const double T = 3.0;
  const double lambda = 1.0;
  for (double theta : {1.0, 0.7, 1.9}) {
    CAPTURE(theta);
    const auto m = build_single_node_sfm(deterministic_sfm());
    IntegratorConfig cfg;
    const auto path = simulate(m, theta1(theta), T, cfg, 0);
    const auto rep = run_ipa(m, path, cfg);
    CHECK(rep.value("workload") == doctest::Approx(T * theta - theta * theta / (2 * lambda)));
    CHECK(rep.gradient("workload")[0] == doctest::Approx(T - theta / lambda).epsilon(1e-9));
    CHECK(rep.value("loss") == doctest::Approx(lambda * T - theta));
    CHECK(rep.gradient("loss")[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(rep.dL_normalized(0)[0] == doctest::Approx((T - theta) / T));
  }
}

TEST_CASE("gradient vanishes without transitions or theta dependence") {
  const auto m = build_single_node_sfm(deterministic_sfm());
  IntegratorConfig cfg;
  const auto path = simulate(m, theta1(1.0), 0.5, cfg, 0);
  REQUIRE(path.records.empty());
  const auto rep = run_ipa(m, path, cfg);
  CHECK(rep.gradient("workload")[0] == 0.0);
  CHECK(rep.gradient("loss")[0] == 0.0);

  TwoModeBufferParams tp;
  tp.kappa = 0.0;
  const auto frozen = build_two_mode_buffer(tp);
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto p = simulate(frozen, theta1(1.2), 20.0, coarse_config(), s);
    CHECK(run_ipa(frozen, p, coarse_config()).dL[0][0] == 0.0);
  }
}

TEST_CASE("exogenous rows and sensitivity sparsity on the buffer") {
  const auto m = build_single_node_sfm(SfmParams{});
  const auto cfg = coarse_config();
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto path = simulate(m, theta1(1.5), 50.0, cfg, s);
    const auto rep = run_ipa(m, path, cfg, true);
    for (const auto& row : rep.per_event)
      if (row.event.value == 4 || row.event.value == 5) CHECK(row.values[0] == 0.0);
    for (const auto& xp : rep.x_prime_trace) {
      CHECK(xp(sfm::alpha, 0) == 0.0);
      CHECK(xp(sfm::beta, 0) == 0.0);
      CHECK(xp(sfm::y_alpha, 0) == 0.0);
      CHECK(xp(sfm::y_beta, 0) == 0.0);
      const double v = xp(sfm::x, 0);
      CHECK((std::abs(v) < 1e-12 || std::abs(v - 1) < 1e-12));
    }
  }
}

TEST_CASE("finite differences agree with IPA under common random numbers") {
  const auto cfg = coarse_config();
  SUBCASE("single-node buffer") {
    const auto fd = fd_against_ipa(build_single_node_sfm(SfmParams{}), 1.5, 50.0, 20, cfg);
    CHECK(fd.compared >= 16);
    CHECK(fd.worst < 1e-3);
  }
  SUBCASE("two-mode buffer with a theta-driven rate") {
    const auto fd = fd_against_ipa(build_two_mode_buffer({}), 1.2, 20.0, 10, cfg);
    CHECK(fd.compared >= 8);
    CHECK(fd.worst < 1e-3);
  }
  SUBCASE("reset-test model") {
    const auto fd = fd_against_ipa(build_reset_test({}), 1.0, 20.0, 10, cfg);
    CHECK(fd.compared >= 8);
    CHECK(fd.worst < 1e-3);
  }
  SUBCASE("parametric-rate buffer") {
    const auto fd = fd_against_ipa(build_parametric_rate_buffer({}), 1.0, 20.0, 10, cfg);
    CHECK(fd.compared == 10);
    CHECK(fd.worst < 1e-3);
  }
}

TEST_CASE("x' follows c (t - tau_k) inside fill periods") {
  ParametricRateParams p;
  p.c = 1.7;
  const auto m = build_parametric_rate_buffer(p);
  IntegratorConfig cfg;
  const auto path = simulate(m, theta1(1.0), 10.0, cfg, 3);
  const auto rep = run_ipa(m, path, cfg, true);
  const auto& tr = path.trajectory;
  double start = 0.0;
  int checked = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (tr.kind(i) == SampleKind::after_event) start = tr.t(i);
    if (tr.mode(i) != ModeId{1} || tr.t(i) - start < 1e-3) continue;
    const double exact = p.c * (tr.t(i) - start);
    CHECK(std::abs(rep.x_prime_trace[i](0, 0) - exact) / exact < 1e-6);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("reset-test: x' jumps to gamma and returns to zero") {
  ResetTestParams p;
  p.gamma = 2.0;
  p.beta = 1.0;
  const auto m = build_reset_test(p);
  IntegratorConfig cfg;
  const auto path = simulate(m, theta1(1.0), 20.0, cfg, 5);
  const auto rep = run_ipa(m, path, cfg, true);
  const auto& tr = path.trajectory;
  int resets = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (tr.kind(i) != SampleKind::after_event) continue;
    const auto& r = path.records[tr.record(i)];
    if (r.event.value == 1) {
      CHECK(rep.x_prime_trace[i](0, 0) == p.gamma);
      ++resets;
    } else {
      CHECK(std::abs(rep.x_prime_trace[i](0, 0)) < 1e-12);
    }
  }
  CHECK(resets > 0);
}
