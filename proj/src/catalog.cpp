#include "shipa/catalog.hpp"

#include <cmath>
#include <limits>

namespace shipa {

namespace {

constexpr double kTol = 1e-9;
constexpr double kNever = std::numeric_limits<double>::infinity();

Eigen::Index idx(std::size_t j) { return static_cast<Eigen::Index>(j); }

RowVector unit_row(std::size_t n, std::size_t j, double v = 1.0) {
  RowVector r = RowVector::Zero(idx(n));
  r[idx(j)] = v;
  return r;
}

/// g = x[j], firing when the component reaches zero.
GuardFunction state_guard(int event, std::size_t j, std::size_t nx) {
  GuardFunction g;
  g.event = EventId{event};
  g.value = [j](const EvalPoint& p) { return p.x[idx(j)]; };
  g.d_dx = [j, nx](const EvalPoint&) { return unit_row(nx, j); };
  g.watched_state = j;
  return g;
}

/// g = x[a] - x[b].
GuardFunction difference_guard(int event, std::size_t a, std::size_t b, std::size_t nx) {
  GuardFunction g;
  g.event = EventId{event};
  g.value = [a, b](const EvalPoint& p) { return p.x[idx(a)] - p.x[idx(b)]; };
  g.d_dx = [a, b, nx](const EvalPoint&) {
    RowVector r = unit_row(nx, a);
    r[idx(b)] = -1.0;
    return r;
  };
  return g;
}

/// Overwrites the listed components with the draws, in order.
ResetMap draw_reset(ModeId from, ModeId to, int event, std::vector<DrawRequest> draws,
                    std::vector<std::size_t> components, std::size_t nx) {
  ResetMap r;
  r.source = from;
  r.target = to;
  r.event = EventId{event};
  r.draws = std::move(draws);
  r.reset_mask.assign(nx, false);
  for (auto j : components) r.reset_mask[j] = true;
  r.r = [components](const EvalPoint& p, const Draws& d) {
    Vector out = p.x;
    for (std::size_t i = 0; i < components.size(); ++i) out[idx(components[i])] = d[i].value;
    return out;
  };
  r.dr_dx = [components, nx](const EvalPoint&, const Draws&) {
    Matrix m = Matrix::Identity(idx(nx), idx(nx));
    for (auto j : components) m(idx(j), idx(j)) = 0.0;
    return m;
  };
  r.dr_dtheta = [components, nx](const EvalPoint& p, const Draws& d) {
    Matrix m = Matrix::Zero(idx(nx), p.theta.size());
    for (std::size_t i = 0; i < components.size(); ++i) m.row(idx(components[i])) = d[i].d_dtheta;
    return m;
  };
  return r;
}

CostIntegrand workload(std::size_t j, std::size_t nx) {
  CostIntegrand c;
  c.name = "workload";
  c.value = [j](ModeId, const EvalPoint& p) { return p.x[idx(j)]; };
  c.d_dx = [j, nx](ModeId, const EvalPoint&) { return unit_row(nx, j); };
  return c;
}

void add(AutomatonModel& m, ModeId from, int event, ModeId to) {
  m.transitions.table.push_back({from, EventId{event}, to});
}

ImmediateTransition immediate(std::string label, ModeId target,
                              std::function<bool(const EvalPoint&)> violated) {
  return {std::move(violated), target, std::move(label)};
}

void check_params(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

void check_nonnegative(const Distribution& d, const char* what) {
  check_distribution(d, false);
  if (support(d).first < 0.0) throw ConfigError(what);
}

}  // namespace

void SfmParams::check() const {
  check_params(theta > 0.0 && std::isfinite(theta), "sfm: theta must be positive");
  check_params(x0 >= 0.0 && x0 <= theta, "sfm: x0 must lie in [0, theta]");
  check_params(alpha0 >= 0.0 && beta0 >= 0.0, "sfm: initial rates must be non-negative");
  check_params(std::isfinite(alpha_drift) && std::isfinite(beta_drift), "sfm: drifts must be finite");
  if (alpha_clock) check_distribution(*alpha_clock, true);
  if (beta_clock) check_distribution(*beta_clock, true);
  check_nonnegative(alpha_jumps, "sfm: arrival-rate jumps must be non-negative");
  check_nonnegative(beta_jumps, "sfm: service-rate jumps must be non-negative");
}

AutomatonModel build_single_node_sfm(const SfmParams& params) {
  params.check();
  using namespace sfm;
  static constexpr std::size_t nx = 5;
  AutomatonModel m;
  m.name = "single-node-sfm";
  m.num_modes = 3;
  m.num_states = nx;
  m.num_params = 1;
  m.num_events = 5;
  m.state_names = {"alpha", "beta", "x", "y_alpha", "y_beta"};
  m.timer_mask = {false, false, false, true, true};

  const double da = params.alpha_drift;
  const double db = params.beta_drift;
  for (std::size_t q = 0; q < 3; ++q) {
    const bool flowing = q == partial.index;
    VectorField vf;
    vf.mode = ModeId{q};
    vf.f = [=](const EvalPoint& p) {
      Vector f(nx);
      f << da, db, flowing ? p.x[alpha] - p.x[beta] : 0.0, -1.0, -1.0;
      return f;
    };
    vf.df_dx = [=](const EvalPoint&) {
      Matrix j = Matrix::Zero(nx, nx);
      if (flowing) {
        j(x, alpha) = 1.0;
        j(x, beta) = -1.0;
      }
      return j;
    };
    m.fields.push_back(std::move(vf));
  }

  m.guards.push_back(difference_guard(1, alpha, beta, nx));
  GuardFunction cap;
  cap.event = EventId{2};
  cap.value = [](const EvalPoint& p) { return p.x[x] - p.theta[0]; };
  cap.d_dx = [](const EvalPoint&) { return unit_row(nx, x); };
  cap.d_dtheta = [](const EvalPoint&) { return unit_row(1, 0, -1.0); };
  m.guards.push_back(std::move(cap));
  m.guards.push_back(state_guard(3, x, nx));
  m.guards.push_back(state_guard(4, y_alpha, nx));
  m.guards.push_back(state_guard(5, y_beta, nx));

  add(m, empty, 1, partial);
  add(m, empty, 4, empty);
  add(m, empty, 5, empty);
  add(m, partial, 1, partial);
  add(m, partial, 2, full);
  add(m, partial, 3, empty);
  add(m, partial, 4, partial);
  add(m, partial, 5, partial);
  add(m, full, 1, partial);
  add(m, full, 4, full);
  add(m, full, 5, full);

  for (auto q : {empty, partial, full}) {
    m.resets.push_back(draw_reset(q, q, 4,
                                  {{DrawRequest::Kind::jump, 0}, {DrawRequest::Kind::lifetime, 0}},
                                  {alpha, y_alpha}, nx));
    m.resets.push_back(draw_reset(q, q, 5,
                                  {{DrawRequest::Kind::jump, 1}, {DrawRequest::Kind::lifetime, 1}},
                                  {beta, y_beta}, nx));
  }

  m.transitions.immediate.resize(3);
  m.transitions.immediate[empty.index].push_back(
      immediate("alpha > beta with an empty buffer", partial,
                [](const EvalPoint& p) { return p.x[alpha] > p.x[beta]; }));
  m.transitions.immediate[partial.index].push_back(
      immediate("buffer drains below zero", empty, [](const EvalPoint& p) {
        return p.x[x] <= kTol && p.x[alpha] - p.x[beta] < -kTol;
      }));
  m.transitions.immediate[partial.index].push_back(
      immediate("buffer fills past capacity", full, [](const EvalPoint& p) {
        return p.x[x] >= p.theta[0] - kTol && p.x[alpha] - p.x[beta] > kTol;
      }));
  m.transitions.immediate[full.index].push_back(immediate(
      "alpha <= beta with a full buffer", partial,
      [](const EvalPoint& p) { return p.x[alpha] <= p.x[beta]; }));

  m.clocks.push_back({EventId{4}, params.alpha_clock.value_or(Deterministic{kNever}), {}, 1});
  m.clocks.push_back({EventId{5}, params.beta_clock.value_or(Deterministic{kNever}), {}, 2});
  m.jumps.push_back({params.alpha_jumps, 0, 1001});
  m.jumps.push_back({params.beta_jumps, 1, 1002});
  m.timers = {{y_alpha, 0}, {y_beta, 1}};

  m.initial.x = Vector::Zero(nx);
  m.initial.x[alpha] = params.alpha0;
  m.initial.x[beta] = params.beta0;
  m.initial.x[x] = params.x0;
  m.initial.mode = [](const Vector& s, const Vector& theta) {
    const bool rising = s[alpha] > s[beta];
    if (s[x] <= 0.0) return rising ? partial : empty;
    if (s[x] >= theta[0]) return rising ? full : partial;
    return partial;
  };

  m.costs.push_back(workload(x, nx));
  CostIntegrand loss;
  loss.name = "loss";
  loss.value = [](ModeId q, const EvalPoint& p) {
    return q == full ? p.x[alpha] - p.x[beta] : 0.0;
  };
  loss.d_dx = [](ModeId q, const EvalPoint&) {
    RowVector r = RowVector::Zero(nx);
    if (q == full) {
      r[alpha] = 1.0;
      r[beta] = -1.0;
    }
    return r;
  };
  m.costs.push_back(std::move(loss));

  m.sampling.x_lower = Vector::Zero(nx);
  m.sampling.x_upper = Vector::Constant(nx, 4.0);
  m.sampling.theta_lower = Vector::Constant(1, 0.2);
  m.sampling.theta_upper = Vector::Constant(1, 5.0);
  return m;
}

std::size_t NepFpStructure::N_F() const {
  std::size_t n = 0;
  for (const auto& nep : neps) n += nep.fps.empty() ? 0 : 1;
  return n;
}

NepFpStructure analyze_nep_fp(const AutomatonModel& model, const SamplePath& path) {
  if (model.name != "single-node-sfm" || path.trajectory.size() == 0)
    throw ModelError("non-empty/full period analysis needs a single-node-sfm path");
  using namespace sfm;
  NepFpStructure s;
  const ModeId q0 = path.trajectory.mode(0);
  bool in_nep = q0 != empty;
  bool in_fp = q0 == full;
  if (in_nep) s.neps.push_back({0.0, path.horizon, false, {}});
  if (in_fp) s.neps.back().fps.emplace_back(0.0, path.horizon);

  for (const auto& r : path.records) {
    if (r.from == r.to) continue;
    if (r.from == full && in_fp) {
      s.neps.back().fps.back().second = r.tau;
      in_fp = false;
    }
    if (r.to == empty && in_nep) {
      s.neps.back().eta = r.tau;
      in_nep = false;
    }
    if (r.from == empty && !in_nep) {
      s.neps.push_back({r.tau, path.horizon, false, {}});
      in_nep = true;
    }
    if (r.to == full && !in_fp) {
      if (!in_nep) throw ModelError("full period outside a non-empty period");
      s.neps.back().fps.emplace_back(r.tau, path.horizon);
      in_fp = true;
    }
  }
  if (in_nep) s.neps.back().open_at_horizon = true;
  return s;
}

double closed_form_workload_grad(const NepFpStructure& s) {
  double sum = 0.0;
  for (const auto& nep : s.neps)
    if (!nep.fps.empty()) sum += nep.eta - nep.fps.front().first;
  return sum;
}

double closed_form_loss_grad(const NepFpStructure& s) { return -static_cast<double>(s.N_F()); }

void TwoModeBufferParams::check() const {
  check_params(kappa >= 0.0 && std::isfinite(kappa), "two-mode-buffer: kappa must be >= 0");
  check_params(beta > 0.0 && std::isfinite(beta), "two-mode-buffer: beta must be positive");
  check_params(x0 >= 0.0 && std::isfinite(x0), "two-mode-buffer: x0 must be >= 0");
  check_params(alpha0 >= 0.0 && std::isfinite(alpha0), "two-mode-buffer: alpha0 must be >= 0");
  if (clock) check_distribution(*clock, true);
  check_nonnegative(jumps, "two-mode-buffer: jumps must be non-negative");
}

AutomatonModel build_two_mode_buffer(const TwoModeBufferParams& params) {
  params.check();
  static constexpr std::size_t nx = 3;
  constexpr std::size_t a = 0;
  constexpr std::size_t xb = 1;
  constexpr std::size_t y = 2;
  const ModeId idle{0};
  const ModeId busy{1};

  AutomatonModel m;
  m.name = "two-mode-buffer";
  m.num_modes = 2;
  m.num_states = nx;
  m.num_params = 1;
  m.num_events = 3;
  m.state_names = {"alpha", "x", "y"};
  m.timer_mask = {false, false, true};

  const double kappa = params.kappa;
  const double beta = params.beta;
  for (std::size_t q = 0; q < 2; ++q) {
    const bool flowing = q == busy.index;
    VectorField vf;
    vf.mode = ModeId{q};
    vf.f = [=](const EvalPoint& p) {
      Vector f(nx);
      f << kappa * (p.theta[0] - p.x[a]), flowing ? p.x[a] - beta : 0.0, -1.0;
      return f;
    };
    vf.df_dx = [=](const EvalPoint&) {
      Matrix j = Matrix::Zero(nx, nx);
      j(a, a) = -kappa;
      if (flowing) j(xb, a) = 1.0;
      return j;
    };
    vf.df_dtheta = [=](const EvalPoint&) {
      Matrix j = Matrix::Zero(nx, 1);
      j(a, 0) = kappa;
      return j;
    };
    m.fields.push_back(std::move(vf));
  }

  GuardFunction level;
  level.event = EventId{1};
  level.value = [beta](const EvalPoint& p) { return p.x[a] - beta; };
  level.d_dx = [](const EvalPoint&) { return unit_row(nx, a); };
  m.guards.push_back(std::move(level));
  m.guards.push_back(state_guard(2, xb, nx));
  m.guards.push_back(state_guard(3, y, nx));

  add(m, idle, 1, busy);
  add(m, idle, 3, idle);
  add(m, busy, 1, busy);
  add(m, busy, 2, idle);
  add(m, busy, 3, busy);
  for (auto q : {idle, busy})
    m.resets.push_back(draw_reset(q, q, 3,
                                  {{DrawRequest::Kind::jump, 0}, {DrawRequest::Kind::lifetime, 0}},
                                  {a, y}, nx));

  m.transitions.immediate.resize(2);
  m.transitions.immediate[idle.index].push_back(immediate(
      "alpha > beta with an empty buffer", busy,
      [beta](const EvalPoint& p) { return p.x[a] - beta > kTol; }));
  m.transitions.immediate[busy.index].push_back(
      immediate("buffer drains below zero", idle, [beta](const EvalPoint& p) {
        return p.x[xb] <= kTol && p.x[a] - beta < -kTol;
      }));

  m.clocks.push_back({EventId{3}, params.clock.value_or(Deterministic{kNever}), {}, 1});
  m.jumps.push_back({params.jumps, 0, 1001});
  m.timers = {{y, 0}};

  m.initial.x = Vector::Zero(nx);
  m.initial.x[a] = params.alpha0;
  m.initial.x[xb] = params.x0;
  m.initial.mode = [beta, idle, busy](const Vector& s, const Vector&) {
    return s[xb] > 0.0 || s[a] - beta > kTol ? busy : idle;
  };
  m.costs.push_back(workload(xb, nx));

  m.sampling.x_lower = Vector::Zero(nx);
  m.sampling.x_upper = Vector::Constant(nx, 3.0);
  m.sampling.theta_lower = Vector::Constant(1, 0.2);
  m.sampling.theta_upper = Vector::Constant(1, 3.0);
  return m;
}

void ParametricRateParams::check() const {
  check_params(std::isfinite(c) && std::isfinite(beta), "parametric-rate-buffer: c and beta must be finite");
  check_distribution(clock, true);
}

AutomatonModel build_parametric_rate_buffer(const ParametricRateParams& params) {
  params.check();
  static constexpr std::size_t nx = 2;
  const ModeId idle{0};
  const ModeId fill{1};
  const double c = params.c;
  const double beta = params.beta;

  AutomatonModel m;
  m.name = "parametric-rate-buffer";
  m.num_modes = 2;
  m.num_states = nx;
  m.num_params = 1;
  m.num_events = 1;
  m.state_names = {"x", "y"};
  m.timer_mask = {false, true};
  for (std::size_t q = 0; q < 2; ++q) {
    const bool flowing = q == fill.index;
    VectorField vf;
    vf.mode = ModeId{q};
    vf.f = [=](const EvalPoint& p) {
      Vector f(nx);
      f << (flowing ? p.theta[0] * c - beta : 0.0), -1.0;
      return f;
    };
    vf.df_dx = [](const EvalPoint&) { return Matrix::Zero(nx, nx); };
    vf.df_dtheta = [=](const EvalPoint&) {
      Matrix j = Matrix::Zero(nx, 1);
      if (flowing) j(0, 0) = c;
      return j;
    };
    m.fields.push_back(std::move(vf));
  }
  m.guards.push_back(state_guard(1, 1, nx));
  add(m, idle, 1, fill);
  add(m, fill, 1, idle);
  m.resets.push_back(draw_reset(idle, fill, 1, {{DrawRequest::Kind::lifetime, 0}}, {1}, nx));
  ResetMap flush = draw_reset(fill, idle, 1, {{DrawRequest::Kind::lifetime, 0}}, {1}, nx);
  flush.reset_mask[0] = true;
  flush.r = [](const EvalPoint& p, const Draws& d) {
    Vector out(nx);
    out << 0.0, d[0].value;
    (void)p;
    return out;
  };
  flush.dr_dx = [](const EvalPoint&, const Draws&) { return Matrix::Zero(nx, nx); };
  m.resets.push_back(std::move(flush));

  m.clocks.push_back({EventId{1}, params.clock, {}, 1});
  m.timers = {{1, 0}};
  m.initial.x = Vector::Zero(nx);
  m.initial.mode = [idle](const Vector&, const Vector&) { return idle; };
  m.costs.push_back(workload(0, nx));

  m.sampling.x_lower = Vector::Zero(nx);
  m.sampling.x_upper = Vector::Constant(nx, 3.0);
  m.sampling.theta_lower = Vector::Constant(1, 0.5);
  m.sampling.theta_upper = Vector::Constant(1, 2.0);
  return m;
}

void ResetTestParams::check() const {
  check_params(std::isfinite(gamma) && gamma > 0.0, "reset-test: gamma must be positive");
  check_params(std::isfinite(beta) && beta > 0.0, "reset-test: beta must be positive");
  check_distribution(clock, true);
}

AutomatonModel build_reset_test(const ResetTestParams& params) {
  params.check();
  static constexpr std::size_t nx = 2;
  const ModeId rest{0};
  const ModeId drain{1};
  const double gamma = params.gamma;
  const double beta = params.beta;

  AutomatonModel m;
  m.name = "reset-test";
  m.num_modes = 2;
  m.num_states = nx;
  m.num_params = 1;
  m.num_events = 2;
  m.state_names = {"x", "y"};
  m.timer_mask = {false, true};
  for (std::size_t q = 0; q < 2; ++q) {
    const bool flowing = q == drain.index;
    VectorField vf;
    vf.mode = ModeId{q};
    vf.f = [=](const EvalPoint&) {
      Vector f(nx);
      f << (flowing ? -beta : 0.0), -1.0;
      return f;
    };
    vf.df_dx = [](const EvalPoint&) { return Matrix::Zero(nx, nx); };
    m.fields.push_back(std::move(vf));
  }
  m.guards.push_back(state_guard(1, 1, nx));
  m.guards.push_back(state_guard(2, 0, nx));
  add(m, rest, 1, drain);
  add(m, drain, 1, drain);
  add(m, drain, 2, rest);
  for (auto q : {rest, drain}) {
    ResetMap r = draw_reset(q, drain, 1, {{DrawRequest::Kind::lifetime, 0}}, {1}, nx);
    r.reset_mask[0] = true;
    r.r = [gamma](const EvalPoint& p, const Draws& d) {
      Vector out(nx);
      out << gamma * p.theta[0], d[0].value;
      return out;
    };
    r.dr_dx = [](const EvalPoint&, const Draws&) { return Matrix::Zero(nx, nx); };
    r.dr_dtheta = [gamma](const EvalPoint&, const Draws& d) {
      Matrix j(nx, 1);
      j << gamma, d[0].d_dtheta[0];
      return j;
    };
    m.resets.push_back(std::move(r));
  }
  m.clocks.push_back({EventId{1}, params.clock, {}, 1});
  m.timers = {{1, 0}};
  m.initial.x = Vector::Zero(nx);
  m.initial.mode = [rest](const Vector&, const Vector&) { return rest; };
  m.costs.push_back(workload(0, nx));

  m.sampling.x_lower = Vector::Zero(nx);
  m.sampling.x_upper = Vector::Constant(nx, 3.0);
  m.sampling.theta_lower = Vector::Constant(1, 0.5);
  m.sampling.theta_upper = Vector::Constant(1, 2.0);
  return m;
}

AutomatonModel build_tangent_guard() {
  AutomatonModel m;
  m.name = "tangent-guard";
  m.num_modes = 2;
  m.num_states = 1;
  m.num_params = 1;
  m.num_events = 1;
  m.state_names = {"x"};
  m.timer_mask = {false};
  for (std::size_t q = 0; q < 2; ++q) {
    VectorField vf;
    vf.mode = ModeId{q};
    vf.f = [](const EvalPoint&) { return Vector::Ones(1); };
    vf.df_dx = [](const EvalPoint&) { return Matrix::Zero(1, 1); };
    m.fields.push_back(std::move(vf));
  }
  GuardFunction g;
  g.event = EventId{1};
  g.value = [](const EvalPoint& p) { return std::pow(p.x[0] - p.theta[0], 3); };
  g.d_dx = [](const EvalPoint& p) {
    return RowVector::Constant(1, 3.0 * std::pow(p.x[0] - p.theta[0], 2));
  };
  g.d_dtheta = [](const EvalPoint& p) {
    return RowVector::Constant(1, -3.0 * std::pow(p.x[0] - p.theta[0], 2));
  };
  m.guards.push_back(std::move(g));
  add(m, ModeId{0}, 1, ModeId{1});
  m.initial.x = Vector::Zero(1);
  m.initial.mode = [](const Vector&, const Vector&) { return ModeId{0}; };
  m.costs.push_back(workload(0, 1));
  m.sampling.x_lower = Vector::Zero(1);
  m.sampling.x_upper = Vector::Constant(1, 2.0);
  m.sampling.theta_lower = Vector::Constant(1, 0.5);
  m.sampling.theta_upper = Vector::Constant(1, 1.5);
  return m;
}

AutomatonModel build_zeno_chain(double period) {
  if (!(period > 0.0)) throw ConfigError("zeno-chain: period must be positive");
  static constexpr std::size_t nx = 2;
  AutomatonModel m;
  m.name = "zeno-chain";
  m.num_modes = 2;
  m.num_states = nx;
  m.num_params = 1;
  m.num_events = 1;
  m.state_names = {"z", "y"};
  m.timer_mask = {false, true};
  for (std::size_t q = 0; q < 2; ++q) {
    VectorField vf;
    vf.mode = ModeId{q};
    vf.f = [](const EvalPoint&) {
      Vector f(nx);
      f << 0.0, -1.0;
      return f;
    };
    vf.df_dx = [](const EvalPoint&) { return Matrix::Zero(nx, nx); };
    m.fields.push_back(std::move(vf));
  }
  m.guards.push_back(state_guard(1, 1, nx));
  for (std::size_t q = 0; q < 2; ++q) {
    add(m, ModeId{q}, 1, ModeId{q});
    ResetMap r = draw_reset(ModeId{q}, ModeId{q}, 1, {{DrawRequest::Kind::lifetime, 0}}, {1}, nx);
    r.reset_mask[0] = true;
    r.r = [](const EvalPoint&, const Draws& d) {
      Vector out(nx);
      out << 1.0, d[0].value;
      return out;
    };
    r.dr_dx = [](const EvalPoint&, const Draws&) { return Matrix::Zero(nx, nx); };
    m.resets.push_back(std::move(r));
  }
  m.transitions.immediate.resize(2);
  auto raised = [](const EvalPoint& p) { return p.x[0] > 0.5; };
  m.transitions.immediate[0].push_back(immediate("z raised in mode 0", ModeId{1}, raised));
  m.transitions.immediate[1].push_back(immediate("z raised in mode 1", ModeId{0}, raised));
  m.clocks.push_back({EventId{1}, Deterministic{period}, {}, 1});
  m.timers = {{1, 0}};
  m.initial.x = Vector::Zero(nx);
  m.initial.mode = [](const Vector&, const Vector&) { return ModeId{0}; };
  m.costs.push_back(workload(0, nx));
  m.sampling.x_lower = Vector::Zero(nx);
  m.sampling.x_upper = Vector::Ones(nx);
  m.sampling.theta_lower = Vector::Zero(1);
  m.sampling.theta_upper = Vector::Ones(1);
  return m;
}

}  // namespace shipa
