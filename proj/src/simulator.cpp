#include "shipa/simulator.hpp"

#include <cmath>
#include <sstream>

namespace shipa {

void IntegratorConfig::check() const {
  if (!(step > 0.0) || !(event_tol > 0.0) || !(time_tol > 0.0) || !(gdot_floor > 0.0) ||
      max_chain < 1 || output_stride < 1 || !std::isfinite(step))
    throw ConfigError("integrator settings must all be positive");
}

void Trajectory::push(double t, ModeId mode, const Vector& x, SampleKind kind,
                      std::size_t record) {
  times_.push_back(t);
  modes_.push_back(mode);
  kinds_.push_back(kind);
  records_.push_back(record);
  states_.insert(states_.end(), x.data(), x.data() + x.size());
}

InputStreams::InputStreams(const AutomatonModel& model, std::uint64_t seed,
                           std::uint64_t replication)
    : model_(&model),
      clock_count_(model.clocks.size(), 0),
      jump_count_(model.jumps.size(), 0) {
  const RngStreamSet set(seed);
  for (const auto& c : model.clocks) clock_streams_.push_back(set.stream(c.stream, replication));
  for (const auto& j : model.jumps) jump_streams_.push_back(set.stream(j.stream, replication));
}

Draw InputStreams::next(const DrawRequest& request, const Vector& theta) {
  const auto i = request.source;
  if (request.kind == DrawRequest::Kind::lifetime) {
    const auto n = ++clock_count_.at(i);
    auto l = draw_lifetime(model_->clocks[i], clock_streams_[i], n, theta);
    return {l.value, std::move(l.d_dtheta)};
  }
  const auto n = ++jump_count_.at(i);
  return {draw_jump(model_->jumps[i], jump_streams_[i], n),
          RowVector::Zero(static_cast<Eigen::Index>(model_->num_params))};
}

Vector integrate_step(const AutomatonModel& model, ModeId mode, double t, const Vector& x,
                      const Vector& theta, double h) {
  const auto& f = model.field(mode).f;
  const Vector u = model.inputs(t, theta);
  const Vector k1 = f({t, x, u, theta});
  const Vector x2 = x + 0.5 * h * k1;
  const Vector k2 = f({t + 0.5 * h, x2, u, theta});
  const Vector x3 = x + 0.5 * h * k2;
  const Vector k3 = f({t + 0.5 * h, x3, u, theta});
  const Vector x4 = x + h * k3;
  const Vector k4 = f({t + h, x4, u, theta});
  Vector out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  for (std::size_t j = 0; j < model.num_states; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (model.timer_mask[j]) {
      out[jj] = x[jj] - h;
    } else if (!std::isfinite(out[jj])) {
      std::ostringstream os;
      os << "state " << model.state_names.at(j) << " became non-finite at t=" << t + h
         << " in mode " << mode.index;
      throw AssumptionViolation(1, os.str());
    }
  }
  return out;
}

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

/// Event-location machinery shared by locate_event and simulate.
class Locator {
 public:
  Locator(const AutomatonModel& model, const Vector& theta, const IntegratorConfig& config)
      : m_(model), theta_(theta), cfg_(config), crossing_(model.num_modes), timed_(model.num_modes) {
    for (std::size_t q = 0; q < model.num_modes; ++q) {
      for (const auto& g : model.guards) {
        if (!model.transitions.target(ModeId{q}, g.event)) continue;
        const bool timer = g.watched_state && model.timer_mask[*g.watched_state];
        (timer ? timed_ : crossing_)[q].push_back(g.event.slot());
      }
    }
  }

  double guard(std::size_t slot, double t, const Vector& x) const {
    const Vector u = m_.inputs(t, theta_);
    return m_.guards[slot].value({t, x, u, theta_});
  }

  /// Total time derivative of a guard along the flow of `mode`.
  double guard_rate(std::size_t slot, ModeId mode, double t, const Vector& x) const {
    const Vector u = m_.inputs(t, theta_);
    const EvalPoint p{t, x, u, theta_};
    const auto& g = m_.guards[slot];
    return guard_d_dt(g, p) + g.d_dx(p).dot(m_.field(mode).f(p));
  }

  [[nodiscard]] const std::vector<std::size_t>& crossing(ModeId q) const {
    return crossing_[q.index];
  }
  [[nodiscard]] const std::vector<std::size_t>& timed(ModeId q) const { return timed_[q.index]; }

  /// Sign each crossing guard holds away from its zero set right after
  /// entering `mode` at (t, x); 0 when undetermined.
  std::vector<int> baseline(ModeId mode, double t, const Vector& x) const {
    std::vector<int> b(m_.num_events, 0);
    for (auto slot : crossing(mode)) {
      const double g = guard(slot, t, x);
      b[slot] = std::abs(g) > cfg_.event_tol ? sign_of(g) : sign_of(guard_rate(slot, mode, t, x));
    }
    return b;
  }

  /// Earliest event in (t, t1]. `g_lo`/`g_hi` hold guard values at both ends
  /// and `expiry` the absolute expiry time of every timer state.
  std::optional<LocatedEvent> find(ModeId q, double t, const Vector& x, double t1,
                                   const std::vector<int>& baseline,
                                   const std::vector<double>& g_lo,
                                   const std::vector<double>& g_hi,
                                   const std::vector<double>& expiry) const {
    struct Candidate {
      double tau;
      std::size_t slot;
    };
    std::vector<Candidate> found;
    for (auto slot : timed(q)) {
      const double e = expiry[*m_.guards[slot].watched_state];
      if (e > t && e <= t1) found.push_back({e, slot});
    }
    for (auto slot : crossing(q)) {
      const int b = baseline[slot];
      if (b == 0 || g_lo[slot] * b <= 0.0 || g_hi[slot] * b > 0.0) continue;
      found.push_back({bisect(q, t, x, t1, slot, b, g_lo[slot], g_hi[slot]), slot});
    }
    if (found.empty()) return std::nullopt;

    const auto first = std::min_element(found.begin(), found.end(),
                                        [](const auto& a, const auto& b) { return a.tau < b.tau; });
    for (const auto& c : found) {
      if (c.slot != first->slot && std::abs(c.tau - first->tau) <= cfg_.time_tol) {
        std::ostringstream os;
        os.precision(12);
        os << "independent events E" << first->slot + 1 << " and E" << c.slot + 1
           << " occur simultaneously at t=" << first->tau;
        throw AssumptionViolation(2, os.str());
      }
    }

    LocatedEvent ev{first->tau, EventId{static_cast<int>(first->slot + 1)},
                    integrate_step(m_, q, t, x, theta_, first->tau - t)};
    for (std::size_t j = 0; j < m_.num_states; ++j)
      if (m_.timer_mask[j] && std::isfinite(expiry[j]))
        ev.x_minus[static_cast<Eigen::Index>(j)] = expiry[j] - ev.tau;

    const double rate = guard_rate(first->slot, q, ev.tau, ev.x_minus);
    if (!(std::abs(rate) >= cfg_.gdot_floor)) {
      std::ostringstream os;
      os.precision(12);
      os << "tangential contact of guard E" << ev.event.value << " at t=" << ev.tau
         << " (|dg/dt| = " << std::abs(rate) << " below " << cfg_.gdot_floor << ")";
      throw AssumptionViolation(4, os.str());
    }
    return ev;
  }

  /// A crossing guard stuck at zero over a whole step.
  void check_degenerate(ModeId q, double t, const Vector& x, double t1,
                        const std::vector<double>& g_lo, const std::vector<double>& g_hi) const {
    for (auto slot : crossing(q)) {
      if (std::abs(g_lo[slot]) > cfg_.event_tol || std::abs(g_hi[slot]) > cfg_.event_tol) continue;
      const double mid = 0.5 * (t + t1);
      const Vector xm = integrate_step(m_, q, t, x, theta_, mid - t);
      if (std::abs(guard(slot, mid, xm)) > cfg_.event_tol) continue;
      std::ostringstream os;
      os << "guard E" << slot + 1 << " stays at zero on [" << t << ", " << t1 << "] in mode "
         << q.index << " (rates equal on a non-empty interval)";
      throw AssumptionViolation(5, os.str());
    }
  }

 private:
  double bisect(ModeId q, double t, const Vector& x, double t1, std::size_t slot, int b,
                double glo, double ghi) const {
    double lo = t;
    double hi = t1;
    while (hi - lo > cfg_.time_tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double gm = guard(slot, mid, integrate_step(m_, q, t, x, theta_, mid - t));
      if (gm * b <= 0.0) {
        hi = mid;
        ghi = gm;
      } else {
        lo = mid;
        glo = gm;
      }
    }
    // Secant through the final bracket, then fall back to its crossed end.
    if (ghi != 0.0 && glo != ghi) {
      const double s = std::clamp(lo + (hi - lo) * glo / (glo - ghi), lo, hi);
      const double gs = guard(slot, s, integrate_step(m_, q, t, x, theta_, s - t));
      if (std::abs(gs) <= cfg_.event_tol) return s;
    }
    if (std::abs(ghi) <= cfg_.event_tol) return hi;
    std::ostringstream os;
    os << "could not locate the zero of guard E" << slot + 1 << " near t=" << hi
       << " (residual " << ghi << ")";
    throw NumericalError(os.str());
  }

  const AutomatonModel& m_;
  const Vector& theta_;
  const IntegratorConfig& cfg_;
  std::vector<std::vector<std::size_t>> crossing_;
  std::vector<std::vector<std::size_t>> timed_;
};

}  // namespace

std::optional<LocatedEvent> locate_event(const AutomatonModel& model, ModeId mode, double t_lo,
                                         double t_hi, const Vector& x_lo, const Vector& theta,
                                         const IntegratorConfig& config) {
  const Locator loc(model, theta, config);
  const Vector x_hi = integrate_step(model, mode, t_lo, x_lo, theta, t_hi - t_lo);
  std::vector<double> g_lo(model.num_events, 0.0);
  std::vector<double> g_hi(model.num_events, 0.0);
  std::vector<int> baseline(model.num_events, 0);
  for (auto slot : loc.crossing(mode)) {
    g_lo[slot] = loc.guard(slot, t_lo, x_lo);
    g_hi[slot] = loc.guard(slot, t_hi, x_hi);
    baseline[slot] = sign_of(g_lo[slot]);
  }
  std::vector<double> expiry(model.num_states, INFINITY);
  for (std::size_t j = 0; j < model.num_states; ++j)
    if (model.timer_mask[j]) expiry[j] = t_lo + x_lo[static_cast<Eigen::Index>(j)];
  return loc.find(mode, t_lo, x_lo, t_hi, baseline, g_lo, g_hi, expiry);
}

TransitionOutcome apply_transition(const AutomatonModel& model, ModeId mode, double tau,
                                   const Vector& x_minus, EventId event, InputStreams& inputs,
                                   const Vector& theta, const IntegratorConfig& config,
                                   std::size_t first_k) {
  const auto target = model.transitions.target(mode, event);
  if (!target) {
    std::ostringstream os;
    os << "event E" << event.value << " has no transition out of mode " << mode.index;
    throw ModelError(os.str());
  }
  const Vector u = model.inputs(tau, theta);

  TransitionRecord first;
  first.k = first_k;
  first.tau = tau;
  first.event = event;
  first.from = mode;
  first.to = *target;
  first.x_minus = x_minus;
  if (const ResetMap* r = model.reset(mode, event)) {
    for (const auto& req : r->draws) first.draws.push_back(inputs.next(req, theta));
    first.x_plus = r->r({tau, x_minus, u, theta}, first.draws);
    first.reset = true;
    for (std::size_t j = 0; j < model.num_states; ++j)
      if (!model.timer_mask[j] && !std::isfinite(first.x_plus[static_cast<Eigen::Index>(j)]))
        throw NumericalError("reset of E" + std::to_string(event.value) +
                             " produced a non-finite state");
  } else {
    first.x_plus = x_minus;
  }

  TransitionOutcome out{*target, first.x_plus, {}};
  out.chain.push_back(std::move(first));

  const auto& immediate = model.transitions.immediate;
  for (bool fired = !immediate.empty(); fired;) {
    fired = false;
    const EvalPoint p{tau, out.x_plus, u, theta};
    for (const auto& it : immediate[out.mode.index]) {
      if (!it.violated(p)) continue;
      if (out.chain.size() >= config.max_chain) {
        std::ostringstream os;
        os.precision(12);
        os << "more than " << config.max_chain << " simultaneous transitions at t=" << tau
           << " triggered by E" << event.value;
        throw AssumptionViolation(3, os.str());
      }
      TransitionRecord rec;
      rec.k = first_k + out.chain.size();
      rec.tau = tau;
      rec.event = event;
      rec.from = out.mode;
      rec.to = it.target;
      rec.x_minus = out.x_plus;
      rec.x_plus = out.x_plus;
      rec.chain_position = out.chain.size();
      out.chain.push_back(std::move(rec));
      out.mode = it.target;
      fired = true;
      break;
    }
  }
  return out;
}

SamplePath simulate(const AutomatonModel& model, const Vector& theta, double horizon,
                    const IntegratorConfig& config, std::uint64_t seed,
                    std::uint64_t replication) {
  config.check();
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
  if (static_cast<std::size_t>(theta.size()) != model.num_params)
    throw ConfigError("theta has " + std::to_string(theta.size()) + " entries, model '" +
                      model.name + "' expects " + std::to_string(model.num_params));

  SamplePath path;
  path.trajectory = Trajectory(model.num_states);
  path.horizon = horizon;
  path.theta = theta;
  path.seed = seed;
  path.replication = replication;

  InputStreams inputs(model, seed, replication);
  Vector x = model.initial.x;
  for (const auto& tb : model.timers) {
    Draw d = inputs.next({DrawRequest::Kind::lifetime, tb.clock}, theta);
    x[static_cast<Eigen::Index>(tb.state)] = d.value;
    path.initial_timers.push_back({tb.state, std::move(d)});
  }
  ModeId q = model.initial.mode(x, theta);
  if (!model.transitions.immediate.empty()) {
    const Vector u = model.inputs(0.0, theta);
    for (const auto& it : model.transitions.immediate.at(q.index))
      if (it.violated({0.0, x, u, theta}))
        throw ModelError("initial state violates '" + it.label + "'");
  }

  std::vector<double> expiry(model.num_states, INFINITY);
  for (std::size_t j = 0; j < model.num_states; ++j)
    if (model.timer_mask[j]) expiry[j] = x[static_cast<Eigen::Index>(j)];

  const Locator loc(model, theta, config);
  auto guard_values = [&](ModeId mode, double t, const Vector& state) {
    std::vector<double> g(model.num_events, 0.0);
    for (auto slot : loc.crossing(mode)) g[slot] = loc.guard(slot, t, state);
    return g;
  };
  auto sync_timers = [&](double t, Vector& state) {
    for (std::size_t j = 0; j < model.num_states; ++j)
      if (model.timer_mask[j] && std::isfinite(expiry[j]))
        state[static_cast<Eigen::Index>(j)] = expiry[j] - t;
  };

  double t = 0.0;
  path.trajectory.push(t, q, x, SampleKind::grid);
  std::vector<int> baseline = loc.baseline(q, t, x);
  std::vector<double> g_lo = guard_values(q, t, x);

  while (t < horizon) {
    const bool last = horizon - t <= config.step;
    const double t1 = last ? horizon : t + config.step;
    Vector x1 = integrate_step(model, q, t, x, theta, t1 - t);
    sync_timers(t1, x1);
    std::vector<double> g_hi = guard_values(q, t1, x1);

    auto ev = loc.find(q, t, x, t1, baseline, g_lo, g_hi, expiry);
    if (!ev) {
      if (!last) loc.check_degenerate(q, t, x, t1, g_lo, g_hi);
      for (auto slot : loc.crossing(q))
        if (baseline[slot] == 0 && std::abs(g_hi[slot]) > config.event_tol)
          baseline[slot] = sign_of(g_hi[slot]);
      t = t1;
      x = std::move(x1);
      g_lo = std::move(g_hi);
      path.trajectory.push(t, q, x, SampleKind::grid);
      continue;
    }

    path.trajectory.push(ev->tau, q, ev->x_minus, SampleKind::before_event, path.records.size());
    auto outcome = apply_transition(model, q, ev->tau, ev->x_minus, ev->event, inputs, theta,
                                    config, path.records.size() + 1);
    const TransitionRecord& head = outcome.chain.front();
    if (head.reset) {
      const auto& mask = model.reset(head.from, head.event)->reset_mask;
      for (std::size_t j = 0; j < model.num_states; ++j)
        if (model.timer_mask[j] && mask[j])
          expiry[j] = ev->tau + outcome.x_plus[static_cast<Eigen::Index>(j)];
    }
    for (auto& rec : outcome.chain) path.records.push_back(std::move(rec));

    t = ev->tau;
    q = outcome.mode;
    x = std::move(outcome.x_plus);
    path.trajectory.push(t, q, x, SampleKind::after_event, path.records.size() - 1);
    baseline = loc.baseline(q, t, x);
    g_lo = guard_values(q, t, x);
  }
  return path;
}

}  // namespace shipa
