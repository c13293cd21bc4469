#include "shipa/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace shipa {

bool Box::contains(const Vector& v) const {
  return v.size() == lower.size() && (v.array() >= lower.array()).all() &&
         (v.array() <= upper.array()).all();
}

Vector Box::project(const Vector& v) const { return v.cwiseMax(lower).cwiseMin(upper); }

void ParameterVector::check() const {
  if (values.size() == 0) throw ConfigError("parameter vector is empty");
  if (!values.allFinite()) throw ConfigError("parameter vector is not finite");
  if (!bounds) return;
  if (bounds->lower.size() != values.size() || bounds->upper.size() != values.size())
    throw ConfigError("parameter bounds have the wrong dimension");
  if ((bounds->lower.array() > bounds->upper.array()).any())
    throw ConfigError("parameter bounds have lower > upper");
  if (!bounds->contains(values)) throw ConfigError("parameter vector lies outside its bounds");
}

std::optional<ModeId> TransitionFunction::target(ModeId source, EventId event) const {
  for (const auto& tr : table)
    if (tr.source == source && tr.event == event) return tr.target;
  return std::nullopt;
}

const GuardFunction& AutomatonModel::guard(EventId event) const {
  if (event.value < 1 || event.slot() >= guards.size())
    throw ConfigError("unknown event id E" + std::to_string(event.value));
  return guards[event.slot()];
}

const ResetMap* AutomatonModel::reset(ModeId source, EventId event) const {
  for (const auto& r : resets)
    if (r.source == source && r.event == event) return &r;
  return nullptr;
}

std::size_t AutomatonModel::cost_index(std::string_view cost) const {
  for (std::size_t i = 0; i < costs.size(); ++i)
    if (costs[i].name == cost) return i;
  throw ConfigError("model '" + name + "' has no cost named '" + std::string(cost) + "'");
}

std::optional<std::size_t> AutomatonModel::timer_clock(std::size_t state) const {
  for (const auto& t : timers)
    if (t.state == state) return t.clock;
  return std::nullopt;
}

Vector AutomatonModel::inputs(double t, const Vector& theta) const {
  if (num_inputs == 0 || !input.value) return Vector(0);
  return input.value(t, theta);
}

Matrix AutomatonModel::input_sensitivity(double t, const Vector& theta) const {
  if (num_inputs == 0 || !input.d_dtheta) return Matrix::Zero(num_inputs, num_params);
  return input.d_dtheta(t, theta);
}

RowVector guard_d_du(const AutomatonModel& model, const GuardFunction& g, const EvalPoint& p) {
  return g.d_du ? g.d_du(p) : RowVector::Zero(model.num_inputs);
}

RowVector guard_d_dtheta(const AutomatonModel& model, const GuardFunction& g,
                         const EvalPoint& p) {
  return g.d_dtheta ? g.d_dtheta(p) : RowVector::Zero(model.num_params);
}

double guard_d_dt(const GuardFunction& g, const EvalPoint& p) { return g.d_dt ? g.d_dt(p) : 0.0; }

Matrix field_df_du(const AutomatonModel& model, const VectorField& f, const EvalPoint& p) {
  return f.df_du ? f.df_du(p) : Matrix::Zero(model.num_states, model.num_inputs);
}

Matrix field_df_dtheta(const AutomatonModel& model, const VectorField& f, const EvalPoint& p) {
  return f.df_dtheta ? f.df_dtheta(p) : Matrix::Zero(model.num_states, model.num_params);
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<std::string> ValidationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.passed) out.push_back(c.name + ": " + c.detail);
  return out;
}

namespace {

constexpr double kFdStep = 1e-6;
constexpr double kFdRelTol = 1e-4;
constexpr int kGuardPoints = 100;
constexpr int kOtherPoints = 20;

struct SamplePoint {
  double t;
  Vector x;
  Vector u;
  Vector theta;
};

class PointSampler {
 public:
  explicit PointSampler(const AutomatonModel& m) : model_(m), rng_(0x5eed5eedULL) {}

  SamplePoint next() {
    const auto& s = model_.sampling;
    SamplePoint p;
    p.t = uniform(s.t_lower, s.t_upper);
    p.x.resize(static_cast<Eigen::Index>(model_.num_states));
    for (Eigen::Index j = 0; j < p.x.size(); ++j) p.x[j] = uniform(s.x_lower[j], s.x_upper[j]);
    p.theta.resize(static_cast<Eigen::Index>(model_.num_params));
    for (Eigen::Index j = 0; j < p.theta.size(); ++j)
      p.theta[j] = uniform(s.theta_lower[j], s.theta_upper[j]);
    p.u = model_.inputs(p.t, p.theta);
    return p;
  }

 private:
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  }

  const AutomatonModel& model_;
  std::mt19937_64 rng_;
};

bool close(double analytic, double numeric) {
  return std::abs(analytic - numeric) <= kFdRelTol * std::max(1.0, std::abs(numeric));
}

/// Central difference of a scalar function along each coordinate of `arg`.
template <class F>
RowVector central_gradient(F&& fn, Vector arg) {
  RowVector g(arg.size());
  for (Eigen::Index j = 0; j < arg.size(); ++j) {
    const double saved = arg[j];
    arg[j] = saved + kFdStep;
    const double up = fn(arg);
    arg[j] = saved - kFdStep;
    const double down = fn(arg);
    arg[j] = saved;
    g[j] = (up - down) / (2.0 * kFdStep);
  }
  return g;
}

/// Returns an empty string on agreement, otherwise a description of the
/// first mismatching entry.
std::string compare_rows(const RowVector& analytic, const RowVector& numeric) {
  if (analytic.size() != numeric.size()) {
    std::ostringstream os;
    os << "dimension " << analytic.size() << " != " << numeric.size();
    return os.str();
  }
  for (Eigen::Index j = 0; j < analytic.size(); ++j) {
    if (!close(analytic[j], numeric[j])) {
      std::ostringstream os;
      os << "entry " << j << ": analytic " << analytic[j] << " vs finite difference "
         << numeric[j];
      return os.str();
    }
  }
  return {};
}

Draws sample_draws(const AutomatonModel& model, const std::vector<DrawRequest>& requests) {
  Draws out;
  for (const auto& req : requests) {
    const Distribution& dist = req.kind == DrawRequest::Kind::lifetime
                                   ? model.clocks.at(req.source).sampler
                                   : model.jumps.at(req.source).values;
    auto [lo, hi] = support(dist);
    const double v = std::isfinite(hi) ? 0.5 * (lo + hi) : std::isfinite(lo) ? lo + 1.0 : 1.0;
    out.push_back({v, RowVector::Zero(model.num_params)});
  }
  return out;
}

class Validator {
 public:
  explicit Validator(const AutomatonModel& m) : m_(m) {}

  ValidationReport run() {
    if (!check_structure()) return report_;
    check_guards();
    check_fields();
    check_resets();
    check_costs();
    check_initial();
    return report_;
  }

 private:
  void add(std::string name, std::string failure) {
    report_.checks.push_back({std::move(name), failure.empty(), std::move(failure)});
  }

  bool check_structure() {
    std::ostringstream err;
    const auto nx = m_.num_states;
    if (m_.num_modes == 0 || nx == 0 || m_.num_params == 0 || m_.num_events == 0)
      err << "all of N_q, N_x, N_theta, N_e must be positive; ";
    if (m_.timer_mask.size() != nx) err << "timer_mask has wrong length; ";
    if (m_.fields.size() != m_.num_modes) err << "need one vector field per mode; ";
    for (std::size_t q = 0; q < m_.fields.size(); ++q)
      if (m_.fields[q].mode.index != q || !m_.fields[q].f || !m_.fields[q].df_dx)
        err << "vector field " << q << " is mislabeled or incomplete; ";
    if (m_.guards.size() != m_.num_events) err << "need exactly one guard per event; ";
    for (std::size_t i = 0; i < m_.guards.size(); ++i)
      if (m_.guards[i].event.value != static_cast<int>(i + 1) || !m_.guards[i].value ||
          !m_.guards[i].d_dx)
        err << "guard " << i + 1 << " is mislabeled or incomplete; ";
    if (static_cast<std::size_t>(m_.initial.x.size()) != nx) err << "initial state length; ";
    if (!m_.initial.mode) err << "initial mode selector missing; ";
    const auto& s = m_.sampling;
    if (static_cast<std::size_t>(s.x_lower.size()) != nx ||
        static_cast<std::size_t>(s.x_upper.size()) != nx ||
        static_cast<std::size_t>(s.theta_lower.size()) != m_.num_params ||
        static_cast<std::size_t>(s.theta_upper.size()) != m_.num_params)
      err << "sampling region has wrong dimensions; ";
    for (const auto& c : m_.clocks) {
      try {
        check_distribution(c.sampler, true);
      } catch (const ConfigError& e) {
        err << "clock of E" << c.event.value << ": " << e.what() << "; ";
      }
    }
    for (const auto& j : m_.jumps) {
      if (j.clock >= m_.clocks.size()) err << "jump process refers to a missing clock; ";
      try {
        check_distribution(j.values, false);
      } catch (const ConfigError& e) {
        err << "jump process: " << e.what() << "; ";
      }
    }
    for (const auto& t : m_.timers)
      if (t.state >= nx || !m_.timer_mask[t.state] || t.clock >= m_.clocks.size())
        err << "timer binding for state " << t.state << " is invalid; ";
    add("dimensions", err.str());
    if (!err.str().empty()) return false;

    std::ostringstream table;
    std::set<std::pair<std::size_t, int>> seen;
    for (const auto& tr : m_.transitions.table) {
      if (tr.source.index >= m_.num_modes || tr.target.index >= m_.num_modes ||
          tr.event.value < 1 || static_cast<std::size_t>(tr.event.value) > m_.num_events)
        table << "entry (" << tr.source.index << ",E" << tr.event.value << ") out of range; ";
      if (!seen.insert({tr.source.index, tr.event.value}).second)
        table << "duplicate entry (" << tr.source.index << ",E" << tr.event.value << "); ";
    }
    for (const auto& r : m_.resets) {
      const auto target = m_.transitions.target(r.source, r.event);
      if (!target || *target != r.target)
        table << "reset (" << r.source.index << "," << r.target.index << ",E" << r.event.value
              << ") has no matching transition; ";
      if (r.reset_mask.size() != m_.num_states || !r.r || !r.dr_dx)
        table << "reset for E" << r.event.value << " is incomplete; ";
      for (const auto& d : r.draws) {
        const auto n = d.kind == DrawRequest::Kind::lifetime ? m_.clocks.size() : m_.jumps.size();
        if (d.source >= n) table << "reset for E" << r.event.value << " draws from nowhere; ";
      }
    }
    if (!m_.transitions.immediate.empty() && m_.transitions.immediate.size() != m_.num_modes)
      table << "immediate transitions must be listed per mode; ";
    for (const auto& list : m_.transitions.immediate)
      for (const auto& it : list)
        if (it.target.index >= m_.num_modes || !it.violated)
          table << "immediate transition '" << it.label << "' is invalid; ";
    // A timer keeps running in every mode, so its expiry must be handled everywhere.
    for (const auto& g : m_.guards) {
      if (!g.watched_state || !m_.timer_mask[*g.watched_state]) continue;
      for (std::size_t q = 0; q < m_.num_modes; ++q)
        if (!m_.transitions.target(ModeId{q}, g.event))
          table << "timer event E" << g.event.value << " has no transition in mode " << q << "; ";
    }
    add("transition table completeness", table.str());
    return table.str().empty();
  }

  void check_guards() {
    PointSampler sampler(m_);
    std::vector<SamplePoint> pts;
    for (int k = 0; k < kGuardPoints; ++k) pts.push_back(sampler.next());

    for (const auto& g : m_.guards) {
      const std::string tag = "guard E" + std::to_string(g.event.value);
      bool nonzero = false;
      std::string mismatch;
      for (const auto& p : pts) {
        EvalPoint ep{p.t, p.x, p.u, p.theta};
        if (g.value(ep) != 0.0) nonzero = true;
        if (!mismatch.empty()) continue;
        auto vx = [&](const Vector& x) { return g.value({p.t, x, p.u, p.theta}); };
        auto vth = [&](const Vector& th) { return g.value({p.t, p.x, p.u, th}); };
        mismatch = compare_rows(g.d_dx(ep), central_gradient(vx, p.x));
        if (mismatch.empty())
          mismatch = compare_rows(guard_d_dtheta(m_, g, ep), central_gradient(vth, p.theta));
        if (mismatch.empty() && m_.num_inputs > 0) {
          auto vu = [&](const Vector& u) { return g.value({p.t, p.x, u, p.theta}); };
          mismatch = compare_rows(guard_d_du(m_, g, ep), central_gradient(vu, p.u));
        }
        if (mismatch.empty()) {
          const double h = kFdStep;
          const double num = (g.value({p.t + h, p.x, p.u, p.theta}) -
                              g.value({p.t - h, p.x, p.u, p.theta})) / (2 * h);
          if (!close(guard_d_dt(g, ep), num)) mismatch = "explicit time partial";
        }
        if (!mismatch.empty()) mismatch = "partial mismatch: " + mismatch;
      }
      add(tag + " non-null", nonzero ? "" : "guard identically zero");
      add(tag + " partials", mismatch);
    }
  }

  void check_fields() {
    PointSampler sampler(m_);
    for (const auto& vf : m_.fields) {
      const std::string tag = "vector field q=" + std::to_string(vf.mode.index);
      std::string mismatch;
      std::string timer;
      for (int k = 0; k < kOtherPoints; ++k) {
        const auto p = sampler.next();
        EvalPoint ep{p.t, p.x, p.u, p.theta};
        const Vector f = vf.f(ep);
        if (!f.allFinite()) mismatch = "non-finite vector field (Assumption 1)";
        for (std::size_t j = 0; j < m_.num_states; ++j)
          if (m_.timer_mask[j] && f[static_cast<Eigen::Index>(j)] != -1.0)
            timer = "timer component " + std::to_string(j) + " does not decay at rate -1";
        if (!mismatch.empty()) continue;
        const Matrix jx = vf.df_dx(ep);
        const Matrix jt = field_df_dtheta(m_, vf, ep);
        for (Eigen::Index i = 0; i < f.size() && mismatch.empty(); ++i) {
          auto fx = [&](const Vector& x) { return vf.f({p.t, x, p.u, p.theta})[i]; };
          auto fth = [&](const Vector& th) { return vf.f({p.t, p.x, p.u, th})[i]; };
          mismatch = compare_rows(jx.row(i), central_gradient(fx, p.x));
          if (mismatch.empty()) mismatch = compare_rows(jt.row(i), central_gradient(fth, p.theta));
          if (mismatch.empty() && m_.num_inputs > 0) {
            auto fu = [&](const Vector& u) { return vf.f({p.t, p.x, u, p.theta})[i]; };
            mismatch = compare_rows(field_df_du(m_, vf, ep).row(i), central_gradient(fu, p.u));
          }
          if (!mismatch.empty())
            mismatch = "partial mismatch: row " + std::to_string(i) + ", " + mismatch;
        }
      }
      add(tag + " partials", mismatch);
      add(tag + " timer dynamics", timer);
    }
  }

  void check_resets() {
    PointSampler sampler(m_);
    for (const auto& r : m_.resets) {
      const std::string tag = "reset (" + std::to_string(r.source.index) + "," +
                              std::to_string(r.target.index) + ",E" +
                              std::to_string(r.event.value) + ")";
      const Draws draws = sample_draws(m_, r.draws);
      std::string mask;
      std::string mismatch;
      for (int k = 0; k < kOtherPoints; ++k) {
        const auto p = sampler.next();
        EvalPoint ep{p.t, p.x, p.u, p.theta};
        const Vector out = r.r(ep, draws);
        for (std::size_t j = 0; j < m_.num_states; ++j) {
          const auto jj = static_cast<Eigen::Index>(j);
          if (!r.reset_mask[j] && out[jj] != p.x[jj])
            mask = "component " + std::to_string(j) + " changes but is not in reset_mask";
        }
        if (!mismatch.empty()) continue;
        const Matrix jx = r.dr_dx(ep, draws);
        for (Eigen::Index i = 0; i < out.size() && mismatch.empty(); ++i) {
          auto rx = [&](const Vector& x) { return r.r({p.t, x, p.u, p.theta}, draws)[i]; };
          mismatch = compare_rows(jx.row(i), central_gradient(rx, p.x));
          if (!mismatch.empty()) mismatch = "partial mismatch: " + mismatch;
        }
      }
      add(tag + " mask", mask);
      add(tag + " partials", mismatch);
    }
  }

  void check_costs() {
    PointSampler sampler(m_);
    for (const auto& c : m_.costs) {
      std::string mismatch;
      for (std::size_t q = 0; q < m_.num_modes && mismatch.empty(); ++q) {
        for (int k = 0; k < kOtherPoints && mismatch.empty(); ++k) {
          const auto p = sampler.next();
          const ModeId mode{q};
          EvalPoint ep{p.t, p.x, p.u, p.theta};
          auto lx = [&](const Vector& x) { return c.value(mode, {p.t, x, p.u, p.theta}); };
          auto lth = [&](const Vector& th) { return c.value(mode, {p.t, p.x, p.u, th}); };
          mismatch = compare_rows(c.d_dx(mode, ep), central_gradient(lx, p.x));
          if (mismatch.empty()) {
            const RowVector dth =
                c.d_dtheta ? c.d_dtheta(mode, ep) : RowVector::Zero(m_.num_params);
            mismatch = compare_rows(dth, central_gradient(lth, p.theta));
          }
          if (!mismatch.empty()) mismatch = "partial mismatch in mode " + std::to_string(q) + ", " + mismatch;
        }
      }
      add("cost '" + c.name + "' partials", mismatch);
    }
  }

  void check_initial() {
    const Vector theta = 0.5 * (m_.sampling.theta_lower + m_.sampling.theta_upper);
    const ModeId q0 = m_.initial.mode(m_.initial.x, theta);
    std::string err;
    if (q0.index >= m_.num_modes) {
      err = "initial mode out of range";
    } else if (!m_.transitions.immediate.empty()) {
      const Vector u = m_.inputs(0.0, theta);
      EvalPoint ep{0.0, m_.initial.x, u, theta};
      for (const auto& it : m_.transitions.immediate[q0.index])
        if (it.violated(ep)) err = "initial state violates '" + it.label + "'";
    }
    add("initial state invariant", err);
  }

  const AutomatonModel& m_;
  ValidationReport report_;
};

bool guard_theta_free(const AutomatonModel& model, const GuardFunction& g) {
  if (!g.d_dtheta) return true;
  PointSampler sampler(model);
  for (int k = 0; k < kOtherPoints; ++k) {
    const auto p = sampler.next();
    if (!g.d_dtheta({p.t, p.x, p.u, p.theta}).isZero(0.0)) return false;
  }
  return true;
}

}  // namespace

ValidationReport validate_model(const AutomatonModel& model) { return Validator(model).run(); }

std::string_view to_string(EventClass c) {
  switch (c) {
    case EventClass::exogenous: return "exogenous";
    case EventClass::endogenous: return "endogenous";
    case EventClass::induced: return "induced";
  }
  return "unknown";
}

EventClass classify_event(const AutomatonModel& model, EventId event) {
  const GuardFunction& g = model.guard(event);
  if (!g.watched_state) return EventClass::endogenous;
  const std::size_t state = *g.watched_state;
  if (model.timer_mask.at(state)) {
    const auto clock = model.timer_clock(state);
    const bool clock_free = clock && model.clocks.at(*clock).theta_free();
    return clock_free && guard_theta_free(model, g) ? EventClass::exogenous
                                                   : EventClass::endogenous;
  }
  for (const auto& r : model.resets)
    if (r.event != event && r.reset_mask.at(state)) return EventClass::induced;
  return EventClass::endogenous;
}

}  // namespace shipa
