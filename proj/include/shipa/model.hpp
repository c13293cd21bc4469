#ifndef SHIPA_MODEL_HPP
#define SHIPA_MODEL_HPP

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shipa/core.hpp"
#include "shipa/stochastic.hpp"

namespace shipa {

/// Arguments shared by every model evaluator: (t, x, u, theta).
struct EvalPoint {
  double t;
  const Vector& x;
  const Vector& u;
  const Vector& theta;
};

/// Closed box [lower, upper] in parameter space.
struct Box {
  Vector lower;
  Vector upper;

  [[nodiscard]] bool contains(const Vector& v) const;
  [[nodiscard]] Vector project(const Vector& v) const;
};

struct ParameterVector {
  Vector values;
  std::optional<Box> bounds;

  /// Throws ConfigError when empty or outside its bounds.
  void check() const;
};

/// Random quantity consumed by a reset, with its theta-derivative.
struct Draw {
  double value = 0.0;
  RowVector d_dtheta;
};
using Draws = std::vector<Draw>;

/// Which input a reset consumes: the next lifetime of model.clocks[source]
/// or the next magnitude of model.jumps[source].
struct DrawRequest {
  enum class Kind { lifetime, jump };
  Kind kind = Kind::lifetime;
  std::size_t source = 0;
};

/// Scalar guard g_i(t, x, u, theta); event E_i fires when it reaches zero.
struct GuardFunction {
  EventId event;
  std::function<double(const EvalPoint&)> value;
  std::function<RowVector(const EvalPoint&)> d_dx;
  std::function<RowVector(const EvalPoint&)> d_du;      // empty: zero
  std::function<RowVector(const EvalPoint&)> d_dtheta;  // empty: zero
  std::function<double(const EvalPoint&)> d_dt;         // empty: zero
  /// Set when the guard is exactly x[watched_state]; used for timer
  /// scheduling and event classification.
  std::optional<std::size_t> watched_state;
};

struct VectorField {
  ModeId mode;
  std::function<Vector(const EvalPoint&)> f;
  std::function<Matrix(const EvalPoint&)> df_dx;
  std::function<Matrix(const EvalPoint&)> df_du;      // empty: zero
  std::function<Matrix(const EvalPoint&)> df_dtheta;  // empty: zero
};

struct ResetMap {
  ModeId source;
  ModeId target;
  EventId event;
  std::vector<DrawRequest> draws;
  std::function<Vector(const EvalPoint&, const Draws&)> r;
  std::function<Matrix(const EvalPoint&, const Draws&)> dr_dx;
  std::function<Matrix(const EvalPoint&, const Draws&)> dr_du;      // empty: zero
  std::function<Matrix(const EvalPoint&, const Draws&)> dr_dtheta;  // empty: zero
  /// Component j is overwritten iff reset_mask[j].
  std::vector<bool> reset_mask;
};

struct Transition {
  ModeId source;
  EventId event;
  ModeId target;
};

/// Fires at the same instant as the transition that entered the mode,
/// whenever `violated` holds for the post-transition state.
struct ImmediateTransition {
  std::function<bool(const EvalPoint&)> violated;
  ModeId target;
  std::string label;
};

struct TransitionFunction {
  std::vector<Transition> table;
  /// Per mode, checked in order after every transition.
  std::vector<std::vector<ImmediateTransition>> immediate;

  [[nodiscard]] std::optional<ModeId> target(ModeId source, EventId event) const;
};

/// Running cost l(q, t, x, u, theta) with its partials.
struct CostIntegrand {
  std::string name;
  std::function<double(ModeId, const EvalPoint&)> value;
  std::function<RowVector(ModeId, const EvalPoint&)> d_dx;
  std::function<RowVector(ModeId, const EvalPoint&)> d_du;      // empty: zero
  std::function<RowVector(ModeId, const EvalPoint&)> d_dtheta;  // empty: zero
};

/// x[state] is a timer fed by model.clocks[clock]; it is initialized with the
/// clock's first lifetime.
struct TimerBinding {
  std::size_t state = 0;
  std::size_t clock = 0;
};

/// Exogenous piecewise-constant inputs u(t). Empty means N_u = 0.
struct InputSignal {
  std::function<Vector(double t, const Vector& theta)> value;
  std::function<Matrix(double t, const Vector& theta)> d_dtheta;
};

struct InitialCondition {
  Vector x;
  std::function<ModeId(const Vector& x, const Vector& theta)> mode;
};

/// Box used to draw admissible points for partial-derivative checks.
struct SamplingRegion {
  Vector x_lower;
  Vector x_upper;
  Vector theta_lower;
  Vector theta_upper;
  double t_lower = 0.0;
  double t_upper = 1.0;
};

/// Parameterized stochastic hybrid automaton. Treated as immutable once
/// built; every evaluator must be a pure function of its arguments.
struct AutomatonModel {
  std::string name;
  std::size_t num_modes = 0;
  std::size_t num_states = 0;
  std::size_t num_inputs = 0;
  std::size_t num_params = 0;
  std::size_t num_events = 0;

  std::vector<std::string> state_names;
  std::vector<bool> timer_mask;
  std::vector<VectorField> fields;    // index = mode
  std::vector<GuardFunction> guards;  // index = event slot
  std::vector<ResetMap> resets;
  TransitionFunction transitions;
  InitialCondition initial;
  std::vector<ClockStructure> clocks;
  std::vector<JumpProcess> jumps;
  std::vector<TimerBinding> timers;
  InputSignal input;
  std::vector<CostIntegrand> costs;
  SamplingRegion sampling;

  [[nodiscard]] const GuardFunction& guard(EventId event) const;
  [[nodiscard]] const VectorField& field(ModeId mode) const { return fields.at(mode.index); }
  [[nodiscard]] const ResetMap* reset(ModeId source, EventId event) const;
  [[nodiscard]] std::size_t cost_index(std::string_view cost) const;
  [[nodiscard]] std::optional<std::size_t> timer_clock(std::size_t state) const;

  [[nodiscard]] Vector inputs(double t, const Vector& theta) const;
  [[nodiscard]] Matrix input_sensitivity(double t, const Vector& theta) const;
};

struct ValidationReport {
  struct Check {
    std::string name;
    bool passed = true;
    std::string detail;
  };
  std::vector<Check> checks;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] std::vector<std::string> failures() const;
};

/// Static checks: guard non-nullity, reset-mask consistency, timer dynamics,
/// analytic partials against central differences, transition-table
/// completeness, and the initial state against its mode invariants.
ValidationReport validate_model(const AutomatonModel& model);

enum class EventClass { exogenous, endogenous, induced };

std::string_view to_string(EventClass c);

EventClass classify_event(const AutomatonModel& model, EventId event);

/// Convenience partial helpers: zero when the evaluator is empty.
RowVector guard_d_du(const AutomatonModel& model, const GuardFunction& g, const EvalPoint& p);
RowVector guard_d_dtheta(const AutomatonModel& model, const GuardFunction& g, const EvalPoint& p);
double guard_d_dt(const GuardFunction& g, const EvalPoint& p);
Matrix field_df_du(const AutomatonModel& model, const VectorField& f, const EvalPoint& p);
Matrix field_df_dtheta(const AutomatonModel& model, const VectorField& f, const EvalPoint& p);

}  // namespace shipa

#endif  // SHIPA_MODEL_HPP
