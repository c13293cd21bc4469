#ifndef SHIPA_SIMULATOR_HPP
#define SHIPA_SIMULATOR_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "shipa/model.hpp"

namespace shipa {

struct IntegratorConfig {
  double step = 1e-3;        // base RK4 step
  double event_tol = 1e-9;   // |g| at a located crossing
  double time_tol = 1e-10;   // bisection bracket width
  std::size_t max_chain = 8; // transitions allowed at one instant
  double gdot_floor = 1e-8;  // minimum |dg/dt| at an event
  std::size_t output_stride = 1;

  /// Throws ConfigError unless every field is positive.
  void check() const;
  bool operator==(const IntegratorConfig&) const = default;
};

struct TransitionRecord {
  std::size_t k = 0;
  double tau = 0.0;
  EventId event;
  ModeId from;
  ModeId to;
  Vector x_minus;
  Vector x_plus;
  /// 0 for the transition fired by the guard, >= 1 for immediate follow-ups.
  std::size_t chain_position = 0;
  /// Inputs consumed by the reset; empty when no reset was applied.
  Draws draws;
  bool reset = false;
};

enum class SampleKind : std::uint8_t { grid, before_event, after_event };

/// Dense state trajectory: every integrator node plus left and right limits
/// at each transition instant. States are stored contiguously.
class Trajectory {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  explicit Trajectory(std::size_t num_states = 0) : num_states_(num_states) {}

  void push(double t, ModeId mode, const Vector& x, SampleKind kind, std::size_t record = npos);

  [[nodiscard]] std::size_t size() const { return times_.size(); }
  [[nodiscard]] std::size_t num_states() const { return num_states_; }
  [[nodiscard]] double t(std::size_t i) const { return times_[i]; }
  [[nodiscard]] ModeId mode(std::size_t i) const { return modes_[i]; }
  [[nodiscard]] SampleKind kind(std::size_t i) const { return kinds_[i]; }
  /// For before_event samples, index of the first record of the chain.
  [[nodiscard]] std::size_t record(std::size_t i) const { return records_[i]; }
  [[nodiscard]] Eigen::Map<const Vector> x(std::size_t i) const {
    return {states_.data() + i * num_states_, static_cast<Eigen::Index>(num_states_)};
  }

  bool operator==(const Trajectory&) const = default;

 private:
  std::size_t num_states_;
  std::vector<double> times_;
  std::vector<ModeId> modes_;
  std::vector<SampleKind> kinds_;
  std::vector<std::size_t> records_;
  std::vector<double> states_;
};

struct InitialTimer {
  std::size_t state = 0;
  Draw lifetime;
};

struct SamplePath {
  std::vector<TransitionRecord> records;
  Trajectory trajectory;
  double horizon = 0.0;
  Vector theta;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::vector<InitialTimer> initial_timers;
};

/// Per-replication random inputs: one stream per clock and per jump process,
/// with independent draw counters.
class InputStreams {
 public:
  InputStreams(const AutomatonModel& model, std::uint64_t seed, std::uint64_t replication);

  Draw next(const DrawRequest& request, const Vector& theta);

 private:
  const AutomatonModel* model_;
  std::vector<RandomStream> clock_streams_;
  std::vector<RandomStream> jump_streams_;
  std::vector<std::size_t> clock_count_;
  std::vector<std::size_t> jump_count_;
};

/// One classical RK4 step of the mode's vector field with inputs held at
/// their value at t. Timer components decrease by exactly h.
Vector integrate_step(const AutomatonModel& model, ModeId mode, double t, const Vector& x,
                      const Vector& theta, double h);

struct LocatedEvent {
  double tau = 0.0;
  EventId event;
  Vector x_minus;
};

/// Earliest guard crossing in (t_lo, t_hi] for a trajectory leaving (t_lo,
/// x_lo) in `mode`. No enabled guard may be zero at t_lo. Returns nullopt
/// when nothing crosses.
std::optional<LocatedEvent> locate_event(const AutomatonModel& model, ModeId mode, double t_lo,
                                         double t_hi, const Vector& x_lo, const Vector& theta,
                                         const IntegratorConfig& config);

struct TransitionOutcome {
  ModeId mode;
  Vector x_plus;
  std::vector<TransitionRecord> chain;
};

/// Fires `event` at tau: table lookup, reset (drawing fresh inputs), then
/// immediate follow-ups until the mode invariants hold.
TransitionOutcome apply_transition(const AutomatonModel& model, ModeId mode, double tau,
                                   const Vector& x_minus, EventId event, InputStreams& inputs,
                                   const Vector& theta, const IntegratorConfig& config,
                                   std::size_t first_k = 1);

SamplePath simulate(const AutomatonModel& model, const Vector& theta, double horizon,
                    const IntegratorConfig& config, std::uint64_t seed,
                    std::uint64_t replication = 0);

}  // namespace shipa

#endif  // SHIPA_SIMULATOR_HPP
