#ifndef SHIPA_OPTIMIZER_HPP
#define SHIPA_OPTIMIZER_HPP

#include <string>
#include <utility>
#include <vector>

#include "shipa/ipa.hpp"

namespace shipa {

enum class Normalization { raw, per_T };

/// J = sum_i w_i L_i over registered cost integrands.
struct ObjectiveSpec {
  std::vector<std::pair<std::string, double>> weights;
  Normalization normalization = Normalization::raw;

  /// Throws ConfigError for unknown costs or when every weight is zero.
  void check(const AutomatonModel& model) const;
  [[nodiscard]] double value(const GradientReport& r) const;
  [[nodiscard]] RowVector gradient(const GradientReport& r) const;
};

struct StepRule {
  enum class Kind { constant, harmonic };
  Kind kind = Kind::harmonic;
  double c = 0.1;

  /// Step size at iteration k >= 1: c, or c / k.
  [[nodiscard]] double at(std::size_t k) const;
};

struct OptimizerSettings {
  std::size_t iterations = 200;
  std::size_t replications = 10;
  StepRule step;
  Box bounds;
  /// Stop early once the batch gradient norm falls below this; 0 disables.
  double grad_tol = 0.0;
};

struct OptimizerIteration {
  std::size_t iter = 0;
  Vector theta;
  double J = 0.0;
  RowVector grad;
  double step = 0.0;
};

struct OptimizerTrace {
  enum class StopReason { budget, gradient_tolerance };
  std::vector<OptimizerIteration> iterations;
  Vector final_theta;
  bool converged = false;
  StopReason stop_reason = StopReason::budget;
};

/// clip(theta - step * gradient, bounds), coordinatewise.
Vector sgd_step(const Vector& theta, const RowVector& gradient, double step, const Box& bounds);

struct ObjectiveEstimate {
  double J = 0.0;
  RowVector grad;
};

/// Batch mean of J and its IPA gradient over replications
/// first_replication, ..., first_replication + replications - 1.
ObjectiveEstimate estimate_objective(const AutomatonModel& model, const ObjectiveSpec& objective,
                                     const Vector& theta, double horizon,
                                     const IntegratorConfig& config, std::uint64_t seed,
                                     std::uint64_t first_replication, std::size_t replications);

/// Projected stochastic gradient descent from theta0. Iteration k uses fresh
/// replications (k - 1) R, ..., k R - 1 of `seed`.
OptimizerTrace optimize(const AutomatonModel& model, const ObjectiveSpec& objective,
                        const Vector& theta0, double horizon, const IntegratorConfig& config,
                        const OptimizerSettings& settings, std::uint64_t seed);

}  // namespace shipa

#endif  // SHIPA_OPTIMIZER_HPP
