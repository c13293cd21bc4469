#include "shipa/optimizer.hpp"

#include <cmath>

namespace shipa {

void ObjectiveSpec::check(const AutomatonModel& model) const {
  bool nonzero = false;
  for (const auto& [cost, w] : weights) {
    model.cost_index(cost);
    if (!std::isfinite(w)) throw ConfigError("objective weight for '" + cost + "' is not finite");
    nonzero = nonzero || w != 0.0;
  }
  if (!nonzero) throw ConfigError("objective needs at least one nonzero weight");
}

double ObjectiveSpec::value(const GradientReport& r) const {
  double j = 0.0;
  for (const auto& [cost, w] : weights) j += w * r.value(cost);
  return normalization == Normalization::per_T ? j / r.horizon : j;
}

RowVector ObjectiveSpec::gradient(const GradientReport& r) const {
  RowVector g = RowVector::Zero(r.theta.size());
  for (const auto& [cost, w] : weights) g += w * r.gradient(cost);
  return normalization == Normalization::per_T ? RowVector(g / r.horizon) : g;
}

double StepRule::at(std::size_t k) const {
  return kind == Kind::constant ? c : c / static_cast<double>(k);
}

Vector sgd_step(const Vector& theta, const RowVector& gradient, double step, const Box& bounds) {
  if (!gradient.allFinite()) throw NumericalError("non-finite gradient in optimizer step");
  if (gradient.size() != theta.size()) throw ModelError("gradient and theta differ in length");
  return bounds.project(theta - step * gradient.transpose());
}

ObjectiveEstimate estimate_objective(const AutomatonModel& model, const ObjectiveSpec& objective,
                                     const Vector& theta, double horizon,
                                     const IntegratorConfig& config, std::uint64_t seed,
                                     std::uint64_t first_replication, std::size_t replications) {
  if (replications == 0) throw ConfigError("need at least one replication");
  ObjectiveEstimate out{0.0, RowVector::Zero(theta.size())};
  for (std::size_t r = 0; r < replications; ++r) {
    const auto path = simulate(model, theta, horizon, config, seed, first_replication + r);
    const auto rep = run_ipa(model, path, config);
    out.J += objective.value(rep);
    out.grad += objective.gradient(rep);
  }
  out.J /= static_cast<double>(replications);
  out.grad /= static_cast<double>(replications);
  return out;
}

OptimizerTrace optimize(const AutomatonModel& model, const ObjectiveSpec& objective,
                        const Vector& theta0, double horizon, const IntegratorConfig& config,
                        const OptimizerSettings& settings, std::uint64_t seed) {
  if (settings.iterations == 0) throw ConfigError("optimizer needs at least one iteration");
  if (settings.replications == 0) throw ConfigError("optimizer needs at least one replication");
  if (!(settings.step.c >= 0.0) || !std::isfinite(settings.step.c))
    throw ConfigError("step constant must be finite and non-negative");
  if (settings.bounds.lower.size() != theta0.size() || settings.bounds.upper.size() != theta0.size() ||
      (settings.bounds.lower.array() > settings.bounds.upper.array()).any())
    throw ConfigError("optimizer bounds must match theta and satisfy lower <= upper");

  OptimizerTrace trace;
  Vector theta = settings.bounds.project(theta0);
  for (std::size_t k = 1; k <= settings.iterations; ++k) {
    const auto first = static_cast<std::uint64_t>((k - 1) * settings.replications);
    const auto est = estimate_objective(model, objective, theta, horizon, config, seed, first,
                                        settings.replications);
    const double step = settings.step.at(k);
    trace.iterations.push_back({k, theta, est.J, est.grad, step});
    if (settings.grad_tol > 0.0 && est.grad.norm() < settings.grad_tol) {
      trace.converged = true;
      trace.stop_reason = OptimizerTrace::StopReason::gradient_tolerance;
      break;
    }
    theta = sgd_step(theta, est.grad, step, settings.bounds);
  }
  trace.final_theta = theta;
  return trace;
}

}  // namespace shipa
