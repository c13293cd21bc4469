#ifndef SHIPA_IPA_HPP
#define SHIPA_IPA_HPP

#include <map>
#include <string>
#include <vector>

#include "shipa/simulator.hpp"

namespace shipa {

/// dx/dtheta (N_x x N_theta) at time t.
struct SensitivityState {
  Matrix x_prime;
  double t = 0.0;
};

/// Active row of the event-time derivative matrix at transition k.
struct TauPrimeRow {
  std::size_t k = 0;
  double tau = 0.0;
  EventId event;
  RowVector values;
};

/// Kept/reset selectors plus the partials of the reset map at one transition.
struct ResetMatrices {
  Matrix C;
  Matrix C_bar;
  Matrix dr_dx;
  Matrix dr_du;
  Matrix dr_dtheta;
};

/// C = I, C_bar = 0 when `reset` is null.
ResetMatrices reset_matrices(const AutomatonModel& model, const ResetMap* reset,
                             const EvalPoint& p, const Draws& draws);

/// Time derivative of a guard along the field of `mode`; inputs are held
/// piecewise constant so the du/dt term vanishes.
double guard_rate(const AutomatonModel& model, const GuardFunction& guard, ModeId mode,
                  const EvalPoint& p);

/// -(1/gdot) [dg/dx x' + dg/du u' + dg/dtheta] at tau^-.
TauPrimeRow event_time_derivative(const AutomatonModel& model, const GuardFunction& guard,
                                  ModeId mode, const EvalPoint& p, const Matrix& x_prime_minus,
                                  const Matrix& u_prime, double gdot_floor);

/// x'(tau^+) from x'(tau^-). Kept components pick up (f^- - f^+) tau';
/// reset components take the total theta-derivative of r along the path,
/// minus f^+ tau'.
Matrix state_derivative_jump(const Matrix& x_prime_minus, const Vector& f_minus,
                             const Vector& f_plus, const RowVector& tau_prime,
                             const ResetMatrices& resets, const Matrix& u_prime);

/// One trapezoid step of x'' = df/dx x' + df/du u' + df/dtheta from
/// (t0, x0) to (t1, x1) inside `mode`.
Matrix state_derivative_flow(const AutomatonModel& model, ModeId mode, double t0,
                             const Vector& x0, double t1, const Vector& x1, const Vector& theta,
                             const Matrix& x_prime0);

struct GradientReport {
  Vector theta;
  double horizon = 0.0;
  std::vector<std::string> costs;
  std::vector<double> L;          // raw integrals, index = cost
  std::vector<RowVector> dL;      // raw gradients, index = cost
  std::vector<TauPrimeRow> per_event;  // one row per chain
  std::size_t num_events = 0;
  std::map<std::string, double> counters;
  Matrix final_x_prime;
  /// x' at each trajectory sample; filled only when requested.
  std::vector<Matrix> x_prime_trace;

  [[nodiscard]] double L_normalized(std::size_t cost) const { return L[cost] / horizon; }
  [[nodiscard]] RowVector dL_normalized(std::size_t cost) const { return dL[cost] / horizon; }
  [[nodiscard]] double value(std::string_view cost) const;
  [[nodiscard]] const RowVector& gradient(std::string_view cost) const;
};

/// sum_k [l(q_{k-1}, tau_k^-) - l(q_k, tau_k^+)] tau_k' plus the integral of
/// dl/dtheta, for every registered cost. `x_prime` holds x' at each sample of
/// the trajectory and `tau_prime` the row shared by every record of a chain.
void cost_gradient(const AutomatonModel& model, const SamplePath& path,
                   const std::vector<Matrix>& x_prime, const std::vector<RowVector>& tau_prime,
                   GradientReport& report);

/// Single forward pass over `path`, computing tau' at every transition,
/// the jump and flow updates of x', and the cost gradients.
GradientReport run_ipa(const AutomatonModel& model, const SamplePath& path,
                       const IntegratorConfig& config, bool keep_trace = false);

}  // namespace shipa

#endif  // SHIPA_IPA_HPP
