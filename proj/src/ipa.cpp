#include "shipa/ipa.hpp"

#include <cmath>
#include <sstream>

namespace shipa {

namespace {

Eigen::Index dim(std::size_t n) { return static_cast<Eigen::Index>(n); }

void require_finite(const Matrix& m, const char* what, double t) {
  if (!m.allFinite()) {
    std::ostringstream os;
    os << "non-finite " << what << " at t=" << t;
    throw NumericalError(os.str());
  }
}

RowVector cost_d_du(const AutomatonModel& m, const CostIntegrand& c, ModeId q, const EvalPoint& p) {
  return c.d_du ? c.d_du(q, p) : RowVector::Zero(dim(m.num_inputs));
}

RowVector cost_d_dtheta(const AutomatonModel& m, const CostIntegrand& c, ModeId q,
                        const EvalPoint& p) {
  return c.d_dtheta ? c.d_dtheta(q, p) : RowVector::Zero(dim(m.num_params));
}

}  // namespace

double GradientReport::value(std::string_view cost) const {
  for (std::size_t i = 0; i < costs.size(); ++i)
    if (costs[i] == cost) return L[i];
  throw ConfigError("unknown cost '" + std::string(cost) + "'");
}

const RowVector& GradientReport::gradient(std::string_view cost) const {
  for (std::size_t i = 0; i < costs.size(); ++i)
    if (costs[i] == cost) return dL[i];
  throw ConfigError("unknown cost '" + std::string(cost) + "'");
}

ResetMatrices reset_matrices(const AutomatonModel& model, const ResetMap* reset,
                             const EvalPoint& p, const Draws& draws) {
  const auto nx = dim(model.num_states);
  ResetMatrices out;
  out.C = Matrix::Identity(nx, nx);
  out.C_bar = Matrix::Zero(nx, nx);
  if (!reset) {
    out.dr_dx = Matrix::Zero(nx, nx);
    out.dr_du = Matrix::Zero(nx, dim(model.num_inputs));
    out.dr_dtheta = Matrix::Zero(nx, dim(model.num_params));
    return out;
  }
  for (Eigen::Index j = 0; j < nx; ++j) {
    if (reset->reset_mask[static_cast<std::size_t>(j)]) {
      out.C(j, j) = 0.0;
      out.C_bar(j, j) = 1.0;
    }
  }
  out.dr_dx = reset->dr_dx(p, draws);
  out.dr_du = reset->dr_du ? reset->dr_du(p, draws) : Matrix::Zero(nx, dim(model.num_inputs));
  out.dr_dtheta =
      reset->dr_dtheta ? reset->dr_dtheta(p, draws) : Matrix::Zero(nx, dim(model.num_params));
  return out;
}

double guard_rate(const AutomatonModel& model, const GuardFunction& guard, ModeId mode,
                  const EvalPoint& p) {
  return guard_d_dt(guard, p) + guard.d_dx(p).dot(model.field(mode).f(p));
}

TauPrimeRow event_time_derivative(const AutomatonModel& model, const GuardFunction& guard,
                                  ModeId mode, const EvalPoint& p, const Matrix& x_prime_minus,
                                  const Matrix& u_prime, double gdot_floor) {
  const double gdot = guard_rate(model, guard, mode, p);
  if (!(std::abs(gdot) >= gdot_floor)) {
    std::ostringstream os;
    os.precision(12);
    os << "dg/dt of E" << guard.event.value << " is " << gdot << " at t=" << p.t;
    throw AssumptionViolation(4, os.str());
  }
  RowVector num = guard.d_dx(p) * x_prime_minus + guard_d_dtheta(model, guard, p);
  if (model.num_inputs > 0) num += guard_d_du(model, guard, p) * u_prime;
  TauPrimeRow row{0, p.t, guard.event, -num / gdot};
  require_finite(row.values, "event-time derivative", p.t);
  return row;
}

Matrix state_derivative_jump(const Matrix& x_prime_minus, const Vector& f_minus,
                             const Vector& f_plus, const RowVector& tau_prime,
                             const ResetMatrices& resets, const Matrix& u_prime) {
  if (x_prime_minus.rows() != f_minus.size() || f_minus.size() != f_plus.size() ||
      x_prime_minus.cols() != tau_prime.size() || resets.C.rows() != x_prime_minus.rows())
    throw ModelError("dimension mismatch in jump update");
  const Matrix kept = x_prime_minus + (f_minus - f_plus) * tau_prime;
  if (resets.C_bar.isZero(0.0)) return kept;
  Matrix reset_part = resets.dr_dx * (x_prime_minus + f_minus * tau_prime) + resets.dr_dtheta -
                      f_plus * tau_prime;
  if (resets.dr_du.cols() > 0) reset_part += resets.dr_du * u_prime;
  return resets.C * kept + resets.C_bar * reset_part;
}

Matrix state_derivative_flow(const AutomatonModel& model, ModeId mode, double t0,
                             const Vector& x0, double t1, const Vector& x1, const Vector& theta,
                             const Matrix& x_prime0) {
  const double h = t1 - t0;
  if (h == 0.0) return x_prime0;
  const auto& vf = model.field(mode);
  const Vector u0 = model.inputs(t0, theta);
  const Vector u1 = model.inputs(t1, theta);
  const EvalPoint p0{t0, x0, u0, theta};
  const EvalPoint p1{t1, x1, u1, theta};

  auto forcing = [&](const EvalPoint& p, double t) {
    Matrix b = field_df_dtheta(model, vf, p);
    if (model.num_inputs > 0) b += field_df_du(model, vf, p) * model.input_sensitivity(t, theta);
    return b;
  };
  const Matrix a0 = vf.df_dx(p0);
  const Matrix a1 = vf.df_dx(p1);
  Matrix rhs = x_prime0 + 0.5 * h * (a0 * x_prime0 + forcing(p0, t0) + forcing(p1, t1));
  if (!a1.isZero(0.0)) {
    const Matrix lhs = Matrix::Identity(a1.rows(), a1.cols()) - 0.5 * h * a1;
    rhs = lhs.partialPivLu().solve(rhs);
  }
  require_finite(rhs, "state sensitivity", t1);
  return rhs;
}

void cost_gradient(const AutomatonModel& model, const SamplePath& path,
                   const std::vector<Matrix>& x_prime, const std::vector<RowVector>& tau_prime,
                   GradientReport& report) {
  const auto& traj = path.trajectory;
  if (x_prime.size() != traj.size()) throw ModelError("sensitivity count differs from path");
  if (tau_prime.size() != path.records.size())
    throw ModelError("missing event-time derivative for some transition");

  const auto nc = model.costs.size();
  const auto np = dim(model.num_params);
  report.costs.clear();
  report.L.assign(nc, 0.0);
  report.dL.assign(nc, RowVector::Zero(np));
  for (const auto& c : model.costs) report.costs.push_back(c.name);

  const Vector& theta = path.theta;
  auto integrand = [&](const CostIntegrand& c, ModeId q, std::size_t i, double& l, RowVector& dl) {
    const double t = traj.t(i);
    const Vector x = traj.x(i);
    const Vector u = model.inputs(t, theta);
    const EvalPoint p{t, x, u, theta};
    l = c.value(q, p);
    dl = c.d_dx(q, p) * x_prime[i] + cost_d_dtheta(model, c, q, p);
    if (model.num_inputs > 0) dl += cost_d_du(model, c, q, p) * model.input_sensitivity(t, theta);
  };

  for (std::size_t ci = 0; ci < nc; ++ci) {
    const auto& c = model.costs[ci];
    double l0 = 0.0;
    double l1 = 0.0;
    RowVector d0(np);
    RowVector d1(np);
    for (std::size_t i = 1; i < traj.size(); ++i) {
      if (traj.kind(i) == SampleKind::after_event) continue;
      const ModeId q = traj.mode(i - 1);
      const double h = traj.t(i) - traj.t(i - 1);
      integrand(c, q, i - 1, l0, d0);
      integrand(c, q, i, l1, d1);
      report.L[ci] += 0.5 * h * (l0 + l1);
      report.dL[ci] += 0.5 * h * (d0 + d1);
    }
    for (std::size_t k = 0; k < path.records.size(); ++k) {
      const auto& r = path.records[k];
      if (tau_prime[k].isZero(0.0)) continue;
      const Vector u = model.inputs(r.tau, theta);
      const double before = c.value(r.from, {r.tau, r.x_minus, u, theta});
      const double after = c.value(r.to, {r.tau, r.x_plus, u, theta});
      report.dL[ci] += (before - after) * tau_prime[k];
    }
    if (!std::isfinite(report.L[ci]) || !report.dL[ci].allFinite())
      throw NumericalError("non-finite gradient for cost '" + c.name + "'");
  }
}

GradientReport run_ipa(const AutomatonModel& model, const SamplePath& path,
                       const IntegratorConfig& config, bool keep_trace) {
  const auto& traj = path.trajectory;
  const Vector& theta = path.theta;
  const auto nx = dim(model.num_states);
  const auto np = dim(model.num_params);

  GradientReport report;
  report.theta = theta;
  report.horizon = path.horizon;
  report.num_events = path.records.size();

  std::vector<Matrix> x_prime(traj.size());
  std::vector<RowVector> tau_prime(path.records.size());

  Matrix xp = Matrix::Zero(nx, np);
  for (const auto& it : path.initial_timers)
    xp.row(dim(it.state)) = it.lifetime.d_dtheta;
  x_prime[0] = xp;

  std::size_t chains = 0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (traj.kind(i) != SampleKind::after_event) {
      xp = state_derivative_flow(model, traj.mode(i - 1), traj.t(i - 1), traj.x(i - 1), traj.t(i),
                                 traj.x(i), theta, xp);
      x_prime[i] = xp;
      continue;
    }
    // Left limit is sample i-1; the chain spans records [first, last].
    const std::size_t first = traj.record(i - 1);
    const std::size_t last = traj.record(i);
    const auto& head = path.records[first];
    const Vector u = model.inputs(head.tau, theta);
    const Matrix u_prime = model.num_inputs > 0 ? model.input_sensitivity(head.tau, theta)
                                                : Matrix::Zero(0, np);
    TauPrimeRow row = event_time_derivative(model, model.guard(head.event), head.from,
                                            {head.tau, head.x_minus, u, theta}, xp, u_prime,
                                            config.gdot_floor);
    row.k = head.k;
    for (std::size_t k = first; k <= last; ++k) {
      const auto& rec = path.records[k];
      const EvalPoint pm{rec.tau, rec.x_minus, u, theta};
      const EvalPoint pp{rec.tau, rec.x_plus, u, theta};
      const ResetMap* reset = rec.reset ? model.reset(rec.from, rec.event) : nullptr;
      const ResetMatrices rm = reset_matrices(model, reset, pm, rec.draws);
      xp = state_derivative_jump(xp, model.field(rec.from).f(pm), model.field(rec.to).f(pp),
                                 row.values, rm, u_prime);
      tau_prime[k] = row.values;
    }
    require_finite(xp, "state sensitivity", head.tau);
    x_prime[i] = xp;
    report.per_event.push_back(std::move(row));
    ++chains;
  }

  cost_gradient(model, path, x_prime, tau_prime, report);
  report.final_x_prime = xp;
  report.counters["transitions"] = static_cast<double>(path.records.size());
  report.counters["chains"] = static_cast<double>(chains);
  if (keep_trace) report.x_prime_trace = std::move(x_prime);
  return report;
}

}  // namespace shipa
