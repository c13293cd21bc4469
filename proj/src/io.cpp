#include "shipa/io.hpp"

#include <charconv>

namespace shipa {

namespace {

nlohmann::json number(double v) { return v == 0.0 ? 0.0 : v; }

nlohmann::json row(const RowVector& r) {
  auto a = nlohmann::json::array();
  for (Eigen::Index j = 0; j < r.size(); ++j) a.push_back(number(r[j]));
  return a;
}

nlohmann::json column(const Vector& v) { return row(v.transpose()); }

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

void write_path_csv(std::ostream& os, const SamplePath& path, std::size_t stride) {
  const auto& tr = path.trajectory;
  os << "t,q";
  for (std::size_t j = 0; j < tr.num_states(); ++j) os << ",x_" << j;
  os << ",event_id\n";
  std::size_t grid = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto kind = tr.kind(i);
    if (kind == SampleKind::grid) {
      const bool last = i + 1 == tr.size();
      if (grid++ % stride != 0 && !last) continue;
    }
    os << format_number(tr.t(i)) << ',' << tr.mode(i).index;
    const auto x = tr.x(i);
    for (Eigen::Index j = 0; j < x.size(); ++j) os << ',' << format_number(x[j]);
    os << ',';
    if (kind != SampleKind::grid) os << path.records[tr.record(i)].event.value;
    os << '\n';
  }
}

nlohmann::json report_to_json(const AutomatonModel& model, const SamplePath& path,
                              const GradientReport& report) {
  using nlohmann::json;
  json doc;
  doc["model"] = model.name;
  doc["theta"] = column(report.theta);
  doc["horizon"] = number(report.horizon);
  doc["seed"] = path.seed;
  doc["replication"] = path.replication;
  json L = json::object(), dL = json::object(), Ln = json::object(), dLn = json::object();
  for (std::size_t c = 0; c < report.costs.size(); ++c) {
    L[report.costs[c]] = number(report.L[c]);
    dL[report.costs[c]] = row(report.dL[c]);
    Ln[report.costs[c]] = number(report.L_normalized(c));
    dLn[report.costs[c]] = row(report.dL_normalized(c));
  }
  doc["L_raw"] = L;
  doc["dL_dtheta_raw"] = dL;
  doc["L_normalized"] = Ln;
  doc["dL_dtheta_normalized"] = dLn;
  doc["num_events"] = report.num_events;

  json counters = json::object();
  for (const auto& [k, v] : report.counters) counters[k] = number(v);
  if (model.name == "single-node-sfm") {
    const auto s = analyze_nep_fp(model, path);
    counters["N"] = s.N();
    counters["N_F"] = s.N_F();
    json m = json::array();
    json neps = json::array();
    for (std::size_t n = 0; n < s.N(); ++n) {
      m.push_back(s.M(n));
      json fps = json::array();
      for (const auto& [nu, sigma] : s.neps[n].fps) fps.push_back({number(nu), number(sigma)});
      neps.push_back({{"xi", number(s.neps[n].xi)},
                      {"eta", number(s.neps[n].eta)},
                      {"open_at_horizon", s.neps[n].open_at_horizon},
                      {"fps", fps}});
    }
    counters["M"] = m;
    counters["neps"] = neps;
    doc["closed_form"] = {{"workload", number(closed_form_workload_grad(s))},
                          {"loss", number(closed_form_loss_grad(s))}};
  }
  doc["counters"] = counters;

  json events = json::array();
  for (const auto& r : report.per_event)
    events.push_back({{"k", r.k},
                      {"tau", number(r.tau)},
                      {"event", r.event.value},
                      {"tau_prime", row(r.values)}});
  doc["per_event_tau_prime"] = events;
  return doc;
}

void write_trace_csv(std::ostream& os, const OptimizerTrace& trace) {
  const auto np = trace.final_theta.size();
  os << "iter";
  for (Eigen::Index j = 0; j < np; ++j) os << ",theta_" << j;
  os << ",J_hat";
  for (Eigen::Index j = 0; j < np; ++j) os << ",grad_" << j;
  os << ",step\n";
  for (const auto& it : trace.iterations) {
    os << it.iter;
    for (Eigen::Index j = 0; j < np; ++j) os << ',' << format_number(it.theta[j]);
    os << ',' << format_number(it.J);
    for (Eigen::Index j = 0; j < np; ++j) os << ',' << format_number(it.grad[j]);
    os << ',' << format_number(it.step) << '\n';
  }
}

}  // namespace shipa
