#include "shipa/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "shipa/io.hpp"

namespace shipa {

using nlohmann::json;

namespace {

/// Reads keys out of one JSON object and rejects whatever is left over.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return obj_.contains(key); }

  const json& raw(const std::string& key) {
    if (!obj_.contains(key)) throw ConfigError("missing key '" + key + "' in " + where_);
    used_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      raw(key);
    }
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(path(key) + " must be a number");
    return v.get<double>();
  }

  std::uint64_t count(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      raw(key);
    }
    const json& v = raw(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(path(key) + " must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      raw(key);
    }
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(path(key) + " must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key,
                              std::optional<std::vector<double>> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      raw(key);
    }
    const json& v = raw(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(path(key) + " must be a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(path(key) + " must contain only numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  [[nodiscard]] std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!used_.count(key)) throw ConfigError("unknown key '" + key + "' in " + where_);
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> used_;
};

Distribution parse_distribution(const json& j, const std::string& where) {
  Fields f(j, where);
  const auto kind = f.text("kind");
  Distribution d;
  if (kind == "exponential") {
    d = Exponential{f.number("rate")};
  } else if (kind == "uniform") {
    d = Uniform{f.number("lower"), f.number("upper")};
  } else if (kind == "deterministic") {
    d = Deterministic{f.number("value")};
  } else if (kind == "empirical") {
    d = Empirical{f.numbers("values")};
  } else {
    throw ConfigError(where + ".kind must be exponential, uniform, deterministic or empirical");
  }
  f.finish();
  return d;
}

json distribution_json(const Distribution& d) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Exponential>) return {{"kind", "exponential"}, {"rate", v.rate}};
        if constexpr (std::is_same_v<T, Uniform>)
          return {{"kind", "uniform"}, {"lower", v.lower}, {"upper", v.upper}};
        if constexpr (std::is_same_v<T, Deterministic>)
          return {{"kind", "deterministic"}, {"value", v.value}};
        if constexpr (std::is_same_v<T, Empirical>) return {{"kind", "empirical"}, {"values", v.values}};
      },
      d);
}

/// A clock entry may be null, meaning the timer never expires.
std::optional<Distribution> optional_clock(Fields& f, const std::string& key,
                                           std::optional<Distribution> fallback) {
  if (!f.has(key)) return fallback;
  const json& v = f.raw(key);
  if (v.is_null()) return std::nullopt;
  return parse_distribution(v, f.path(key));
}

json optional_json(const std::optional<Distribution>& d) {
  return d ? distribution_json(*d) : json(nullptr);
}

Distribution required_clock(Fields& f, const std::string& key, const Distribution& fallback) {
  return f.has(key) ? parse_distribution(f.raw(key), f.path(key)) : fallback;
}

Distribution jumps(Fields& f, const std::string& key, const Distribution& fallback) {
  return f.has(key) ? parse_distribution(f.raw(key), f.path(key)) : fallback;
}

SfmParams sfm_params(const json& j, const std::vector<double>& theta) {
  SfmParams p;
  Fields f(j, "model_params");
  p.theta = theta.empty() ? p.theta : theta[0];
  p.alpha0 = f.number("alpha0", p.alpha0);
  p.beta0 = f.number("beta0", p.beta0);
  p.x0 = f.number("x0", p.x0);
  p.alpha_clock = optional_clock(f, "alpha_clock", p.alpha_clock);
  p.beta_clock = optional_clock(f, "beta_clock", p.beta_clock);
  p.alpha_jumps = jumps(f, "alpha_jumps", p.alpha_jumps);
  p.beta_jumps = jumps(f, "beta_jumps", p.beta_jumps);
  p.alpha_drift = f.number("alpha_drift", p.alpha_drift);
  p.beta_drift = f.number("beta_drift", p.beta_drift);
  f.finish();
  return p;
}

json sfm_json(const SfmParams& p) {
  return {{"alpha0", p.alpha0},
          {"beta0", p.beta0},
          {"x0", p.x0},
          {"alpha_clock", optional_json(p.alpha_clock)},
          {"beta_clock", optional_json(p.beta_clock)},
          {"alpha_jumps", distribution_json(p.alpha_jumps)},
          {"beta_jumps", distribution_json(p.beta_jumps)},
          {"alpha_drift", p.alpha_drift},
          {"beta_drift", p.beta_drift}};
}

TwoModeBufferParams two_mode_params(const json& j) {
  TwoModeBufferParams p;
  Fields f(j, "model_params");
  p.kappa = f.number("kappa", p.kappa);
  p.beta = f.number("beta", p.beta);
  p.alpha0 = f.number("alpha0", p.alpha0);
  p.x0 = f.number("x0", p.x0);
  p.clock = optional_clock(f, "clock", p.clock);
  p.jumps = jumps(f, "jumps", p.jumps);
  f.finish();
  return p;
}

json two_mode_json(const TwoModeBufferParams& p) {
  return {{"kappa", p.kappa},   {"beta", p.beta},
          {"alpha0", p.alpha0}, {"x0", p.x0},
          {"clock", optional_json(p.clock)}, {"jumps", distribution_json(p.jumps)}};
}

ParametricRateParams parametric_params(const json& j) {
  ParametricRateParams p;
  Fields f(j, "model_params");
  p.c = f.number("c", p.c);
  p.beta = f.number("beta", p.beta);
  p.clock = required_clock(f, "clock", p.clock);
  f.finish();
  return p;
}

ResetTestParams reset_test_params(const json& j) {
  ResetTestParams p;
  Fields f(j, "model_params");
  p.gamma = f.number("gamma", p.gamma);
  p.beta = f.number("beta", p.beta);
  p.clock = required_clock(f, "clock", p.clock);
  f.finish();
  return p;
}

double zeno_period(const json& j) {
  Fields f(j, "model_params");
  const double period = f.number("period", 1.0);
  f.finish();
  return period;
}

void no_params(const json& j) { Fields(j, "model_params").finish(); }

/// Parses and re-serializes model parameters so defaults become explicit.
json canonical_params(const std::string& model, const json& j, const std::vector<double>& theta) {
  if (model == "single-node-sfm") return sfm_json(sfm_params(j, theta));
  if (model == "two-mode-buffer") return two_mode_json(two_mode_params(j));
  if (model == "parametric-rate-buffer") {
    const auto p = parametric_params(j);
    return {{"c", p.c}, {"beta", p.beta}, {"clock", distribution_json(p.clock)}};
  }
  if (model == "reset-test") {
    const auto p = reset_test_params(j);
    return {{"gamma", p.gamma}, {"beta", p.beta}, {"clock", distribution_json(p.clock)}};
  }
  if (model == "zeno-chain") return {{"period", zeno_period(j)}};
  if (model == "tangent-guard") {
    no_params(j);
    return json::object();
  }
  throw ConfigError("unknown model '" + model + "'");
}

const std::map<std::string, std::string>& default_outputs() {
  static const std::map<std::string, std::string> d{{"path_csv", "path.csv"},
                                                    {"report_json", "report.json"},
                                                    {"trace_csv", "trace.csv"},
                                                    {"validate_csv", "validate.csv"}};
  return d;
}

Normalization parse_normalization(const std::string& s) {
  if (s == "raw") return Normalization::raw;
  if (s == "per-T") return Normalization::per_T;
  throw ConfigError("normalization must be 'raw' or 'per-T'");
}

std::string to_string(Normalization n) { return n == Normalization::raw ? "raw" : "per-T"; }

ScenarioConfig parse_config_impl(const json& doc) {
  ScenarioConfig c;
  Fields f(doc, "config");
  c.model = f.text("model");
  c.theta = f.numbers("theta");
  c.horizon = f.number("horizon");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon))
    throw ConfigError("horizon must be positive and finite");
  c.seed = f.count("seed", 0);
  c.model_params = canonical_params(c.model, f.has("model_params") ? f.raw("model_params") : json::object(), c.theta);
  const AutomatonModel model = build_model(c.model, c.model_params, c.theta);
  if (c.theta.size() != model.num_params)
    throw ConfigError("theta must have " + std::to_string(model.num_params) + " entries for " +
                      c.model);
  for (double v : c.theta)
    if (!std::isfinite(v)) throw ConfigError("theta entries must be finite");

  if (f.has("integrator")) {
    Fields g(f.raw("integrator"), "integrator");
    auto& i = c.integrator;
    i.step = g.number("step", i.step);
    i.event_tol = g.number("event_tol", i.event_tol);
    i.time_tol = g.number("time_tol", i.time_tol);
    i.max_chain = g.count("max_chain", i.max_chain);
    i.gdot_floor = g.number("gdot_floor", i.gdot_floor);
    i.output_stride = g.count("output_stride", i.output_stride);
    g.finish();
  }
  c.integrator.check();

  c.outputs = default_outputs();
  if (f.has("outputs")) {
    Fields g(f.raw("outputs"), "outputs");
    for (auto& [key, value] : c.outputs) value = g.text(key, value);
    g.finish();
  }
  c.normalization = parse_normalization(f.text("normalization", "raw"));

  if (f.has("fd")) {
    Fields g(f.raw("fd"), "fd");
    auto& fd = c.fd;
    fd.h = g.number("h", fd.h);
    const auto mode = g.text("mode", "crn");
    if (mode == "crn") fd.mode = FdConfig::Mode::crn;
    else if (mode == "independent") fd.mode = FdConfig::Mode::independent;
    else throw ConfigError("fd.mode must be 'crn' or 'independent'");
    fd.replications = g.count("replications", fd.replications);
    fd.tolerance = g.number("tolerance", fd.tolerance);
    fd.min_unchanged = g.number("min_unchanged", fd.min_unchanged);
    g.finish();
  }
  if (!(c.fd.h > 0.0) || !std::isfinite(c.fd.h)) throw ConfigError("fd.h must be positive");
  if (c.fd.replications == 0) throw ConfigError("fd.replications must be at least 1");
  if (!(c.fd.tolerance > 0.0)) throw ConfigError("fd.tolerance must be positive");
  if (!(c.fd.min_unchanged >= 0.0 && c.fd.min_unchanged <= 1.0))
    throw ConfigError("fd.min_unchanged must lie in [0, 1]");

  auto& o = c.optimizer;
  o.weights = {{"workload", 1.0}};
  o.lower.assign(model.sampling.theta_lower.data(),
                 model.sampling.theta_lower.data() + model.sampling.theta_lower.size());
  o.upper.assign(model.sampling.theta_upper.data(),
                 model.sampling.theta_upper.data() + model.sampling.theta_upper.size());
  if (f.has("optimizer")) {
    Fields g(f.raw("optimizer"), "optimizer");
    if (g.has("weights")) {
      Fields w(g.raw("weights"), "optimizer.weights");
      o.weights.clear();
      for (const auto& [key, value] : g.raw("weights").items()) {
        w.number(key);
        o.weights.emplace_back(key, value.get<double>());
      }
      w.finish();
    }
    o.iterations = g.count("iterations", o.iterations);
    o.replications = g.count("replications", o.replications);
    if (g.has("step_rule")) {
      Fields s(g.raw("step_rule"), "optimizer.step_rule");
      const auto kind = s.text("kind", "harmonic");
      if (kind == "constant") o.step_kind = StepRule::Kind::constant;
      else if (kind == "harmonic") o.step_kind = StepRule::Kind::harmonic;
      else throw ConfigError("optimizer.step_rule.kind must be 'constant' or 'harmonic'");
      o.step_c = s.number("c", o.step_c);
      s.finish();
    }
    if (g.has("bounds")) {
      Fields b(g.raw("bounds"), "optimizer.bounds");
      o.lower = b.numbers("lower");
      o.upper = b.numbers("upper");
      b.finish();
    }
    o.grad_tol = g.number("grad_tol", o.grad_tol);
    g.finish();
  }
  if (o.iterations == 0 || o.replications == 0)
    throw ConfigError("optimizer iterations and replications must be at least 1");
  if (!(o.step_c >= 0.0) || !std::isfinite(o.step_c))
    throw ConfigError("optimizer.step_rule.c must be non-negative");
  if (o.lower.size() != c.theta.size() || o.upper.size() != c.theta.size())
    throw ConfigError("optimizer bounds must have one entry per theta coordinate");
  for (std::size_t j = 0; j < o.lower.size(); ++j)
    if (!(o.lower[j] <= o.upper[j])) throw ConfigError("optimizer bounds need lower <= upper");
  ObjectiveSpec{o.weights, c.normalization}.check(model);
  f.finish();
  return c;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string vec_text(const Eigen::Ref<const RowVector>& v) {
  std::string s = "[";
  for (Eigen::Index j = 0; j < v.size(); ++j) s += (j ? ", " : "") + format_number(v[j]);
  return s + "]";
}

std::filesystem::path output_path(const ScenarioConfig& c, const std::string& out_dir,
                                  const std::string& key) {
  std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
  return dir / c.outputs.at(key);
}

template <class Writer>
void write_file(const std::filesystem::path& p, Writer&& writer) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + p.string() + " for writing");
  writer(os);
  if (!os) throw ConfigError("failed writing " + p.string());
}

using Sequence = std::vector<std::tuple<int, std::size_t, std::size_t>>;

Sequence sequence(const SamplePath& p) {
  Sequence s;
  for (const auto& r : p.records) s.emplace_back(r.event.value, r.from.index, r.to.index);
  return s;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"single-node-sfm", "two-mode-buffer", "parametric-rate-buffer",
          "reset-test",      "tangent-guard",   "zeno-chain"};
}

AutomatonModel build_model(const std::string& name, const json& params,
                           const std::vector<double>& theta) {
  if (name == "single-node-sfm") return build_single_node_sfm(sfm_params(params, theta));
  if (name == "two-mode-buffer") return build_two_mode_buffer(two_mode_params(params));
  if (name == "parametric-rate-buffer")
    return build_parametric_rate_buffer(parametric_params(params));
  if (name == "reset-test") return build_reset_test(reset_test_params(params));
  if (name == "tangent-guard") {
    no_params(params);
    return build_tangent_guard();
  }
  if (name == "zeno-chain") return build_zeno_chain(zeno_period(params));
  throw ConfigError("unknown model '" + name + "'");
}

ScenarioConfig parse_config(const json& doc) {
  try {
    return parse_config_impl(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

json to_json(const ScenarioConfig& c) {
  json weights = json::object();
  for (const auto& [k, w] : c.optimizer.weights) weights[k] = w;
  const auto& i = c.integrator;
  return {
      {"model", c.model},
      {"model_params", c.model_params},
      {"theta", c.theta},
      {"horizon", c.horizon},
      {"seed", c.seed},
      {"integrator",
       {{"step", i.step},
        {"event_tol", i.event_tol},
        {"time_tol", i.time_tol},
        {"max_chain", i.max_chain},
        {"gdot_floor", i.gdot_floor},
        {"output_stride", i.output_stride}}},
      {"outputs", c.outputs},
      {"normalization", to_string(c.normalization)},
      {"fd",
       {{"h", c.fd.h},
        {"mode", c.fd.mode == FdConfig::Mode::crn ? "crn" : "independent"},
        {"replications", c.fd.replications},
        {"tolerance", c.fd.tolerance},
        {"min_unchanged", c.fd.min_unchanged}}},
      {"optimizer",
       {{"weights", weights},
        {"iterations", c.optimizer.iterations},
        {"replications", c.optimizer.replications},
        {"step_rule",
         {{"kind", c.optimizer.step_kind == StepRule::Kind::constant ? "constant" : "harmonic"},
          {"c", c.optimizer.step_c}}},
        {"bounds", {{"lower", c.optimizer.lower}, {"upper", c.optimizer.upper}}},
        {"grad_tol", c.optimizer.grad_tol}}},
  };
}

int cmd_simulate(const ScenarioConfig& c, const std::string& out_dir, std::ostream& out) {
  const auto model = build_model(c.model, c.model_params, c.theta);
  const auto path = simulate(model, to_vector(c.theta), c.horizon, c.integrator, c.seed);
  const auto file = output_path(c, out_dir, "path_csv");
  write_file(file, [&](std::ostream& os) { write_path_csv(os, path, c.integrator.output_stride); });
  const auto& tr = path.trajectory;
  const auto last = tr.size() - 1;
  out << "transitions: " << path.records.size() << " on [0, " << format_number(c.horizon)
      << "]; final mode " << tr.mode(last).index << ", state "
      << vec_text(tr.x(last).transpose()) << "\n";
  out << "wrote " << file.string() << "\n";
  return 0;
}

int cmd_ipa(const ScenarioConfig& c, const std::string& out_dir, std::ostream& out) {
  const auto model = build_model(c.model, c.model_params, c.theta);
  const auto path = simulate(model, to_vector(c.theta), c.horizon, c.integrator, c.seed);
  const auto report = run_ipa(model, path, c.integrator);
  json doc = report_to_json(model, path, report);
  doc["normalization"] = to_string(c.normalization);
  const auto file = output_path(c, out_dir, "report_json");
  write_file(file, [&](std::ostream& os) { os << doc.dump(2) << "\n"; });
  const bool per_T = c.normalization == Normalization::per_T;
  for (std::size_t k = 0; k < report.costs.size(); ++k) {
    out << report.costs[k] << ": L = "
        << format_number(per_T ? report.L_normalized(k) : report.L[k]) << ", dL/dtheta = "
        << vec_text(per_T ? report.dL_normalized(k) : report.dL[k]) << " (" << to_string(c.normalization)
        << ")\n";
  }
  out << "wrote " << file.string() << "\n";
  return 0;
}

int cmd_validate(const ScenarioConfig& c, const std::string& out_dir, std::ostream& out) {
  const auto model = build_model(c.model, c.model_params, c.theta);
  const Vector theta = to_vector(c.theta);
  const auto np = theta.size();
  const auto R = c.fd.replications;
  const double h = c.fd.h;
  const bool crn = c.fd.mode == FdConfig::Mode::crn;
  const auto nc = model.costs.size();

  std::ostringstream table;
  table << "replication,cost,coordinate,ipa,fd,abs_error,rel_error,sequence_changed\n";
  std::size_t unchanged = 0;
  double worst = 0.0;
  // Per (cost, coordinate): samples of IPA and of the FD quotient.
  std::vector<std::vector<double>> ipa_samples(nc * static_cast<std::size_t>(np));
  std::vector<std::vector<double>> fd_samples(nc * static_cast<std::size_t>(np));

  for (std::uint64_t r = 0; r < R; ++r) {
    const auto base_rep = crn ? r : r + 2 * R;
    const auto base = simulate(model, theta, c.horizon, c.integrator, c.seed, base_rep);
    const auto rep = run_ipa(model, base, c.integrator);
    bool changed = false;
    std::vector<GradientReport> up;
    std::vector<GradientReport> down;
    for (Eigen::Index j = 0; j < np; ++j) {
      Vector tp = theta;
      Vector tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const auto pu = simulate(model, tp, c.horizon, c.integrator, c.seed, r);
      const auto pd = simulate(model, tm, c.horizon, c.integrator, c.seed, crn ? r : r + R);
      changed = changed || sequence(pu) != sequence(base) || sequence(pd) != sequence(base);
      up.push_back(run_ipa(model, pu, c.integrator));
      down.push_back(run_ipa(model, pd, c.integrator));
    }
    if (!changed) ++unchanged;
    for (std::size_t k = 0; k < nc; ++k) {
      for (Eigen::Index j = 0; j < np; ++j) {
        const double scale = c.normalization == Normalization::per_T ? c.horizon : 1.0;
        const double ipa = rep.dL[k][j] / scale;
        const double fd = (up[j].L[k] - down[j].L[k]) / (2 * h) / scale;
        const double abs_err = std::abs(ipa - fd);
        const double rel_err = abs_err / std::max(std::abs(fd), 1e-8);
        if (crn && !changed) worst = std::max(worst, rel_err);
        const auto slot = k * static_cast<std::size_t>(np) + static_cast<std::size_t>(j);
        ipa_samples[slot].push_back(ipa);
        fd_samples[slot].push_back(fd);
        table << r << ',' << model.costs[k].name << ',' << j << ',' << format_number(ipa) << ','
              << format_number(fd) << ',' << format_number(abs_err) << ','
              << format_number(rel_err) << ',' << (crn ? (changed ? "1" : "0") : "") << '\n';
      }
    }
  }

  bool pass = true;
  if (crn) {
    const double share = static_cast<double>(unchanged) / static_cast<double>(R);
    pass = share >= c.fd.min_unchanged && worst < c.fd.tolerance;
    out << "common random numbers: " << unchanged << "/" << R
        << " replications kept their event sequence; max relative error "
        << format_number(worst) << " (tolerance " << format_number(c.fd.tolerance) << ")\n";
  } else {
    for (std::size_t k = 0; k < nc; ++k) {
      for (Eigen::Index j = 0; j < np; ++j) {
        const auto slot = k * static_cast<std::size_t>(np) + static_cast<std::size_t>(j);
        const double mi = mean(ipa_samples[slot]);
        const double mf = mean(fd_samples[slot]);
        const double se = std::hypot(std_error(ipa_samples[slot]), std_error(fd_samples[slot]));
        const bool ok = std::abs(mi - mf) <= 3.0 * se;
        pass = pass && ok;
        out << model.costs[k].name << "[" << j << "]: mean IPA " << format_number(mi)
            << ", mean FD " << format_number(mf) << ", combined standard error "
            << format_number(se) << (ok ? "" : " (outside 3 standard errors)") << "\n";
      }
    }
  }
  const auto file = output_path(c, out_dir, "validate_csv");
  write_file(file, [&](std::ostream& os) { os << table.str(); });
  out << (pass ? "PASS" : "FAIL") << "\nwrote " << file.string() << "\n";
  return pass ? 0 : 4;
}

int cmd_optimize(const ScenarioConfig& c, const std::string& out_dir, std::ostream& out) {
  const auto model = build_model(c.model, c.model_params, c.theta);
  const ObjectiveSpec objective{c.optimizer.weights, c.normalization};
  objective.check(model);
  OptimizerSettings s;
  s.iterations = c.optimizer.iterations;
  s.replications = c.optimizer.replications;
  s.step = {c.optimizer.step_kind, c.optimizer.step_c};
  s.bounds = {to_vector(c.optimizer.lower), to_vector(c.optimizer.upper)};
  s.grad_tol = c.optimizer.grad_tol;
  const auto trace = optimize(model, objective, to_vector(c.theta), c.horizon, c.integrator, s, c.seed);
  const auto file = output_path(c, out_dir, "trace_csv");
  write_file(file, [&](std::ostream& os) { write_trace_csv(os, trace); });
  out << "final theta " << vec_text(trace.final_theta.transpose()) << ", last J_hat "
      << format_number(trace.iterations.back().J) << " after " << trace.iterations.size()
      << " iterations" << (trace.converged ? " (gradient tolerance reached)" : "") << "\n";
  out << "wrote " << file.string() << "\n";
  return 0;
}

int cmd_classify(const ScenarioConfig& c, std::ostream& out) {
  const auto model = build_model(c.model, c.model_params, c.theta);
  for (std::size_t i = 1; i <= model.num_events; ++i)
    out << "E" << i << " " << to_string(classify_event(model, EventId{static_cast<int>(i)}))
        << "\n";
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and sample-path gradient estimation for stochastic hybrid automata"};
  if (!args.empty()) app.name(std::filesystem::path(args.front()).filename().string());
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool dump = false;
  app.add_option("--config", config_path, "scenario file (JSON)")->required();
  app.add_option("--seed", seed, "override the master seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--dump-config", dump, "print the resolved configuration and exit");
  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "write the sample path as CSV"},
      {"ipa", "write the gradient report as JSON"},
      {"validate", "compare IPA against central finite differences"},
      {"optimize", "projected stochastic gradient descent on theta"},
      {"classify", "print the class of every event"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 2;
  }

  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (seed) {
      if (!doc.is_object()) throw ConfigError("config must be an object");
      doc["seed"] = *seed;
    }
    const ScenarioConfig config = parse_config(doc);
    if (dump) {
      out << to_json(config).dump(2) << "\n";
      return 0;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "simulate") return cmd_simulate(config, out_dir, out);
    if (cmd == "ipa") return cmd_ipa(config, out_dir, out);
    if (cmd == "validate") return cmd_validate(config, out_dir, out);
    if (cmd == "optimize") return cmd_optimize(config, out_dir, out);
    return cmd_classify(config, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const json::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace shipa
