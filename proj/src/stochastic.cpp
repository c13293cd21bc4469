#include "shipa/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace shipa {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

void check_distribution(const Distribution& dist, bool lifetime) {
  std::visit(overloaded{
                 [](const Exponential& d) {
                   if (!(d.rate > 0.0) || !std::isfinite(d.rate))
                     throw ConfigError("exponential rate must be positive and finite");
                 },
                 [&](const Uniform& d) {
                   if (!std::isfinite(d.lower) || !std::isfinite(d.upper) || !(d.lower < d.upper))
                     throw ConfigError("uniform sampler needs finite lower < upper");
                   if (lifetime && d.lower < 0.0)
                     throw ConfigError("uniform lifetime sampler must have lower >= 0");
                 },
                 [&](const Deterministic& d) {
                   if (std::isnan(d.value)) throw ConfigError("deterministic value is NaN");
                   if (lifetime && !(d.value > 0.0))
                     throw ConfigError("deterministic lifetime must be positive");
                 },
                 [&](const Empirical& d) {
                   if (d.values.empty()) throw ConfigError("empirical sampler has no values");
                   for (double v : d.values) {
                     if (!std::isfinite(v)) throw ConfigError("empirical value is not finite");
                     if (lifetime && !(v > 0.0))
                       throw ConfigError("empirical lifetimes must be positive");
                   }
                 },
             },
             dist);
}

std::pair<double, double> support(const Distribution& dist) {
  return std::visit(
      overloaded{
          [](const Exponential&) { return std::pair{0.0, std::numeric_limits<double>::infinity()}; },
          [](const Uniform& d) { return std::pair{d.lower, d.upper}; },
          [](const Deterministic& d) { return std::pair{d.value, d.value}; },
          [](const Empirical& d) {
            auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
            return std::pair{*lo, *hi};
          },
      },
      dist);
}

double sample(const Distribution& dist, double uniform01, std::size_t n) {
  return std::visit(overloaded{
                        [&](const Exponential& d) { return -std::log1p(-uniform01) / d.rate; },
                        [&](const Uniform& d) { return d.lower + (d.upper - d.lower) * uniform01; },
                        [](const Deterministic& d) { return d.value; },
                        [&](const Empirical& d) { return d.values[(n - 1) % d.values.size()]; },
                    },
                    dist);
}

std::string describe(const Distribution& dist) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Exponential& d) { os << "exponential(" << d.rate << ")"; },
                 [&](const Uniform& d) { os << "uniform(" << d.lower << "," << d.upper << ")"; },
                 [&](const Deterministic& d) { os << "deterministic(" << d.value << ")"; },
                 [&](const Empirical& d) { os << "empirical[" << d.values.size() << "]"; },
             },
             dist);
  return os.str();
}

LifetimeReparam scaled_by_theta(std::size_t coordinate) {
  return {
      [coordinate](double w, const Vector& theta) { return theta[coordinate] * w; },
      [coordinate](double w, const Vector& theta) {
        RowVector d = RowVector::Zero(theta.size());
        d[coordinate] = w;
        return d;
      },
  };
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_id,
                           std::uint64_t replication) {
  std::seed_seq seq{lo32(master_seed), hi32(master_seed), lo32(stream_id),
                    hi32(stream_id),   lo32(replication), hi32(replication)};
  engine_.seed(seq);
}

double RandomStream::uniform(std::size_t n) {
  if (n == 0) throw ConfigError("draw index is 1-based");
  while (cache_.size() < n) {
    // 53 random bits, offset by half an ulp so the variate is never 0 or 1.
    const auto bits = engine_() >> 11;
    cache_.push_back((static_cast<double>(bits) + 0.5) * 0x1.0p-53);
  }
  return cache_[n - 1];
}

Lifetime draw_lifetime(const ClockStructure& clock, RandomStream& stream, std::size_t n,
                       const Vector& theta) {
  if (n == 0) throw ConfigError("lifetime index is 1-based");
  check_distribution(clock.sampler, true);
  const double w = sample(clock.sampler, stream.uniform(n), n);
  if (!clock.reparam) return {w, RowVector::Zero(theta.size())};
  Lifetime out{clock.reparam->value(w, theta), clock.reparam->d_dtheta(w, theta)};
  if (!(out.value > 0.0))
    throw ModelError("reparameterized lifetime of E" + std::to_string(clock.event.value) +
                     " is not positive");
  return out;
}

double draw_jump(const JumpProcess& process, RandomStream& stream, std::size_t n) {
  if (n == 0) throw ConfigError("jump index is 1-based");
  check_distribution(process.values, false);
  return sample(process.values, stream.uniform(n), n);
}

}  // namespace shipa
