#ifndef SHIPA_STOCHASTIC_HPP
#define SHIPA_STOCHASTIC_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "shipa/core.hpp"

namespace shipa {

struct Exponential {
  double rate = 1.0;
};
struct Uniform {
  double lower = 0.0;
  double upper = 1.0;
};
struct Deterministic {
  double value = 1.0;
};
/// Replays a fixed list; the n-th draw is values[(n - 1) % size].
struct Empirical {
  std::vector<double> values;
};

using Distribution = std::variant<Exponential, Uniform, Deterministic, Empirical>;

/// Throws ConfigError on a misconfigured sampler (rate <= 0, lower >= upper,
/// empty list, non-finite parameters). With `lifetime` set, every value the
/// sampler can produce must also be strictly positive.
void check_distribution(const Distribution& dist, bool lifetime);

/// Closed interval containing every value the sampler can produce.
std::pair<double, double> support(const Distribution& dist);

/// Inverse-transform sample from a uniform variate in (0, 1).
double sample(const Distribution& dist, double uniform01, std::size_t n);

std::string describe(const Distribution& dist);

/// Smooth map from a theta-free base variate w to a lifetime V(w, theta).
struct LifetimeReparam {
  std::function<double(double w, const Vector& theta)> value;
  std::function<RowVector(double w, const Vector& theta)> d_dtheta;
};

/// V = theta[coordinate] * w.
LifetimeReparam scaled_by_theta(std::size_t coordinate);

/// Lifetime sequence {V_n(theta)} of one event.
struct ClockStructure {
  EventId event;
  Distribution sampler = Deterministic{1.0};
  std::optional<LifetimeReparam> reparam;
  std::uint64_t stream = 0;

  [[nodiscard]] bool theta_free() const { return !reparam.has_value(); }
};

/// Magnitude sequence of a piecewise-constant jump process. Its epochs are
/// governed by the clock at index `clock` in the owning model.
struct JumpProcess {
  Distribution values = Deterministic{0.0};
  std::size_t clock = 0;
  std::uint64_t stream = 0;
};

/// One seeded uniform stream with random access by draw index.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t replication);

  /// The n-th uniform variate in (0, 1), n >= 1.
  double uniform(std::size_t n);

 private:
  std::mt19937_64 engine_;
  std::vector<double> cache_;
};

/// Hands out one independent stream per (stream id, replication) pair.
class RngStreamSet {
 public:
  explicit RngStreamSet(std::uint64_t master_seed) : master_seed_(master_seed) {}

  [[nodiscard]] RandomStream stream(std::uint64_t stream_id, std::uint64_t replication) const {
    return {master_seed_, stream_id, replication};
  }
  [[nodiscard]] std::uint64_t master_seed() const { return master_seed_; }

 private:
  std::uint64_t master_seed_;
};

struct Lifetime {
  double value = 0.0;
  RowVector d_dtheta;
};

/// n-th lifetime of `clock` (n >= 1) and its theta-derivative.
Lifetime draw_lifetime(const ClockStructure& clock, RandomStream& stream, std::size_t n,
                       const Vector& theta);

/// n-th jump magnitude of `process` (n >= 1).
double draw_jump(const JumpProcess& process, RandomStream& stream, std::size_t n);

}  // namespace shipa

#endif  // SHIPA_STOCHASTIC_HPP
