#ifndef SHIPA_CORE_HPP
#define SHIPA_CORE_HPP

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace shipa {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;

/// Index into a model's mode table.
struct ModeId {
  std::size_t index = 0;
  auto operator<=>(const ModeId&) const = default;
};

/// 1-based event label, E1..E_{N_e}.
struct EventId {
  int value = 0;
  auto operator<=>(const EventId&) const = default;
  [[nodiscard]] std::size_t slot() const { return static_cast<std::size_t>(value - 1); }
};

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration or invalid user input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The model is inconsistent, or a run drove it outside the modeling
/// assumptions.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A sample path violated one of the numbered modeling assumptions:
///   1 bounded vector field, 2 no independent simultaneous events,
///   3 finite simultaneous chains, 4 non-tangential guard crossings,
///   5 rate equality only on null sets (flow models).
class AssumptionViolation : public ModelError {
 public:
  AssumptionViolation(int assumption, const std::string& what)
      : ModelError("Assumption " + std::to_string(assumption) + " violated: " + what),
        assumption_(assumption) {}
  [[nodiscard]] int assumption() const { return assumption_; }

 private:
  int assumption_;
};

/// Non-finite values or a failed numerical procedure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace shipa

#endif  // SHIPA_CORE_HPP
