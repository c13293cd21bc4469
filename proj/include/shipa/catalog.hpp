#ifndef SHIPA_CATALOG_HPP
#define SHIPA_CATALOG_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shipa/simulator.hpp"

namespace shipa {

/// Single-node flow model with buffer capacity theta.
/// State (alpha, beta, x, y_alpha, y_beta); modes 0 empty, 1 partial, 2 full;
/// events E1 alpha=beta, E2 x=theta, E3 x=0, E4/E5 rate-jump timers.
struct SfmParams {
  double theta = 1.0;
  double alpha0 = 2.0;
  double beta0 = 1.0;
  double x0 = 0.0;
  /// Lifetimes between rate jumps; nullopt means the rate never jumps.
  std::optional<Distribution> alpha_clock = Exponential{1.0};
  std::optional<Distribution> beta_clock = Exponential{1.0};
  Distribution alpha_jumps = Uniform{0.0, 4.0};
  Distribution beta_jumps = Uniform{0.5, 2.5};
  /// Constant drifts of the rates between jumps.
  double alpha_drift = 0.0;
  double beta_drift = 0.0;

  void check() const;
};

namespace sfm {
inline constexpr std::size_t alpha = 0;
inline constexpr std::size_t beta = 1;
inline constexpr std::size_t x = 2;
inline constexpr std::size_t y_alpha = 3;
inline constexpr std::size_t y_beta = 4;
inline constexpr ModeId empty{0};
inline constexpr ModeId partial{1};
inline constexpr ModeId full{2};
}  // namespace sfm

AutomatonModel build_single_node_sfm(const SfmParams& params);

/// Non-empty periods and the full periods inside them.
struct NepFpStructure {
  struct Nep {
    double xi = 0.0;
    double eta = 0.0;
    bool open_at_horizon = false;
    std::vector<std::pair<double, double>> fps;  // (nu, sigma)
  };
  std::vector<Nep> neps;

  [[nodiscard]] std::size_t N() const { return neps.size(); }
  [[nodiscard]] std::size_t M(std::size_t n) const { return neps.at(n).fps.size(); }
  [[nodiscard]] std::size_t N_F() const;
};

NepFpStructure analyze_nep_fp(const AutomatonModel& model, const SamplePath& path);

/// sum over NEPs with a full period of (eta_n - nu_{n,1}); raw.
double closed_form_workload_grad(const NepFpStructure& s);
/// -N_F; raw.
double closed_form_loss_grad(const NepFpStructure& s);

/// Infinite buffer fed at rate alpha and drained at constant rate beta.
/// State (alpha, x, y); alpha relaxes toward theta_1 at rate kappa between
/// jumps. Modes 0 empty, 1 non-empty; events E1 alpha=beta, E2 x=0, E3 timer.
struct TwoModeBufferParams {
  double kappa = 0.5;
  double beta = 1.0;
  double alpha0 = 1.5;
  double x0 = 0.0;
  std::optional<Distribution> clock = Exponential{1.0};
  Distribution jumps = Uniform{0.0, 3.0};

  void check() const;
};

AutomatonModel build_two_mode_buffer(const TwoModeBufferParams& params);

/// State (x, y). Mode 0 idle; mode 1 fills at theta_1 c - beta. The timer
/// E1 toggles the modes and flushes x to 0 on the way back to idle.
struct ParametricRateParams {
  double c = 1.0;
  double beta = 0.5;
  Distribution clock = Exponential{1.0};

  void check() const;
};

AutomatonModel build_parametric_rate_buffer(const ParametricRateParams& params);

/// State (x, y). The timer E1 sets x to gamma theta_1 and enters mode 1,
/// where x drains at rate beta until E2 (x = 0) returns to mode 0.
struct ResetTestParams {
  double gamma = 2.0;
  double beta = 1.0;
  Distribution clock = Exponential{0.5};

  void check() const;
};

AutomatonModel build_reset_test(const ResetTestParams& params);

/// x' = 1 against g = (x - theta_1)^3: the guard touches zero with dg/dt = 0.
AutomatonModel build_tangent_guard();

/// A timer sets z = 1, after which the mode invariants send the automaton
/// back and forth between its two modes without end.
AutomatonModel build_zeno_chain(double period);

}  // namespace shipa

#endif  // SHIPA_CATALOG_HPP
