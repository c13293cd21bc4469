#ifndef SHIPA_IO_HPP
#define SHIPA_IO_HPP

#include <ostream>
#include <string>

#include <json.hpp>

#include "shipa/catalog.hpp"
#include "shipa/optimizer.hpp"

namespace shipa {

/// Shortest round-trip decimal form; -0 prints as 0.
std::string format_number(double v);

/// Header t,q,x_0..x_{N-1},event_id. Grid rows are thinned by `stride`;
/// each transition contributes its left- and right-limit rows.
void write_path_csv(std::ostream& os, const SamplePath& path, std::size_t stride);

/// Gradient report document; SFM paths also get their period structure and
/// the closed-form estimators.
nlohmann::json report_to_json(const AutomatonModel& model, const SamplePath& path,
                              const GradientReport& report);

/// Header iter,theta_0..,J_hat,grad_0..,step.
void write_trace_csv(std::ostream& os, const OptimizerTrace& trace);

}  // namespace shipa

#endif  // SHIPA_IO_HPP
