#pragma once

// The one code path from (model, modulation, robot) to a trajectory. The CLI
// and the HTTP service both call it, so equal inputs give equal bytes.

#include "dmpanim/dmp.hpp"
#include "dmpanim/kinematics.hpp"
#include "dmpanim/principles.hpp"
#include "dmpanim/types.hpp"

#include <cstddef>
#include <span>
#include <string_view>

namespace dmpanim {

struct RunContext {
  const Demonstration* demo = nullptr;
  const RobotConfig* robot = nullptr;
  /// Settling window as a fraction of the modulated tau.
  double settle_fraction = 0.5;
  std::size_t max_steps = 10'000'000;
};

/// round(fraction * tau / dt). Throws ValidationError for a negative or
/// non-finite fraction, or when the row count would exceed `max_steps`.
std::size_t settle_steps(const DmpModel& model, double fraction, std::size_t max_steps);

/// compose() followed by a rollout with the requested settling window.
Trajectory run_modulated(const DmpModel& model, const ModulationConfig& config,
                         const RunContext& context = {});

/// Scalar parameters accepted by sweeps.
std::span<const std::string_view> sweep_parameters();

/// Sets one named scalar parameter. Throws ValidationError for an unknown name.
void set_parameter(ModulationConfig& config, std::string_view name, double value);

}  // namespace dmpanim
