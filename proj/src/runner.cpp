#include "dmpanim/runner.hpp"

#include "dmpanim/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace dmpanim {
namespace {

constexpr std::array<std::string_view, 11> kParameters{
    "p_arc", "p_ant", "t_ant", "t_ant_fraction", "slow_k", "p_time",
    "p_exa", "p_sec", "p_follow", "p_rand", "n_ant"};

}  // namespace

std::size_t settle_steps(const DmpModel& model, double fraction, std::size_t max_steps) {
  if (!std::isfinite(fraction) || fraction < 0.0) {
    throw ValidationError("settle must be a finite fraction >= 0");
  }
  const double steps = std::round(fraction * model.tau / model.dt);
  if (!(steps + static_cast<double>(model.nominal_steps()) + 1.0 <= static_cast<double>(max_steps))) {
    throw ValidationError("rollout: settling window of " + std::to_string(fraction) +
                          " tau exceeds the limit of " + std::to_string(max_steps) + " rows");
  }
  return static_cast<std::size_t>(steps);
}

Trajectory run_modulated(const DmpModel& model, const ModulationConfig& config,
                         const RunContext& context) {
  const ModulationPipeline pipeline =
      compose(config, model, ComposeContext{context.demo, context.robot});
  RolloutOptions options =
      pipeline.options(settle_steps(pipeline.model(), context.settle_fraction, context.max_steps));
  options.max_steps = context.max_steps;
  return Rollout(pipeline.model(), std::move(options), pipeline.hooks()).finish();
}

std::span<const std::string_view> sweep_parameters() { return kParameters; }

void set_parameter(ModulationConfig& config, std::string_view name, double value) {
  if (name == "p_arc") {
    config.p_arc = value;
  } else if (name == "p_ant") {
    config.p_ant = value;
  } else if (name == "t_ant") {
    config.t_ant = value;
    config.t_ant_fraction.reset();
  } else if (name == "t_ant_fraction") {
    config.t_ant_fraction = value;
    config.t_ant.reset();
  } else if (name == "slow_k") {
    config.slow_k = value;
    config.timing_sectors.clear();
  } else if (name == "p_time") {
    config.p_time = value;
  } else if (name == "p_exa") {
    config.p_exa = value;
  } else if (name == "p_sec") {
    config.p_sec = value;
  } else if (name == "p_follow") {
    config.p_follow = value;
  } else if (name == "p_rand") {
    config.p_rand = value;
  } else if (name == "n_ant") {
    if (!(value >= 1.0) || value != std::floor(value) || value > 1e9) {
      throw ValidationError("n_ant must be a positive integer");
    }
    config.n_ant = static_cast<std::size_t>(value);
  } else {
    std::string known;
    for (std::string_view p : kParameters) {
      known += known.empty() ? "" : ", ";
      known += p;
    }
    throw ValidationError("unknown parameter '" + std::string(name) + "' (known: " + known + ")");
  }
}

}  // namespace dmpanim
