#pragma once

// Animation-principle modulations of a learned primitive and the fixed order
// in which they compose.

#include "dmpanim/dmp.hpp"
#include "dmpanim/kinematics.hpp"
#include "dmpanim/phase.hpp"
#include "dmpanim/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dmpanim {

/// Every principle intensity. A default-constructed config is neutral.
struct ModulationConfig {
  // Arc: > 0 smooths the weights, < 0 sharpens them (unsharp mask).
  double p_arc = 0.0;

  // Anticipation: acceleration inversion at the start of the motion.
  double p_ant = 0.0;
  /// Window length in seconds. Mutually exclusive with t_ant_fraction.
  std::optional<double> t_ant;
  /// Window as a fraction of the (time-scaled) duration.
  std::optional<double> t_ant_fraction;
  /// Number of most important dimensions to modulate; all when unset.
  std::optional<std::size_t> n_ant;
  /// Manual list of dimensions, bypassing importance inference.
  std::optional<std::vector<std::size_t>> ant_dims;

  // Slow in / slow out: inverted-sigmoid phase steepness.
  std::optional<double> slow_k;

  // Timing: duration scale and sector-based progression.
  double p_time = 1.0;
  std::vector<TimingSector> timing_sectors;

  // Exaggeration: forcing-term gain.
  double p_exa = 1.0;

  // Secondary action: output offset from source velocity.
  double p_sec = 0.0;
  std::vector<Coupling> secondary;

  // Follow-through: injected inverse source acceleration.
  double p_follow = 0.0;
  std::vector<Coupling> follow;

  // Randomization of the weights.
  double p_rand = 0.0;
  std::uint64_t seed = 0;

  // Interactive goal.
  std::optional<Vector> goal_override;

  /// Range checks that do not need a model. Throws ValidationError.
  void validate() const;

  friend bool operator==(const ModulationConfig& a, const ModulationConfig& b);
};

/// Arc modulation over each weight row. sigma = |p_arc| in basis-index units,
/// Gaussian kernel truncated at 3 sigma and renormalised, mirror padding.
Matrix modulate_arc(const Matrix& weights, double p_arc);

/// One row of Gaussian smoothing as used by modulate_arc.
std::vector<double> gaussian_smooth(std::span<const double> row, double sigma);

/// Indices of the n_ant dimensions with the largest max - min range,
/// descending; ties go to the lower index. Throws ValidationError when n_ant
/// is outside [1, dims].
std::vector<std::size_t> select_important_dims(const Matrix& positions, std::size_t n_ant);
std::vector<std::size_t> select_important_dims(const Demonstration& demo, std::size_t n_ant);

/// tau' = p_time * tau. Throws ValidationError unless p_time > 0.
DmpModel scale_time(const DmpModel& model, double p_time);

/// f' = p_exa * f.
Vector exaggerate(const Vector& f, double p_exa);

/// w' = w + (1 + mean_i |w_i|) * p_rand * eps per row, eps drawn from
/// Philox4x32-10 keyed by `seed` with the flat entry index as counter.
Matrix randomize_weights(const Matrix& weights, double p_rand, std::uint64_t seed);

/// Optional inputs to composition.
struct ComposeContext {
  /// Source of importance ranges for anticipation. Without it, an unmodulated
  /// rollout of the model stands in for the demonstration.
  const Demonstration* demo = nullptr;
  /// Needed to validate follow-through couplings.
  const RobotConfig* robot = nullptr;
};

/// A composed, immutable modulation: modified model, optional phase function
/// and per-step hooks.
class ModulationPipeline {
 public:
  ModulationPipeline(DmpModel model, std::optional<PhaseFunction> phase, StepHooks hooks)
      : model_(std::move(model)), phase_(std::move(phase)), hooks_(std::move(hooks)) {}

  const DmpModel& model() const noexcept { return model_; }
  const std::optional<PhaseFunction>& phase() const noexcept { return phase_; }
  const StepHooks& hooks() const noexcept { return hooks_; }

  /// Forcing as evaluated inside the integration loop (exaggeration included).
  Vector forcing(double x) const;

  /// Rollout options carrying this pipeline's phase function.
  RolloutOptions options(std::optional<std::size_t> settle_steps = std::nullopt) const;

  Rollout start(std::optional<std::size_t> settle_steps = std::nullopt) const;
  Trajectory run(std::optional<std::size_t> settle_steps = std::nullopt) const;

 private:
  DmpModel model_;
  std::optional<PhaseFunction> phase_;
  StepHooks hooks_;
};

/// Applies, in order: randomize -> arc on the weights; exaggeration, time
/// scaling and goal override on the model; slow or timing phase; anticipation
/// then follow-through per step; secondary action on the output.
/// Throws ValidationError (CouplingError for coupling rules).
ModulationPipeline compose(const ModulationConfig& config, const DmpModel& model,
                           const ComposeContext& context = {});

}  // namespace dmpanim
