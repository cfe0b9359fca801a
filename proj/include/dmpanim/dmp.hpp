#pragma once

#include "dmpanim/phase.hpp"
#include "dmpanim/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace dmpanim {

/// Gaussian basis functions on the phase axis. Centers run from 1 down to 0
/// in equal steps; widths make neighbours cross at activation 0.5.
class BasisSet {
 public:
  /// Equally spaced set of `count` >= 2 functions.
  static BasisSet equally_spaced(std::size_t count);

  /// Explicit centers and widths (used when loading models). Throws
  /// ValidationError on size mismatch, non-finite values or non-positive widths.
  BasisSet(std::vector<double> centers, std::vector<double> widths);

  std::size_t size() const noexcept { return centers_.size(); }
  const std::vector<double>& centers() const noexcept { return centers_; }
  const std::vector<double>& widths() const noexcept { return widths_; }

  /// exp(-h_i (x - c_i)^2) into `out`, which must hold size() values.
  void activations(double x, std::span<double> out) const;
  std::vector<double> activations(double x) const;

  friend bool operator==(const BasisSet&, const BasisSet&) = default;

 private:
  std::vector<double> centers_;
  std::vector<double> widths_;
};

/// Standalone form of BasisSet::activations.
std::vector<double> basis_activations(const BasisSet& basis, double x);

struct Gains {
  double alpha = 25.0;
  /// Always alpha / 4 so the unforced system is critically damped.
  double beta() const noexcept { return alpha / 4.0; }
};

/// A learned primitive: per-dimension spring-damper attractor plus forcing
/// weights over a shared basis.
struct DmpModel {
  BasisSet basis = BasisSet::equally_spaced(2);
  Matrix weights;  // dims x basis
  Vector goal;
  Vector start;
  double tau = 1.0;
  double alpha = 25.0;
  double beta = 6.25;
  double dt = 0.01;
  std::vector<std::string> dim_names;

  std::size_t dims() const noexcept { return static_cast<std::size_t>(goal.size()); }

  /// Nominal rollout length round(tau / dt).
  std::size_t nominal_steps() const;

  /// Throws ValidationError when any invariant is broken.
  void validate() const;
};

bool operator==(const DmpModel& a, const DmpModel& b);

/// Forcing term per dimension at phase x:
/// (sum_i w_i psi_i(x) / sum_i psi_i(x)) * x.
Vector forcing(const DmpModel& model, double x);

/// Same, writing into `out` and using caller-provided activation scratch.
void forcing(const DmpModel& model, double x, std::span<double> activations_scratch,
             std::span<double> out);

struct LearnOptions {
  std::size_t n_basis = 30;
  /// Defaults to the demonstration duration.
  std::optional<double> tau;
  Gains gains;
  /// Defaults to the last demonstration sample.
  std::optional<Vector> goal;
};

struct LearnResult {
  DmpModel model;
  /// Basis indices whose regression denominator vanished; their weights are 0.
  std::vector<std::size_t> degenerate_basis;
};

/// Locally weighted regression of the forcing weights against a linear phase.
/// Throws LearnError on invalid options.
LearnResult learn(const Demonstration& demo, const LearnOptions& options = {});

/// Central differences inside, one-sided at both ends.
Matrix finite_difference(const Matrix& samples, double dt);

/// Source/target dimension pair; delta = -1 declares an inverse relation.
struct Coupling {
  std::size_t source = 0;
  std::size_t target = 0;
  int delta = 1;

  friend bool operator==(const Coupling&, const Coupling&) = default;
};

/// Per-step modifications applied inside the integration loop. A
/// default-constructed value changes nothing.
struct StepHooks {
  /// Multiplies the forcing term (exaggeration).
  double forcing_scale = 1.0;

  /// Acceleration inversion for steps with step * dt < anticipation_window.
  double anticipation_gain = 0.0;
  double anticipation_window = 0.0;
  std::vector<std::size_t> anticipation_dims;

  /// target += -delta * gain * source acceleration, fed back into the state.
  double follow_gain = 0.0;
  std::vector<Coupling> follow;

  /// Output-only offset: target position += delta * gain * source velocity.
  double secondary_gain = 0.0;
  std::vector<Coupling> secondary;

  bool anticipation_active() const noexcept {
    return anticipation_gain != 0.0 && anticipation_window > 0.0 && !anticipation_dims.empty();
  }
  bool follow_active() const noexcept { return follow_gain != 0.0 && !follow.empty(); }
  bool secondary_active() const noexcept { return secondary_gain != 0.0 && !secondary.empty(); }
};

/// ydd' = -gain * ydd on the selected dimensions while step * dt < window.
void apply_anticipation(std::span<double> ydd, std::size_t step, double dt, double gain,
                        double window, std::span<const std::size_t> dims);

/// ydd_target' = ydd_target - delta * gain * ydd_source, sources read before any
/// coupling is applied.
void apply_follow_through(std::span<double> ydd, double gain, std::span<const Coupling> couplings);

/// y_target' = y_target + delta * gain * yd_source, sources read from the raw state.
void apply_secondary_action(std::span<double> y, std::span<const double> yd, double gain,
                            std::span<const Coupling> couplings);

struct RolloutOptions {
  /// Extra steps with the phase held at 0. Defaults to round(0.5 * tau / dt).
  std::optional<std::size_t> settle_steps;
  /// Defaults to the linear phase over the nominal step count.
  std::optional<PhaseFunction> phase;
  /// Initial position; defaults to model.start. Velocity and acceleration start at 0.
  std::optional<Vector> initial_position;
  /// Upper bound on recorded rows.
  std::size_t max_steps = 10'000'000;
  bool record_forcing = false;
};

struct SystemState {
  Vector y;
  Vector yd;
  Vector ydd;
  double x = 1.0;
  std::size_t step = 0;
};

/// Explicit (semi-implicit) Euler integration of the attractor, one recorded
/// row per call to step(). Holds its own copy of the model; single-threaded.
class Rollout {
 public:
  Rollout(const DmpModel& model, RolloutOptions options = {}, StepHooks hooks = {});

  std::size_t nominal_steps() const noexcept { return nominal_steps_; }
  std::size_t total_rows() const noexcept { return total_rows_; }
  bool done() const noexcept { return next_row_ == total_rows_; }

  /// State of the next row to be recorded.
  const SystemState& state() const noexcept { return state_; }
  const Vector& goal() const noexcept { return goal_; }

  /// Replaces the attractor goal from the next recorded row onward.
  void set_goal(const Vector& goal);

  /// Records one row and integrates to the next. Throws NumericError on a
  /// non-finite state.
  void step();

  /// Runs any remaining steps and hands over the recorded trajectory.
  Trajectory finish();

 private:
  DmpModel model_;
  StepHooks hooks_;
  PhaseFunction phase_;
  std::size_t nominal_steps_;
  std::size_t total_rows_;
  std::size_t next_row_ = 0;
  bool record_forcing_;
  Vector goal_;
  SystemState state_;
  std::vector<double> activations_;
  std::vector<double> force_;
  std::vector<double> snapshot_;
  Trajectory out_;
};

Trajectory rollout(const DmpModel& model, const RolloutOptions& options = {},
                   const StepHooks& hooks = {});

/// Root-mean-square error between an unmodulated, unsettled rollout of the
/// model and the demonstration, compared at equal normalised time (linear
/// interpolation of the rollout when sample counts differ).
double reconstruction_rmse(const DmpModel& model, const Demonstration& demo);

/// Largest per-dimension max - min range of the demonstration (>= 0).
double motion_range(const Demonstration& demo);

}  // namespace dmpanim
