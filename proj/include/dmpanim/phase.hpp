#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dmpanim {

/// Linear phase 1 - step / total_steps. Throws ValidationError when step is
/// outside [0, total_steps] or total_steps is zero.
double linear_phase(std::size_t step, std::size_t total_steps);

/// A span of the shared timeline: `fraction` of the nominal step count,
/// traversed at relative speed `speed`.
struct TimingSector {
  double fraction = 1.0;
  double speed = 1.0;

  friend bool operator==(const TimingSector&, const TimingSector&) = default;
};

/// Tabulated, monotone non-increasing phase over steps 0..N with
/// value(0) == 1 and value(N) == 0 exactly. Steps past N read 0.
class PhaseFunction {
 public:
  enum class Kind { Linear, SlowSigmoid, SectorSpline };

  static PhaseFunction linear(std::size_t total_steps);

  /// Inverted logistic in normalised step u = n/N centred at u = 0.5 with
  /// steepness k, rescaled to hit 1 and 0 at the ends.
  static PhaseFunction slow(std::size_t total_steps, double k);

  /// Phase consumption rate proportional to each sector's speed, integrated
  /// and interpolated with a monotone (PCHIP) cubic over the step index.
  static PhaseFunction timing(std::size_t total_steps, std::span<const TimingSector> sectors);

  Kind kind() const noexcept { return kind_; }
  std::size_t total_steps() const noexcept { return values_.size() - 1; }
  const std::vector<double>& values() const noexcept { return values_; }

  double operator()(std::size_t step) const noexcept {
    return step < values_.size() ? values_[step] : 0.0;
  }

 private:
  PhaseFunction(Kind kind, std::vector<double> values);

  Kind kind_;
  std::vector<double> values_;
};

}  // namespace dmpanim
