#include "dmpanim/phase.hpp"

#include "dmpanim/error.hpp"

// pchip.hpp calls isnan unqualified; fpclassify provides boost::math::isnan.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace dmpanim {
namespace {

// Rescale so the ends are exactly 1 and 0, clamp rounding noise, and force
// monotonicity that interpolation rounding could break by an ulp.
std::vector<double> renormalize(std::vector<double> v) {
  const double first = v.front();
  const double last = v.back();
  const double span = first - last;
  for (double& value : v) value = std::clamp((value - last) / span, 0.0, 1.0);
  v.front() = 1.0;
  v.back() = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::min(v[i], v[i - 1]);
  return v;
}

}  // namespace

double linear_phase(std::size_t step, std::size_t total_steps) {
  if (total_steps == 0) throw ValidationError("linear_phase: total_steps must be >= 1");
  if (step > total_steps) {
    throw ValidationError("linear_phase: step " + std::to_string(step) + " exceeds total " +
                          std::to_string(total_steps));
  }
  return 1.0 - static_cast<double>(step) / static_cast<double>(total_steps);
}

PhaseFunction::PhaseFunction(Kind kind, std::vector<double> values)
    : kind_(kind), values_(std::move(values)) {}

PhaseFunction PhaseFunction::linear(std::size_t total_steps) {
  if (total_steps == 0) throw ValidationError("phase: total_steps must be >= 1");
  std::vector<double> v(total_steps + 1);
  for (std::size_t n = 0; n <= total_steps; ++n) v[n] = linear_phase(n, total_steps);
  return PhaseFunction(Kind::Linear, std::move(v));
}

PhaseFunction PhaseFunction::slow(std::size_t total_steps, double k) {
  if (total_steps == 0) throw ValidationError("phase: total_steps must be >= 1");
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw ValidationError("slow phase: steepness k must be positive and finite");
  }
  const double n_total = static_cast<double>(total_steps);
  std::vector<double> v(total_steps + 1);
  for (std::size_t n = 0; n <= total_steps; ++n) {
    const double u = static_cast<double>(n) / n_total;
    v[n] = 1.0 / (1.0 + std::exp(k * (u - 0.5)));
  }
  return PhaseFunction(Kind::SlowSigmoid, renormalize(std::move(v)));
}

PhaseFunction PhaseFunction::timing(std::size_t total_steps,
                                    std::span<const TimingSector> sectors) {
  if (total_steps == 0) throw ValidationError("phase: total_steps must be >= 1");
  if (sectors.empty()) throw ValidationError("timing phase: at least one sector required");
  double fraction_sum = 0.0;
  double consumption_sum = 0.0;
  for (const TimingSector& s : sectors) {
    if (!(s.fraction > 0.0) || !std::isfinite(s.fraction)) {
      throw ValidationError("timing phase: sector fractions must be positive");
    }
    if (!(s.speed > 0.0) || !std::isfinite(s.speed)) {
      throw ValidationError("timing phase: sector speeds must be positive");
    }
    fraction_sum += s.fraction;
    consumption_sum += s.fraction * s.speed;
  }
  if (std::abs(fraction_sum - 1.0) > 1e-9) {
    throw ValidationError("timing phase: sector fractions must sum to 1");
  }

  // Knots at sector boundaries and at the thirds of every sector (the spline
  // needs at least four). Within a sector the consumed phase is linear, so
  // the extra knots carry exact data.
  const double n_total = static_cast<double>(total_steps);
  std::vector<double> knot_steps{0.0};
  std::vector<double> knot_phase{1.0};
  double position = 0.0;
  double consumed = 0.0;
  for (const TimingSector& s : sectors) {
    for (int third = 1; third <= 3; ++third) {
      const double part = s.fraction * third / 3.0;
      knot_steps.push_back((position + part) * n_total);
      knot_phase.push_back(1.0 - (consumed + part * s.speed) / consumption_sum);
    }
    position += s.fraction;
    consumed += s.fraction * s.speed;
  }
  knot_steps.back() = n_total;
  knot_phase.back() = 0.0;

  const boost::math::interpolators::pchip<std::vector<double>> spline(std::move(knot_steps),
                                                                      std::move(knot_phase));
  std::vector<double> v(total_steps + 1);
  for (std::size_t n = 0; n <= total_steps; ++n) v[n] = spline(static_cast<double>(n));
  return PhaseFunction(Kind::SectorSpline, renormalize(std::move(v)));
}

}  // namespace dmpanim
