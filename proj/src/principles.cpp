#include "dmpanim/principles.hpp"

#include "dmpanim/error.hpp"
#include "dmpanim/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dmpanim {
namespace {

void require(bool condition, const char* message) {
  if (!condition) throw ValidationError(message);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// Half-sample symmetric reflection (a b c | c b a), repeated for offsets
// longer than the signal.
std::size_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  const std::ptrdiff_t period = 2 * n;
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < n ? m : period - 1 - m);
}

bool same_optional_vector(const std::optional<Vector>& a, const std::optional<Vector>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || same_values(*a, *b);
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void ModulationConfig::validate() const {
  require(std::isfinite(p_arc), "modulation: p_arc must be finite");
  require(finite_nonneg(p_ant), "modulation: p_ant must be >= 0");
  require(!(t_ant && t_ant_fraction), "modulation: give t_ant or t_ant_fraction, not both");
  require(!t_ant || finite_nonneg(*t_ant), "modulation: t_ant must be >= 0");
  require(!t_ant_fraction || finite_nonneg(*t_ant_fraction),
          "modulation: t_ant_fraction must be >= 0");
  require(!n_ant || *n_ant >= 1, "modulation: n_ant must be >= 1");
  require(!slow_k || (std::isfinite(*slow_k) && *slow_k > 0.0), "modulation: slow k must be > 0");
  require(std::isfinite(p_time) && p_time > 0.0, "modulation: p_time must be > 0");
  require(!(slow_k && !timing_sectors.empty()),
          "modulation: slow and timing phase functions are mutually exclusive");
  require(finite_nonneg(p_exa), "modulation: p_exa must be >= 0");
  require(finite_nonneg(p_sec), "modulation: p_sec must be >= 0");
  require(finite_nonneg(p_follow), "modulation: p_follow must be >= 0");
  require(finite_nonneg(p_rand), "modulation: p_rand must be >= 0");
  for (const auto* list : {&secondary, &follow}) {
    for (const Coupling& c : *list) {
      require(c.delta == 1 || c.delta == -1, "modulation: coupling delta must be +1 or -1");
    }
  }
  require(!goal_override || goal_override->allFinite(), "modulation: goal must be finite");
}

bool operator==(const ModulationConfig& a, const ModulationConfig& b) {
  return a.p_arc == b.p_arc && a.p_ant == b.p_ant && a.t_ant == b.t_ant &&
         a.t_ant_fraction == b.t_ant_fraction && a.n_ant == b.n_ant && a.ant_dims == b.ant_dims &&
         a.slow_k == b.slow_k && a.p_time == b.p_time && a.timing_sectors == b.timing_sectors &&
         a.p_exa == b.p_exa && a.p_sec == b.p_sec && a.secondary == b.secondary &&
         a.p_follow == b.p_follow && a.follow == b.follow && a.p_rand == b.p_rand &&
         a.seed == b.seed && same_optional_vector(a.goal_override, b.goal_override);
}

// ---------------------------------------------------------------------------
// Weight-stage modulations

std::vector<double> gaussian_smooth(std::span<const double> row, double sigma) {
  if (!(sigma > 0.0)) return {row.begin(), row.end()};
  const auto radius = static_cast<std::ptrdiff_t>(3.0 * sigma + 0.5);
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double u = static_cast<double>(k) / sigma;
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * u * u);
  }
  const double norm = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (double& k : kernel) k /= norm;

  const auto n = static_cast<std::ptrdiff_t>(row.size());
  std::vector<double> out(row.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
      acc += kernel[static_cast<std::size_t>(k + radius)] * row[reflect_index(i + k, n)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

Matrix modulate_arc(const Matrix& weights, double p_arc) {
  if (p_arc == 0.0) return weights;
  Matrix out(weights.rows(), weights.cols());
  const auto cols = static_cast<std::size_t>(weights.cols());
  for (Eigen::Index r = 0; r < weights.rows(); ++r) {
    const std::span<const double> row(weights.row(r).data(), cols);
    const std::vector<double> smooth = gaussian_smooth(row, std::abs(p_arc));
    for (std::size_t i = 0; i < cols; ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      out(r, c) = p_arc > 0.0 ? smooth[i] : row[i] + (row[i] - smooth[i]);
    }
  }
  return out;
}

Matrix randomize_weights(const Matrix& weights, double p_rand, std::uint64_t seed) {
  if (p_rand == 0.0) return weights;
  const Philox4x32 rng(seed);
  Matrix out = weights;
  const auto cols = weights.cols();
  for (Eigen::Index r = 0; r < weights.rows(); ++r) {
    const double mean_abs = weights.row(r).cwiseAbs().sum() / static_cast<double>(cols);
    const double scale = (1.0 + mean_abs) * p_rand;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto index = static_cast<std::uint64_t>(r * cols + c);
      out(r, c) += scale * rng.normal(index);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Anticipation importance

std::vector<std::size_t> select_important_dims(const Matrix& positions, std::size_t n_ant) {
  const auto dims = static_cast<std::size_t>(positions.cols());
  if (n_ant < 1 || n_ant > dims) {
    throw ValidationError("anticipation: n_ant must lie in [1, " + std::to_string(dims) + "]");
  }
  std::vector<double> range(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const auto col = positions.col(static_cast<Eigen::Index>(d));
    range[d] = col.maxCoeff() - col.minCoeff();
  }
  std::vector<std::size_t> order(dims);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return range[a] > range[b]; });
  order.resize(n_ant);
  return order;
}

std::vector<std::size_t> select_important_dims(const Demonstration& demo, std::size_t n_ant) {
  return select_important_dims(demo.positions(), n_ant);
}

// ---------------------------------------------------------------------------
// Model-stage modulations

DmpModel scale_time(const DmpModel& model, double p_time) {
  if (!(p_time > 0.0) || !std::isfinite(p_time)) {
    throw ValidationError("timing: p_time must be > 0");
  }
  DmpModel out = model;
  if (p_time != 1.0) out.tau = p_time * model.tau;
  return out;
}

Vector exaggerate(const Vector& f, double p_exa) { return p_exa * f; }

// ---------------------------------------------------------------------------
// Pipeline

Vector ModulationPipeline::forcing(double x) const {
  Vector f = dmpanim::forcing(model_, x);
  for (Eigen::Index d = 0; d < f.size(); ++d) f(d) *= hooks_.forcing_scale;
  return f;
}

RolloutOptions ModulationPipeline::options(std::optional<std::size_t> settle_steps) const {
  RolloutOptions o;
  o.settle_steps = settle_steps;
  o.phase = phase_;
  return o;
}

Rollout ModulationPipeline::start(std::optional<std::size_t> settle_steps) const {
  return Rollout(model_, options(settle_steps), hooks_);
}

Trajectory ModulationPipeline::run(std::optional<std::size_t> settle_steps) const {
  return start(settle_steps).finish();
}

ModulationPipeline compose(const ModulationConfig& config, const DmpModel& model,
                           const ComposeContext& context) {
  config.validate();
  model.validate();
  const std::size_t dims = model.dims();

  // (1) weights: randomize, then arc.
  DmpModel modulated = model;
  if (config.p_rand != 0.0) {
    modulated.weights = randomize_weights(modulated.weights, config.p_rand, config.seed);
  }
  if (config.p_arc != 0.0) modulated.weights = modulate_arc(modulated.weights, config.p_arc);

  // (2) model: exaggeration factor, time scaling, goal override.
  StepHooks hooks;
  hooks.forcing_scale = config.p_exa;
  modulated = scale_time(modulated, config.p_time);
  if (config.goal_override) {
    if (static_cast<std::size_t>(config.goal_override->size()) != dims) {
      throw ValidationError("modulation: goal override has " +
                            std::to_string(config.goal_override->size()) +
                            " values for a model with " + std::to_string(dims) + " dimensions");
    }
    modulated.goal = *config.goal_override;
  }
  modulated.validate();

  // (3) phase.
  std::optional<PhaseFunction> phase;
  const std::size_t nominal = modulated.nominal_steps();
  if (config.slow_k) {
    phase = PhaseFunction::slow(nominal, *config.slow_k);
  } else if (!config.timing_sectors.empty()) {
    phase = PhaseFunction::timing(nominal, config.timing_sectors);
  }

  // (4) acceleration stage: anticipation, then follow-through.
  const double window = config.t_ant ? *config.t_ant
                        : config.t_ant_fraction ? *config.t_ant_fraction * modulated.tau
                                                : 0.0;
  if (config.p_ant != 0.0 && window > 0.0) {
    hooks.anticipation_gain = config.p_ant;
    hooks.anticipation_window = window;
    if (config.ant_dims) {
      for (std::size_t d : *config.ant_dims) {
        require(d < dims, "modulation: anticipation dimension out of range");
      }
      hooks.anticipation_dims = *config.ant_dims;
    } else {
      const std::size_t n_ant = config.n_ant.value_or(dims);
      if (context.demo) {
        require(context.demo->dims() == dims, "modulation: demonstration dimension mismatch");
        hooks.anticipation_dims = select_important_dims(*context.demo, n_ant);
      } else {
        RolloutOptions plain;
        plain.settle_steps = 0;
        hooks.anticipation_dims = select_important_dims(rollout(model, plain).positions, n_ant);
      }
    }
  }

  std::vector<Violation> violations;
  if (config.p_follow != 0.0 && !config.follow.empty()) {
    if (!context.robot) {
      violations.push_back({"requires-robot",
                            "follow-through couplings need a robot config to be validated", ""});
    } else {
      for (const Coupling& c : config.follow) {
        require(c.source < dims && c.target < dims,
                "modulation: follow-through coupling index out of range");
        const CouplingReport report = validate_follow_coupling(*context.robot, c);
        violations.insert(violations.end(), report.violations.begin(), report.violations.end());
      }
    }
    hooks.follow_gain = config.p_follow;
    hooks.follow = config.follow;
  }

  // (5) output stage: secondary action.
  if (config.p_sec != 0.0 && !config.secondary.empty()) {
    for (const Coupling& c : config.secondary) {
      const CouplingReport report = validate_secondary_coupling(dims, c);
      if (context.robot) validate_secondary_coupling(*context.robot, c);
      violations.insert(violations.end(), report.violations.begin(), report.violations.end());
    }
    hooks.secondary_gain = config.p_sec;
    hooks.secondary = config.secondary;
  }
  if (!violations.empty()) throw CouplingError(std::move(violations));

  return ModulationPipeline(std::move(modulated), std::move(phase), std::move(hooks));
}

}  // namespace dmpanim
