#include "dmpanim/dmp.hpp"

#include "dmpanim/error.hpp"
#include "dmpanim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dmpanim {
namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

std::string mismatch(const char* what, std::size_t got, std::size_t want) {
  std::ostringstream os;
  os << what << ": got " << got << ", expected " << want;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// BasisSet

BasisSet BasisSet::equally_spaced(std::size_t count) {
  if (count < 2) throw ValidationError("basis: at least 2 basis functions required");
  const double last = static_cast<double>(count - 1);
  const double spacing = 1.0 / last;
  // Neighbours cross at 0.5: exp(-h (spacing/2)^2) = 1/2.
  const double width = 4.0 * std::numbers::ln2 / (spacing * spacing);
  std::vector<double> centers(count);
  for (std::size_t i = 0; i < count; ++i) centers[i] = 1.0 - static_cast<double>(i) / last;
  return BasisSet(std::move(centers), std::vector<double>(count, width));
}

BasisSet::BasisSet(std::vector<double> centers, std::vector<double> widths)
    : centers_(std::move(centers)), widths_(std::move(widths)) {
  if (centers_.empty()) throw ValidationError("basis: empty");
  if (centers_.size() != widths_.size()) {
    throw ValidationError(mismatch("basis widths", widths_.size(), centers_.size()));
  }
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    if (!std::isfinite(centers_[i]) || !std::isfinite(widths_[i]) || !(widths_[i] > 0.0)) {
      throw ValidationError("basis: centers must be finite and widths positive");
    }
  }
}

void BasisSet::activations(double x, std::span<double> out) const {
  kernels::gaussian_activations(centers_, widths_, x, out);
}

std::vector<double> BasisSet::activations(double x) const {
  std::vector<double> out(size());
  activations(x, out);
  return out;
}

std::vector<double> basis_activations(const BasisSet& basis, double x) {
  return basis.activations(x);
}

// ---------------------------------------------------------------------------
// DmpModel

std::size_t DmpModel::nominal_steps() const {
  const double n = std::round(tau / dt);
  if (!std::isfinite(n) || n < 1.0) throw ValidationError("model: tau / dt must round to >= 1");
  return static_cast<std::size_t>(n);
}

void DmpModel::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("model: tau must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("model: dt must be positive");
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !(beta > 0.0)) {
    throw ValidationError("model: gains must be positive and finite");
  }
  if (alpha != 4.0 * beta) throw ValidationError("model: alpha must equal 4 * beta");
  if (goal.size() == 0) throw ValidationError("model: at least one dimension required");
  if (start.size() != goal.size()) {
    throw ValidationError(mismatch("model start size", start.size(), goal.size()));
  }
  if (static_cast<std::size_t>(weights.rows()) != dims()) {
    throw ValidationError(mismatch("model weight rows", weights.rows(), dims()));
  }
  if (static_cast<std::size_t>(weights.cols()) != basis.size()) {
    throw ValidationError(mismatch("model weight columns", weights.cols(), basis.size()));
  }
  if (!all_finite(weights) || !goal.allFinite() || !start.allFinite()) {
    throw ValidationError("model: weights, goal and start must be finite");
  }
  if (!dim_names.empty() && dim_names.size() != dims()) {
    throw ValidationError(mismatch("model dim_names", dim_names.size(), dims()));
  }
  nominal_steps();
}

bool operator==(const DmpModel& a, const DmpModel& b) {
  return a.basis == b.basis && same_values(a.weights, b.weights) && same_values(a.goal, b.goal) &&
         same_values(a.start, b.start) && a.tau == b.tau && a.alpha == b.alpha &&
         a.beta == b.beta && a.dt == b.dt && a.dim_names == b.dim_names;
}

// ---------------------------------------------------------------------------
// Forcing

void forcing(const DmpModel& model, double x, std::span<double> activations_scratch,
             std::span<double> out) {
  const std::size_t n = model.basis.size();
  model.basis.activations(x, activations_scratch.first(n));
  for (std::size_t d = 0; d < out.size(); ++d) {
    const std::span<const double> row(model.weights.row(static_cast<Eigen::Index>(d)).data(), n);
    const kernels::WeightedSums s = kernels::weighted_sums(row, activations_scratch.first(n));
    out[d] = s.total > 0.0 ? (s.weighted / s.total) * x : 0.0;
  }
}

Vector forcing(const DmpModel& model, double x) {
  std::vector<double> scratch(model.basis.size());
  Vector out(model.dims());
  forcing(model, x, scratch, std::span<double>(out.data(), model.dims()));
  return out;
}

// ---------------------------------------------------------------------------
// Learning

Matrix finite_difference(const Matrix& samples, double dt) {
  const Eigen::Index n = samples.rows();
  Matrix d(n, samples.cols());
  if (n < 2) {
    d.setZero();
    return d;
  }
  d.row(0) = (samples.row(1) - samples.row(0)) / dt;
  d.row(n - 1) = (samples.row(n - 1) - samples.row(n - 2)) / dt;
  for (Eigen::Index t = 1; t + 1 < n; ++t) {
    d.row(t) = (samples.row(t + 1) - samples.row(t - 1)) / (2.0 * dt);
  }
  return d;
}

LearnResult learn(const Demonstration& demo, const LearnOptions& options) {
  if (options.n_basis < 2) throw LearnError("learn: n_basis must be >= 2");
  const double tau = options.tau.value_or(demo.duration());
  if (!(tau > 0.0) || !std::isfinite(tau)) throw LearnError("learn: tau must be positive");
  const double alpha = options.gains.alpha;
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw LearnError("learn: alpha must be positive");
  const double beta = options.gains.beta();

  const std::size_t dims = demo.dims();
  const std::size_t steps = demo.steps();
  const Matrix& y = demo.positions();
  Vector goal = y.row(static_cast<Eigen::Index>(steps - 1)).transpose();
  if (options.goal) {
    if (static_cast<std::size_t>(options.goal->size()) != dims) {
      throw LearnError(mismatch("learn: goal size", options.goal->size(), dims));
    }
    if (!options.goal->allFinite()) throw LearnError("learn: goal must be finite");
    goal = *options.goal;
  }

  const Matrix yd = finite_difference(y, demo.dt());
  const Matrix ydd = finite_difference(yd, demo.dt());

  DmpModel model;
  model.basis = BasisSet::equally_spaced(options.n_basis);
  model.alpha = alpha;
  model.beta = beta;
  model.tau = tau;
  model.dt = demo.dt();
  model.goal = goal;
  model.start = y.row(0).transpose();
  model.dim_names = demo.dim_names();

  const std::size_t nb = options.n_basis;
  Matrix numerator = Matrix::Zero(static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(nb));
  std::vector<double> denominator(nb, 0.0);
  std::vector<double> psi(nb);
  const std::size_t total = steps - 1;

  for (std::size_t t = 0; t < steps; ++t) {
    const double x = linear_phase(t, total);
    model.basis.activations(x, psi);
    kernels::axpy(x * x, psi, denominator);
    const auto ti = static_cast<Eigen::Index>(t);
    for (std::size_t d = 0; d < dims; ++d) {
      const auto di = static_cast<Eigen::Index>(d);
      const double target = tau * tau * ydd(ti, di) -
                            alpha * (beta * (goal(di) - y(ti, di)) - tau * yd(ti, di));
      kernels::axpy(x * target, psi, std::span<double>(numerator.row(di).data(), nb));
    }
  }

  LearnResult result;
  const double largest = *std::max_element(denominator.begin(), denominator.end());
  model.weights.resize(static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(nb));
  for (std::size_t i = 0; i < nb; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const bool degenerate = !(denominator[i] > 1e-12 * largest) || denominator[i] == 0.0;
    if (degenerate) result.degenerate_basis.push_back(i);
    for (std::size_t d = 0; d < dims; ++d) {
      const auto di = static_cast<Eigen::Index>(d);
      model.weights(di, ii) = degenerate ? 0.0 : numerator(di, ii) / denominator[i];
    }
  }
  if (!all_finite(model.weights)) throw LearnError("learn: regression produced non-finite weights");
  model.validate();
  result.model = std::move(model);
  return result;
}

// ---------------------------------------------------------------------------
// Hooks

void apply_anticipation(std::span<double> ydd, std::size_t step, double dt, double gain,
                        double window, std::span<const std::size_t> dims) {
  if (!(static_cast<double>(step) * dt < window)) return;
  for (std::size_t d : dims) ydd[d] = -gain * ydd[d];
}

void apply_follow_through(std::span<double> ydd, double gain,
                          std::span<const Coupling> couplings) {
  // Sources are read from an unmodified copy so coupling order does not matter.
  std::vector<double> source(ydd.begin(), ydd.end());
  for (const Coupling& c : couplings) {
    ydd[c.target] -= static_cast<double>(c.delta) * gain * source[c.source];
  }
}

void apply_secondary_action(std::span<double> y, std::span<const double> yd, double gain,
                            std::span<const Coupling> couplings) {
  for (const Coupling& c : couplings) {
    y[c.target] += static_cast<double>(c.delta) * gain * yd[c.source];
  }
}

// ---------------------------------------------------------------------------
// Rollout

namespace {

PhaseFunction resolve_phase(const DmpModel& model, std::optional<PhaseFunction> phase) {
  const std::size_t nominal = model.nominal_steps();
  if (!phase) return PhaseFunction::linear(nominal);
  if (phase->total_steps() != nominal) {
    throw ValidationError(mismatch("rollout: phase function steps", phase->total_steps(), nominal));
  }
  return *std::move(phase);
}

void check_couplings(const std::vector<Coupling>& couplings, std::size_t dims) {
  for (const Coupling& c : couplings) {
    if (c.source >= dims || c.target >= dims || c.source == c.target ||
        (c.delta != 1 && c.delta != -1)) {
      throw ValidationError("rollout: invalid coupling");
    }
  }
}

}  // namespace

Rollout::Rollout(const DmpModel& model, RolloutOptions options, StepHooks hooks)
    : model_(model),
      hooks_(std::move(hooks)),
      phase_(resolve_phase(model, std::move(options.phase))),
      nominal_steps_(phase_.total_steps()),
      record_forcing_(options.record_forcing) {
  model_.validate();
  const std::size_t dims = model_.dims();
  for (std::size_t d : hooks_.anticipation_dims) {
    if (d >= dims) throw ValidationError("rollout: anticipation dimension out of range");
  }
  check_couplings(hooks_.follow, dims);
  check_couplings(hooks_.secondary, dims);

  const std::size_t settle = options.settle_steps.value_or(
      static_cast<std::size_t>(std::round(0.5 * model_.tau / model_.dt)));
  total_rows_ = nominal_steps_ + settle + 1;
  if (total_rows_ > options.max_steps) {
    throw ValidationError("rollout: " + std::to_string(total_rows_) + " rows exceed the limit of " +
                          std::to_string(options.max_steps));
  }

  goal_ = model_.goal;
  state_.y = options.initial_position.value_or(model_.start);
  if (static_cast<std::size_t>(state_.y.size()) != dims) {
    throw ValidationError(mismatch("rollout: initial position size", state_.y.size(), dims));
  }
  state_.yd = Vector::Zero(static_cast<Eigen::Index>(dims));
  state_.ydd = Vector::Zero(static_cast<Eigen::Index>(dims));
  state_.x = phase_(0);

  activations_.resize(model_.basis.size());
  force_.resize(dims);
  const auto rows = static_cast<Eigen::Index>(total_rows_);
  const auto cols = static_cast<Eigen::Index>(dims);
  out_.dt = model_.dt;
  out_.dim_names = model_.dim_names;
  out_.positions.resize(rows, cols);
  out_.velocities.resize(rows, cols);
  out_.accelerations.resize(rows, cols);
  out_.phase.resize(rows);
  if (record_forcing_) out_.forcing.resize(rows, cols);
}

void Rollout::set_goal(const Vector& goal) {
  if (static_cast<std::size_t>(goal.size()) != model_.dims()) {
    throw ValidationError(mismatch("set_goal: goal size", goal.size(), model_.dims()));
  }
  if (!goal.allFinite()) throw ValidationError("set_goal: goal must be finite");
  goal_ = goal;
}

void Rollout::step() {
  if (done()) return;
  const std::size_t n = next_row_;
  const std::size_t dims = model_.dims();
  const double x = n <= nominal_steps_ ? phase_(n) : 0.0;
  const double tau2 = model_.tau * model_.tau;
  const double alpha = model_.alpha;
  const double beta = model_.beta;

  forcing(model_, x, activations_, force_);
  for (double& f : force_) f *= hooks_.forcing_scale;

  double* ydd = state_.ydd.data();
  const double* y = state_.y.data();
  const double* yd = state_.yd.data();
  for (std::size_t d = 0; d < dims; ++d) {
    ydd[d] = (alpha * (beta * (goal_[static_cast<Eigen::Index>(d)] - y[d]) - model_.tau * yd[d]) +
              force_[d]) /
             tau2;
  }
  const std::span<double> ydd_span(ydd, dims);
  if (hooks_.anticipation_active()) {
    apply_anticipation(ydd_span, n, model_.dt, hooks_.anticipation_gain,
                       hooks_.anticipation_window, hooks_.anticipation_dims);
  }
  if (hooks_.follow_active()) apply_follow_through(ydd_span, hooks_.follow_gain, hooks_.follow);

  for (std::size_t d = 0; d < dims; ++d) {
    if (!std::isfinite(ydd[d]) || !std::isfinite(y[d]) || !std::isfinite(yd[d])) {
      std::ostringstream os;
      os << "rollout: non-finite state at step " << n << ", dimension " << d;
      throw NumericError(os.str(), n, d);
    }
  }

  const auto row = static_cast<Eigen::Index>(n);
  out_.positions.row(row) = state_.y.transpose();
  if (hooks_.secondary_active()) {
    apply_secondary_action(std::span<double>(out_.positions.row(row).data(), dims),
                           std::span<const double>(yd, dims), hooks_.secondary_gain,
                           hooks_.secondary);
  }
  out_.velocities.row(row) = state_.yd.transpose();
  out_.accelerations.row(row) = state_.ydd.transpose();
  out_.phase(row) = x;
  if (record_forcing_) {
    for (std::size_t d = 0; d < dims; ++d) out_.forcing(row, static_cast<Eigen::Index>(d)) = force_[d];
  }

  state_.x = x;
  ++next_row_;
  state_.step = next_row_;
  if (!done()) {
    const double dt = model_.dt;
    for (std::size_t d = 0; d < dims; ++d) {
      state_.yd[static_cast<Eigen::Index>(d)] += ydd[d] * dt;
      state_.y[static_cast<Eigen::Index>(d)] += state_.yd[static_cast<Eigen::Index>(d)] * dt;
    }
    state_.x = next_row_ <= nominal_steps_ ? phase_(next_row_) : 0.0;
  }
}

Trajectory Rollout::finish() {
  while (!done()) step();
  return std::move(out_);
}

Trajectory rollout(const DmpModel& model, const RolloutOptions& options, const StepHooks& hooks) {
  return Rollout(model, options, hooks).finish();
}

// ---------------------------------------------------------------------------
// Diagnostics

double reconstruction_rmse(const DmpModel& model, const Demonstration& demo) {
  if (model.dims() != demo.dims()) {
    throw ValidationError(mismatch("reconstruction: dimensions", model.dims(), demo.dims()));
  }
  RolloutOptions options;
  options.settle_steps = 0;
  const Trajectory traj = rollout(model, options);
  const Matrix& ref = demo.positions();
  const std::size_t rows = traj.steps();
  const std::size_t samples = demo.steps();
  double sum = 0.0;
  for (std::size_t t = 0; t < samples; ++t) {
    const double s = static_cast<double>(t) / static_cast<double>(samples - 1) *
                     static_cast<double>(rows - 1);
    const auto lo = static_cast<Eigen::Index>(std::min(std::floor(s), static_cast<double>(rows - 1)));
    const auto hi = std::min<Eigen::Index>(lo + 1, static_cast<Eigen::Index>(rows - 1));
    const double frac = s - static_cast<double>(lo);
    for (std::size_t d = 0; d < demo.dims(); ++d) {
      const auto di = static_cast<Eigen::Index>(d);
      const double value = (1.0 - frac) * traj.positions(lo, di) + frac * traj.positions(hi, di);
      const double err = value - ref(static_cast<Eigen::Index>(t), di);
      sum += err * err;
    }
  }
  return std::sqrt(sum / static_cast<double>(samples * demo.dims()));
}

double motion_range(const Demonstration& demo) {
  const Matrix& p = demo.positions();
  return (p.colwise().maxCoeff() - p.colwise().minCoeff()).maxCoeff();
}

}  // namespace dmpanim
