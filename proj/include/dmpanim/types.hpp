#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

namespace dmpanim {

/// Row-major so that a single time step (or a single weight row) is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// A uniformly sampled multi-dimensional position trajectory used for training.
/// Rows are time steps, columns are dimensions.
class Demonstration {
 public:
  /// Throws ValidationError unless rows >= 3, dt > 0 and every value is finite.
  Demonstration(double dt, Matrix positions, std::vector<std::string> dim_names = {});

  double dt() const noexcept { return dt_; }
  const Matrix& positions() const noexcept { return positions_; }
  const std::vector<std::string>& dim_names() const noexcept { return dim_names_; }

  std::size_t steps() const noexcept { return static_cast<std::size_t>(positions_.rows()); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(positions_.cols()); }
  double duration() const noexcept { return static_cast<double>(steps() - 1) * dt_; }

  friend bool operator==(const Demonstration& a, const Demonstration& b);

 private:
  double dt_;
  Matrix positions_;
  std::vector<std::string> dim_names_;
};

/// Generated kinematics. Row n holds the state at time n * dt together with the
/// acceleration applied during that step and the phase it was computed from.
struct Trajectory {
  double dt = 0.0;
  Matrix positions;
  Matrix velocities;
  Matrix accelerations;
  Vector phase;
  std::vector<std::string> dim_names;
  /// Forcing term per step, only filled when requested in RolloutOptions.
  Matrix forcing;

  std::size_t steps() const noexcept { return static_cast<std::size_t>(positions.rows()); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(positions.cols()); }
  double duration() const noexcept {
    return steps() == 0 ? 0.0 : static_cast<double>(steps() - 1) * dt;
  }
};

/// Exact equality including shape; Eigen's own operator== asserts on shape mismatch.
bool same_values(const Matrix& a, const Matrix& b);
bool same_values(const Vector& a, const Vector& b);

/// Bit-level comparison of every recorded quantity.
bool operator==(const Trajectory& a, const Trajectory& b);

}  // namespace dmpanim
