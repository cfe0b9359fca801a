#pragma once

#include "dmpanim/dmp.hpp"
#include "dmpanim/error.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dmpanim {

struct JointInfo {
  std::string name;
  /// Empty for a root joint.
  std::optional<std::string> parent;
  /// Unit rotation axis in the parent frame.
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  /// Trajectory column driven by this joint.
  std::size_t dim_index = 0;
  std::optional<std::pair<double, double>> limits;
  /// Fixed roll-pitch-yaw (radians) of the joint frame relative to the parent
  /// at the zero pose.
  Eigen::Vector3d rpy = Eigen::Vector3d::Zero();
};

/// A forest of revolute joints with a static zero-pose description.
class RobotConfig {
 public:
  static constexpr double kDefaultAxisThresholdDeg = 10.0;

  /// Throws ValidationError on duplicate names or dimension indices, unknown
  /// or cyclic parents, non-unit axes, or a threshold outside (0, 90).
  explicit RobotConfig(std::vector<JointInfo> joints,
                       double axis_threshold_deg = kDefaultAxisThresholdDeg);

  const std::vector<JointInfo>& joints() const noexcept { return joints_; }
  double axis_threshold_deg() const noexcept { return threshold_deg_; }
  RobotConfig with_threshold(double axis_threshold_deg) const;

  /// Joint index driving a trajectory dimension, if any.
  std::optional<std::size_t> joint_for_dim(std::size_t dim) const;

  /// Parent joint index, if any.
  std::optional<std::size_t> parent_of(std::size_t joint) const { return parents_[joint]; }

  /// True when `ancestor` lies strictly above `joint` in the same chain.
  bool is_strict_ancestor(std::size_t ancestor, std::size_t joint) const;

  /// Rotation axis expressed in the root frame at the zero pose.
  const Eigen::Vector3d& root_axis(std::size_t joint) const { return root_axes_[joint]; }

  /// Number of trajectory dimensions covered (max dim_index + 1).
  std::size_t dims() const noexcept { return dims_; }

 private:
  std::vector<JointInfo> joints_;
  double threshold_deg_;
  std::vector<std::optional<std::size_t>> parents_;
  std::vector<Eigen::Vector3d> root_axes_;
  std::size_t dims_ = 0;
};

/// A failed coupling rule. `rule` is a stable machine-readable name
/// ("chain", "axis-alignment", "distinct-dimensions", "requires-robot").
struct Violation {
  std::string rule;
  std::string message;
  /// Optional advice, e.g. intermediate joints that could be re-posed.
  std::string hint;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct CouplingReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Raised when modulation couplings fail validation; carries every violation.
class CouplingError : public ValidationError {
 public:
  explicit CouplingError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Angle in degrees between two unit axes.
double axis_angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

/// Follow-through needs the source strictly above the target in one chain and
/// rotation axes aligned within the robot's threshold. Throws ValidationError
/// for a dimension with no joint.
CouplingReport validate_follow_coupling(const RobotConfig& robot, const Coupling& coupling);

/// Secondary action only requires valid, distinct indices. Throws
/// ValidationError for an index outside [0, dims).
CouplingReport validate_secondary_coupling(std::size_t dims, const Coupling& coupling);
CouplingReport validate_secondary_coupling(const RobotConfig& robot, const Coupling& coupling);

}  // namespace dmpanim
