#include "dmpanim/kinematics.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace dmpanim {
namespace {

Eigen::Matrix3d rpy_rotation(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

std::string summarize(const std::vector<Violation>& violations) {
  std::ostringstream os;
  os << "coupling validation failed:";
  for (const Violation& v : violations) os << " [" << v.rule << "] " << v.message << ";";
  return os.str();
}

}  // namespace

CouplingError::CouplingError(std::vector<Violation> violations)
    : ValidationError(summarize(violations)), violations_(std::move(violations)) {}

RobotConfig::RobotConfig(std::vector<JointInfo> joints, double axis_threshold_deg)
    : joints_(std::move(joints)), threshold_deg_(axis_threshold_deg) {
  if (!(threshold_deg_ > 0.0 && threshold_deg_ < 90.0)) {
    throw ValidationError("robot: axis_threshold must lie in (0, 90) degrees");
  }
  if (joints_.empty()) throw ValidationError("robot: at least one joint required");

  std::unordered_map<std::string, std::size_t> by_name;
  std::unordered_map<std::size_t, std::size_t> by_dim;
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    const JointInfo& joint = joints_[j];
    if (joint.name.empty()) throw ValidationError("robot: joint names must be non-empty");
    if (!by_name.emplace(joint.name, j).second) {
      throw ValidationError("robot: duplicate joint name '" + joint.name + "'");
    }
    if (!by_dim.emplace(joint.dim_index, j).second) {
      throw ValidationError("robot: duplicate dim_index " + std::to_string(joint.dim_index));
    }
    if (!joint.axis.allFinite() || std::abs(joint.axis.norm() - 1.0) > 1e-9) {
      throw ValidationError("robot: axis of '" + joint.name + "' must be a unit vector");
    }
    if (!joint.rpy.allFinite()) throw ValidationError("robot: rpy of '" + joint.name + "' must be finite");
    if (joint.limits && !(joint.limits->first <= joint.limits->second)) {
      throw ValidationError("robot: limits of '" + joint.name + "' must satisfy min <= max");
    }
    dims_ = std::max(dims_, joint.dim_index + 1);
  }

  parents_.resize(joints_.size());
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    if (!joints_[j].parent) continue;
    const auto it = by_name.find(*joints_[j].parent);
    if (it == by_name.end()) {
      throw ValidationError("robot: unknown parent '" + *joints_[j].parent + "' of '" +
                            joints_[j].name + "'");
    }
    parents_[j] = it->second;
  }

  // Cycle check: every upward walk must terminate within joints_.size() hops.
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    std::size_t hops = 0;
    for (auto p = parents_[j]; p; p = parents_[*p]) {
      if (++hops > joints_.size()) {
        throw ValidationError("robot: parent references form a cycle at '" + joints_[j].name + "'");
      }
    }
  }

  // Zero-pose orientation of each joint frame in the root frame.
  std::vector<std::optional<Eigen::Matrix3d>> frames(joints_.size());
  const auto frame_of = [&](auto&& self, std::size_t j) -> const Eigen::Matrix3d& {
    if (!frames[j]) {
      const Eigen::Matrix3d local = rpy_rotation(joints_[j].rpy);
      frames[j] = parents_[j] ? Eigen::Matrix3d(self(self, *parents_[j]) * local) : local;
    }
    return *frames[j];
  };
  root_axes_.resize(joints_.size());
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    const Eigen::Matrix3d parent_frame =
        parents_[j] ? frame_of(frame_of, *parents_[j]) : Eigen::Matrix3d::Identity();
    root_axes_[j] = (parent_frame * joints_[j].axis).normalized();
  }
}

RobotConfig RobotConfig::with_threshold(double axis_threshold_deg) const {
  return RobotConfig(joints_, axis_threshold_deg);
}

std::optional<std::size_t> RobotConfig::joint_for_dim(std::size_t dim) const {
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    if (joints_[j].dim_index == dim) return j;
  }
  return std::nullopt;
}

bool RobotConfig::is_strict_ancestor(std::size_t ancestor, std::size_t joint) const {
  for (auto p = parents_[joint]; p; p = parents_[*p]) {
    if (*p == ancestor) return true;
  }
  return false;
}

double axis_angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double c = std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

CouplingReport validate_follow_coupling(const RobotConfig& robot, const Coupling& coupling) {
  const auto source = robot.joint_for_dim(coupling.source);
  const auto target = robot.joint_for_dim(coupling.target);
  if (!source || !target) {
    throw ValidationError("follow-through: dimension " +
                          std::to_string(source ? coupling.target : coupling.source) +
                          " has no joint in the robot config");
  }
  const JointInfo& s = robot.joints()[*source];
  const JointInfo& t = robot.joints()[*target];

  CouplingReport report;
  if (!robot.is_strict_ancestor(*source, *target)) {
    report.violations.push_back(
        {"chain",
         "source '" + s.name + "' is not above target '" + t.name + "' in one kinematic chain",
         ""});
    return report;
  }

  const double angle = axis_angle_deg(robot.root_axis(*source), robot.root_axis(*target));
  if (angle > robot.axis_threshold_deg()) {
    std::ostringstream msg;
    msg << "axes of '" << s.name << "' and '" << t.name << "' differ by " << angle
        << " deg (threshold " << robot.axis_threshold_deg() << " deg)";
    std::string hint;
    std::vector<std::string> between;
    for (auto p = robot.parent_of(*target); p && *p != *source; p = robot.parent_of(*p)) {
      between.push_back(robot.joints()[*p].name);
    }
    if (!between.empty()) {
      hint = "intermediate joints";
      for (auto it = between.rbegin(); it != between.rend(); ++it) hint += " '" + *it + "'";
      hint += " may be re-posed within their limits to align the axes";
    }
    report.violations.push_back({"axis-alignment", msg.str(), hint});
  }
  return report;
}

CouplingReport validate_secondary_coupling(std::size_t dims, const Coupling& coupling) {
  if (coupling.source >= dims || coupling.target >= dims) {
    throw ValidationError("secondary action: coupling index out of range (dims = " +
                          std::to_string(dims) + ")");
  }
  CouplingReport report;
  if (coupling.source == coupling.target) {
    report.violations.push_back({"distinct-dimensions",
                                 "source and target are both dimension " +
                                     std::to_string(coupling.source),
                                 ""});
  }
  return report;
}

CouplingReport validate_secondary_coupling(const RobotConfig& robot, const Coupling& coupling) {
  if (!robot.joint_for_dim(coupling.source) || !robot.joint_for_dim(coupling.target)) {
    throw ValidationError("secondary action: coupling dimension has no joint in the robot config");
  }
  return validate_secondary_coupling(robot.dims(), coupling);
}

}  // namespace dmpanim
