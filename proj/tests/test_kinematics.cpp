#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmpanim/formats.hpp"
#include "dmpanim/kinematics.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace dmpanim;
using Eigen::Vector3d;

namespace {

JointInfo joint(std::string name, std::optional<std::string> parent, Vector3d axis, std::size_t dim) {
  JointInfo j;
  j.name = std::move(name);
  j.parent = std::move(parent);
  j.axis = axis;
  j.dim_index = dim;
  return j;
}

// torso(y) -> shoulder(y) -> elbow(z) -> wrist(y); torso -> head(y)
RobotConfig tree(double threshold = 10.0) {
  return RobotConfig({joint("torso", std::nullopt, Vector3d::UnitY(), 0),
                      joint("shoulder", "torso", Vector3d::UnitY(), 1),
                      joint("elbow", "shoulder", Vector3d::UnitZ(), 2),
                      joint("wrist", "elbow", Vector3d::UnitY(), 3),
                      joint("head", "torso", Vector3d::UnitY(), 4)},
                     threshold);
}

bool has_rule(const CouplingReport& r, const std::string& rule) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.rule == rule; });
}

}  // namespace

TEST_CASE("follow-through chain rule") {
  const RobotConfig robot = tree();
  CHECK(validate_follow_coupling(robot, {0, 1, 1}).ok());
  CHECK(validate_follow_coupling(robot, {0, 3, 1}).ok());  // grandchild, same axis
  CHECK(has_rule(validate_follow_coupling(robot, {1, 0, 1}), "chain"));  // child above parent
  CHECK(has_rule(validate_follow_coupling(robot, {4, 1, 1}), "chain"));  // sibling chains
  CHECK(has_rule(validate_follow_coupling(robot, {1, 1, 1}), "chain"));  // not strict
  CHECK_THROWS_AS(validate_follow_coupling(robot, {0, 9, 1}), ValidationError);
}

TEST_CASE("follow-through axis rule") {
  const RobotConfig robot = tree();
  const CouplingReport r = validate_follow_coupling(robot, {1, 2, 1});
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].rule == "axis-alignment");
  CHECK(r.violations[0].hint.empty());  // direct parent, nothing in between

  SUBCASE("intermediate joints are suggested") {
    RobotConfig bent({joint("a", std::nullopt, Vector3d::UnitZ(), 0),
                      joint("b", "a", Vector3d::UnitX(), 1),
                      joint("c", "b", Vector3d::UnitY(), 2)});
    const CouplingReport rep = validate_follow_coupling(bent, {0, 2, 1});
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].hint.find("'b'") != std::string::npos);
  }
}

TEST_CASE("axes are compared in the root frame") {
  // The middle joint's frame is rolled 90 degrees about x, so the child's z axis
  // (given in that frame) points along -y in the root frame.
  const auto build = [](double roll) {
    JointInfo mid = joint("mid", "root", Vector3d::UnitX(), 1);
    mid.rpy = Vector3d(roll, 0.0, 0.0);
    return RobotConfig({joint("root", std::nullopt, Vector3d::UnitY(), 0), mid,
                        joint("child", "mid", Vector3d::UnitZ(), 2)});
  };
  const RobotConfig rolled = build(M_PI / 2.0);
  CHECK(rolled.root_axis(1).isApprox(Vector3d::UnitX(), 1e-12));  // own rpy does not move it
  CHECK(rolled.root_axis(2).isApprox(-Vector3d::UnitY(), 1e-12));
  CHECK(has_rule(validate_follow_coupling(rolled, {0, 2, 1}), "axis-alignment"));  // 180 degrees

  const RobotConfig aligned = build(-M_PI / 2.0);
  CHECK(aligned.root_axis(2).isApprox(Vector3d::UnitY(), 1e-12));
  CHECK(validate_follow_coupling(aligned, {0, 2, 1}).ok());
  CHECK(has_rule(validate_follow_coupling(build(0.0), {0, 2, 1}), "axis-alignment"));
}

TEST_CASE("threshold monotonicity") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(0.0, 40.0);
  for (int i = 0; i < 200; ++i) {
    const double a = angle(rng) * M_PI / 180.0;
    const RobotConfig robot({joint("p", std::nullopt, Vector3d::UnitZ(), 0),
                             joint("c", "p", Vector3d(std::sin(a), 0.0, std::cos(a)), 1)},
                            5.0);
    bool was_ok = false;
    for (double t : {5.0, 10.0, 20.0, 30.0, 45.0, 89.0}) {
      const bool ok = validate_follow_coupling(robot.with_threshold(t), {0, 1, 1}).ok();
      if (was_ok) CHECK(ok);
      was_ok = ok;
      CHECK(ok == (axis_angle_deg(robot.root_axis(0), robot.root_axis(1)) <= t));
    }
  }
}

TEST_CASE("verdicts are order independent and repeatable") {
  const RobotConfig robot = tree();
  const std::vector<Coupling> couplings{{0, 1, 1}, {1, 2, 1}, {4, 1, 1}, {0, 3, -1}};
  std::vector<bool> first;
  for (const auto& c : couplings) first.push_back(validate_follow_coupling(robot, c).ok());
  std::vector<bool> reversed;
  for (auto it = couplings.rbegin(); it != couplings.rend(); ++it) {
    reversed.insert(reversed.begin(), validate_follow_coupling(robot, *it).ok());
  }
  CHECK(first == reversed);
  CHECK(first == std::vector<bool>{true, false, false, true});
}

TEST_CASE("secondary action rules") {
  const RobotConfig robot = tree();
  CHECK(validate_secondary_coupling(robot, {4, 2, 1}).ok());  // any distinct pair
  CHECK(has_rule(validate_secondary_coupling(robot, {2, 2, 1}), "distinct-dimensions"));
  CHECK_THROWS_AS(validate_secondary_coupling(robot, {0, 5, 1}), ValidationError);
  CHECK(validate_secondary_coupling(3, {0, 2, -1}).ok());
  CHECK_THROWS_AS(validate_secondary_coupling(3, {3, 0, 1}), ValidationError);
}

TEST_CASE("robot config validation") {
  using J = std::vector<JointInfo>;
  CHECK_THROWS_AS(RobotConfig(J{}), ValidationError);
  CHECK_THROWS_AS(RobotConfig(J{joint("a", std::nullopt, Vector3d(1, 1, 0), 0)}), ValidationError);
  CHECK_THROWS_AS(RobotConfig(J{joint("a", std::nullopt, Vector3d::UnitZ(), 0),
                                joint("a", "a", Vector3d::UnitZ(), 1)}),
                  ValidationError);
  CHECK_THROWS_AS(RobotConfig(J{joint("a", std::nullopt, Vector3d::UnitZ(), 0),
                                joint("b", std::nullopt, Vector3d::UnitZ(), 0)}),
                  ValidationError);
  CHECK_THROWS_AS(RobotConfig(J{joint("a", "ghost", Vector3d::UnitZ(), 0)}), ValidationError);
  CHECK_THROWS_AS(RobotConfig(J{joint("a", "b", Vector3d::UnitZ(), 0),
                                joint("b", "a", Vector3d::UnitZ(), 1)}),
                  ValidationError);
  JointInfo limited = joint("a", std::nullopt, Vector3d::UnitZ(), 0);
  limited.limits = std::make_pair(1.0, -1.0);
  CHECK_THROWS_AS(RobotConfig(J{limited}), ValidationError);
  const J ok{joint("a", std::nullopt, Vector3d::UnitZ(), 0)};
  CHECK_THROWS_AS(RobotConfig(ok, 0.0), ValidationError);
  CHECK_THROWS_AS(RobotConfig(ok, 90.0), ValidationError);
  CHECK(RobotConfig(ok).axis_threshold_deg() == 10.0);
  CHECK(tree().dims() == 5);
}

TEST_CASE("shipped robots") {
  const RobotConfig head = io::load_robot(testing::data_dir() / "robots/head_1dof.json");
  CHECK(head.dims() == 1);
  const RobotConfig arm = io::load_robot(testing::data_dir() / "robots/arm_7dof.json");
  CHECK(arm.dims() == 7);
  CHECK(validate_follow_coupling(arm, {1, 3, 1}).ok());  // two y axes, same chain
  CHECK(has_rule(validate_follow_coupling(arm, {0, 1, 1}), "axis-alignment"));
  const RobotConfig pepper = io::load_robot(testing::data_dir() / "robots/humanoid_17dof.json");
  CHECK(pepper.dims() == 17);
  CHECK(validate_follow_coupling(pepper, {1, 4, 1}).ok());  // HipPitch -> HeadPitch
  CHECK(has_rule(validate_follow_coupling(pepper, {11, 5, 1}), "chain"));  // right arm -> left arm
}
