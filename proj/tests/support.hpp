#pragma once

// Shared helpers for the test suite, including independent reference
// implementations ("oracles") that deliberately avoid the code paths under
// test.

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "symap/kinematics.hpp"
#include "symap/rng.hpp"

namespace testsupport {

// Rotation about an arbitrary unit axis, written out via the Rodrigues
// formula rather than Eigen::AngleAxis.
inline Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix3d k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return c * Eigen::Matrix3d::Identity() + s * k +
         (1.0 - c) * (axis * axis.transpose());
}

// Reference forward kinematics built from homogeneous transforms: the frame
// of link i is F(parent) * Translate(parent length * x) * Rotate(axis, angle).
inline std::vector<Eigen::Matrix4d, Eigen::aligned_allocator<Eigen::Matrix4d>>
reference_frames(const symap::AgentModel& agent, const symap::Pose& pose) {
  std::vector<Eigen::Matrix4d, Eigen::aligned_allocator<Eigen::Matrix4d>> frames;
  for (int i = 0; i < agent.dof(); ++i) {
    const auto& joint = agent.joints[static_cast<std::size_t>(i)];
    Eigen::Matrix4d base = Eigen::Matrix4d::Identity();
    if (joint.parent_link >= 0) {
      base = frames[static_cast<std::size_t>(joint.parent_link)];
      Eigen::Matrix4d shift = Eigen::Matrix4d::Identity();
      shift(0, 3) = agent.link_lengths[static_cast<std::size_t>(joint.parent_link)];
      base = base * shift;
    }
    Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();
    rot.topLeftCorner<3, 3>() = rodrigues(joint.axis, pose.angles[i]);
    frames.push_back(base * rot);
  }
  return frames;
}

inline Eigen::Vector3d reference_tip(const symap::AgentModel& agent,
                                     const symap::Pose& pose, int link) {
  const auto frames = reference_frames(agent, pose);
  const Eigen::Vector4d local(agent.link_lengths[static_cast<std::size_t>(link)],
                              0.0, 0.0, 1.0);
  return (frames[static_cast<std::size_t>(link)] * local).head<3>();
}

// Central finite differences of a keypoint position.
inline Eigen::MatrixXd fd_jacobian(const symap::AgentModel& agent,
                                   const symap::Pose& pose, int link,
                                   double h = 1e-6) {
  Eigen::MatrixXd jac(3, agent.dof());
  for (int j = 0; j < agent.dof(); ++j) {
    symap::Pose plus = pose, minus = pose;
    plus.angles[j] += h;
    minus.angles[j] -= h;
    jac.col(j) = (reference_tip(agent, plus, link) -
                  reference_tip(agent, minus, link)) /
                 (2.0 * h);
  }
  return jac;
}

inline Eigen::Vector3d random_unit(symap::Rng& rng) {
  while (true) {
    const Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
    if (v.norm() > 1e-3) return v.normalized();
  }
}

// A single connected run of joints (0 -> 1 -> ... -> n-1): every joint chain
// definition is valid on it.
inline symap::AgentModel random_chain_agent(symap::Rng& rng, int n_joints) {
  symap::AgentModel a;
  a.name = "chain";
  a.feature_encoding = symap::FeatureEncoding::joint_angles;
  a.sensor_noise_sigma = 0.01;
  for (int i = 0; i < n_joints; ++i) {
    symap::JointSpec j;
    j.axis = random_unit(rng);
    j.lower = -rng.uniform(0.5, 2.5);
    j.upper = rng.uniform(0.5, 2.5);
    j.parent_link = i - 1;
    a.joints.push_back(j);
    a.link_lengths.push_back(rng.uniform(0.05, 0.5));
  }
  a.keypoints.push_back({"tip", n_joints - 1});
  a.chains.push_back({"all", 0, n_joints - 1});
  a.validate();
  return a;
}

// A random branching tree with keypoints at the leaves.
inline symap::AgentModel random_tree_agent(symap::Rng& rng, int n_joints) {
  symap::AgentModel a;
  a.name = "tree";
  a.feature_encoding = symap::FeatureEncoding::cartesian_keypoints;
  a.sensor_noise_sigma = 0.01;
  std::vector<bool> has_child(static_cast<std::size_t>(n_joints), false);
  for (int i = 0; i < n_joints; ++i) {
    symap::JointSpec j;
    j.axis = random_unit(rng);
    j.lower = -rng.uniform(0.5, 2.5);
    j.upper = rng.uniform(0.5, 2.5);
    j.parent_link = i == 0 ? -1 : static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1))) - 1;
    if (j.parent_link >= 0) has_child[static_cast<std::size_t>(j.parent_link)] = true;
    a.joints.push_back(j);
    a.link_lengths.push_back(rng.uniform(0.05, 0.5));
  }
  for (int i = 0; i < n_joints; ++i)
    if (!has_child[static_cast<std::size_t>(i)])
      a.keypoints.push_back({"kp" + std::to_string(i), i});
  a.validate();
  return a;
}

}  // namespace testsupport
