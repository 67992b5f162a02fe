#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "symap/error.hpp"
#include "symap/rng.hpp"

namespace symap {

// A single revolute joint.  The joint rotates about `axis` (expressed in the
// frame of the link it is mounted on) and carries link `index` along the
// rotated local +x direction.  parent_link == -1 mounts the joint at the
// base origin.
struct JointSpec {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double lower = -3.141592653589793;
  double upper = 3.141592653589793;
  int parent_link = -1;
};

// A named point of interest: the tip of one link.
struct Keypoint {
  std::string name;
  int link = 0;
};

// A contiguous run of joints [first_joint, last_joint] where each joint after
// the first is mounted on the link of the joint before it.  The chain's tool
// point is the tip of link `last_joint`.
struct ChainDef {
  std::string name;
  int first_joint = 0;
  int last_joint = 0;

  int dof() const { return last_joint - first_joint + 1; }
};

enum class FeatureEncoding { joint_angles, cartesian_keypoints };

inline const char* to_string(FeatureEncoding e) {
  return e == FeatureEncoding::joint_angles ? "joint_angles"
                                            : "cartesian_keypoints";
}

inline FeatureEncoding feature_encoding_from_string(const std::string& s) {
  if (s == "joint_angles") return FeatureEncoding::joint_angles;
  if (s == "cartesian_keypoints") return FeatureEncoding::cartesian_keypoints;
  throw ValidationError("unknown feature encoding: '" + s + "'");
}

struct Pose {
  Eigen::VectorXd angles;

  Pose() = default;
  explicit Pose(Eigen::VectorXd a) : angles(std::move(a)) {}
  static Pose zero(int dof) { return Pose(Eigen::VectorXd::Zero(dof)); }
};

// Kinematic description of one agent.  All lengths are metres, all angles
// radians, and every agent lives in its own base frame with the first joints
// mounted at the origin; no cross-agent rescaling happens here.
struct AgentModel {
  std::string name;
  std::vector<JointSpec> joints;
  std::vector<double> link_lengths;  // link i follows joint i
  std::vector<Keypoint> keypoints;
  std::vector<ChainDef> chains;
  double sensor_noise_sigma = 0.0;
  FeatureEncoding feature_encoding = FeatureEncoding::joint_angles;
  double total_length_override = 0.0;  // 0 -> derive from the kinematic tree

  int dof() const { return static_cast<int>(joints.size()); }

  int keypoint_index(const std::string& kp_name) const {
    for (std::size_t i = 0; i < keypoints.size(); ++i)
      if (keypoints[i].name == kp_name) return static_cast<int>(i);
    throw ValidationError("agent '" + name + "' has no keypoint '" + kp_name +
                          "'");
  }

  const ChainDef& chain(const std::string& chain_name) const {
    for (const auto& c : chains)
      if (c.name == chain_name) return c;
    throw ValidationError("agent '" + name + "' has no chain '" + chain_name +
                          "'");
  }

  // Sum of link lengths from the base to the tip of `link`.
  double path_length(int link) const {
    double total = 0.0;
    for (int l = link; l >= 0; l = joints[static_cast<std::size_t>(l)].parent_link)
      total += link_lengths[static_cast<std::size_t>(l)];
    return total;
  }

  // Characteristic size: the longest base-to-tip path, unless overridden.
  double total_length() const {
    if (total_length_override > 0.0) return total_length_override;
    double best = 0.0;
    for (int l = 0; l < dof(); ++l) best = std::max(best, path_length(l));
    return best;
  }

  int feature_width() const {
    return feature_encoding == FeatureEncoding::joint_angles
               ? dof()
               : 3 * static_cast<int>(keypoints.size());
  }

  void validate() const {
    detail::require(!name.empty(), "agent name must not be empty");
    detail::require(!joints.empty(), "agent '" + name + "' has no joints");
    detail::require(link_lengths.size() == joints.size(),
                    "agent '" + name + "': one link length per joint required");
    for (std::size_t i = 0; i < joints.size(); ++i) {
      const auto& j = joints[i];
      detail::require(std::abs(j.axis.norm() - 1.0) < 1e-6,
                      "agent '" + name + "': joint axis must be unit length");
      detail::require(j.lower < j.upper,
                      "agent '" + name + "': joint limits must satisfy lower < upper");
      detail::require(std::isfinite(j.lower) && std::isfinite(j.upper),
                      "agent '" + name + "': joint limits must be finite");
      detail::require(j.parent_link >= -1 && j.parent_link < static_cast<int>(i),
                      "agent '" + name + "': parent link must precede the joint");
      detail::require(link_lengths[i] >= 0.0,
                      "agent '" + name + "': link lengths must be nonnegative");
    }
    detail::require(total_length() > 0.0,
                    "agent '" + name + "' has zero total length");
    detail::require(!keypoints.empty(), "agent '" + name + "' has no keypoints");
    for (std::size_t i = 0; i < keypoints.size(); ++i) {
      const auto& kp = keypoints[i];
      detail::require(!kp.name.empty(), "keypoint names must not be empty");
      detail::require(kp.link >= 0 && kp.link < dof(),
                      "agent '" + name + "': keypoint '" + kp.name +
                          "' references a missing link");
      for (std::size_t k = 0; k < i; ++k)
        detail::require(keypoints[k].name != kp.name,
                        "agent '" + name + "': duplicate keypoint '" + kp.name + "'");
    }
    for (std::size_t i = 0; i < chains.size(); ++i) {
      const auto& c = chains[i];
      detail::require(!c.name.empty(), "chain names must not be empty");
      detail::require(c.first_joint >= 0 && c.last_joint < dof() &&
                          c.first_joint <= c.last_joint,
                      "agent '" + name + "': chain '" + c.name +
                          "' has a bad joint range");
      for (int j = c.first_joint + 1; j <= c.last_joint; ++j)
        detail::require(joints[static_cast<std::size_t>(j)].parent_link == j - 1,
                        "agent '" + name + "': chain '" + c.name +
                            "' is not a connected run of joints");
      for (std::size_t k = 0; k < i; ++k)
        detail::require(chains[k].name != c.name,
                        "agent '" + name + "': duplicate chain '" + c.name + "'");
    }
    detail::require(sensor_noise_sigma >= 0.0,
                    "agent '" + name + "': sensor noise must be nonnegative");
  }
};

// World-frame poses of every joint and link for one configuration.
struct FrameSet {
  std::vector<Eigen::Matrix3d> rotation;    // link i frame
  std::vector<Eigen::Vector3d> origin;      // joint i position
  std::vector<Eigen::Vector3d> tip;         // tip of link i
  std::vector<Eigen::Vector3d> world_axis;  // joint i rotation axis
};

inline FrameSet compute_frames(const AgentModel& agent, const Pose& pose) {
  detail::require(pose.angles.size() == agent.dof(),
                  "pose width does not match agent '" + agent.name + "'");
  const int n = agent.dof();
  FrameSet f;
  f.rotation.resize(static_cast<std::size_t>(n));
  f.origin.resize(static_cast<std::size_t>(n));
  f.tip.resize(static_cast<std::size_t>(n));
  f.world_axis.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const JointSpec& joint = agent.joints[idx];
    Eigen::Matrix3d parent_rot = Eigen::Matrix3d::Identity();
    Eigen::Vector3d mount = Eigen::Vector3d::Zero();
    if (joint.parent_link >= 0) {
      const auto p = static_cast<std::size_t>(joint.parent_link);
      parent_rot = f.rotation[p];
      mount = f.tip[p];
    }
    f.world_axis[idx] = parent_rot * joint.axis;
    f.origin[idx] = mount;
    f.rotation[idx] =
        parent_rot *
        Eigen::AngleAxisd(pose.angles[i], joint.axis).toRotationMatrix();
    f.tip[idx] = mount + f.rotation[idx].col(0) * agent.link_lengths[idx];
  }
  return f;
}

// Keypoint positions in declared keypoint order.
inline std::vector<Eigen::Vector3d> forward_kinematics(const AgentModel& agent,
                                                       const Pose& pose) {
  const FrameSet f = compute_frames(agent, pose);
  std::vector<Eigen::Vector3d> out;
  out.reserve(agent.keypoints.size());
  for (const auto& kp : agent.keypoints)
    out.push_back(f.tip[static_cast<std::size_t>(kp.link)]);
  return out;
}

namespace detail {

// true for every joint on the base-to-`link` path.
inline std::vector<bool> ancestor_mask(const AgentModel& agent, int link) {
  std::vector<bool> mask(static_cast<std::size_t>(agent.dof()), false);
  for (int l = link; l >= 0; l = agent.joints[static_cast<std::size_t>(l)].parent_link)
    mask[static_cast<std::size_t>(l)] = true;
  return mask;
}

}  // namespace detail

// Positional Jacobian of `point` with respect to all joints; columns for
// joints that do not move the point are zero.
inline Eigen::MatrixXd point_jacobian(const AgentModel& agent,
                                      const FrameSet& frames, int link,
                                      const Eigen::Vector3d& point) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3, agent.dof());
  const std::vector<bool> on_path = detail::ancestor_mask(agent, link);
  for (int j = 0; j < agent.dof(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    if (!on_path[idx]) continue;
    jac.col(j) = frames.world_axis[idx].cross(point - frames.origin[idx]);
  }
  return jac;
}

// 3 x dof(chain) positional Jacobian of the chain's tool point, taken with
// respect to the chain's own joints only.
inline Eigen::MatrixXd jacobian(const AgentModel& agent, const Pose& pose,
                                const std::string& chain_name) {
  const ChainDef& chain = agent.chain(chain_name);
  const FrameSet f = compute_frames(agent, pose);
  const Eigen::Vector3d tool = f.tip[static_cast<std::size_t>(chain.last_joint)];
  Eigen::MatrixXd jac(3, chain.dof());
  for (int j = chain.first_joint; j <= chain.last_joint; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    jac.col(j - chain.first_joint) =
        f.world_axis[idx].cross(tool - f.origin[idx]);
  }
  return jac;
}

// Yoshikawa's manipulability measure, the volume of the velocity ellipsoid.
// Taking the Gram determinant on the smaller side of J keeps the measure
// meaningful for chains with fewer than three joints, where det(J J^T) is
// identically zero; on the smaller side it equals the product of the
// nonzero singular values.  Tiny negative determinants from rounding clamp
// to zero.
inline double manipulability_of_jacobian(const Eigen::MatrixXd& jac) {
  double det = 0.0;
  if (jac.cols() >= jac.rows())
    det = (jac * jac.transpose()).determinant();
  else
    det = (jac.transpose() * jac).determinant();
  return det > 0.0 ? std::sqrt(det) : 0.0;
}

inline double manipulability(const AgentModel& agent, const Pose& pose,
                             const std::string& chain_name) {
  return manipulability_of_jacobian(jacobian(agent, pose, chain_name));
}

inline Pose random_pose(const AgentModel& agent, Rng& rng) {
  Eigen::VectorXd angles(agent.dof());
  for (int j = 0; j < agent.dof(); ++j) {
    const auto& spec = agent.joints[static_cast<std::size_t>(j)];
    angles[j] = rng.uniform(spec.lower, spec.upper);
  }
  return Pose(std::move(angles));
}

// ---------------------------------------------------------------------------
// Reachable-workspace occupancy grid.

struct GridSpec {
  double cell_size = 0.0;    // 0 -> agent.total_length() / 20
  double half_extent = 0.0;  // 0 -> snapped to the sampled chain's reach
};

// Axis-aligned lattice anchored at the world origin: a point p occupies the
// integer cell floor(p / cell_size) per axis.  Each occupied cell stores the
// best manipulability observed there.  std::map keeps iteration order (and
// therefore every sum computed over cells) deterministic.
struct WorkspaceGrid {
  std::string agent;
  std::string chain;
  double cell_size = 0.0;
  int half_cells = 0;  // bounds are [-half_cells, half_cells) cells per axis
  long long samples = 0;
  std::uint64_t seed = 0;
  std::map<std::array<int, 3>, double> cells;

  std::array<int, 3> cell_of(const Eigen::Vector3d& p) const {
    return {static_cast<int>(std::floor(p.x() / cell_size)),
            static_cast<int>(std::floor(p.y() / cell_size)),
            static_cast<int>(std::floor(p.z() / cell_size))};
  }

  bool in_bounds(const std::array<int, 3>& c) const {
    for (const int v : c)
      if (v < -half_cells || v >= half_cells) return false;
    return true;
  }

  bool compatible_with(const WorkspaceGrid& other) const {
    return cell_size == other.cell_size && half_cells == other.half_cells;
  }

  // Diagonal of the bounding box of occupied cells; a workspace-scale
  // length used to express errors relative to the usable volume.
  double occupied_diameter() const {
    if (cells.empty()) return 0.0;
    std::array<int, 3> lo{INT32_MAX, INT32_MAX, INT32_MAX};
    std::array<int, 3> hi{INT32_MIN, INT32_MIN, INT32_MIN};
    for (const auto& [c, m] : cells) {
      for (int a = 0; a < 3; ++a) {
        lo[static_cast<std::size_t>(a)] = std::min(lo[static_cast<std::size_t>(a)], c[static_cast<std::size_t>(a)]);
        hi[static_cast<std::size_t>(a)] = std::max(hi[static_cast<std::size_t>(a)], c[static_cast<std::size_t>(a)]);
      }
    }
    Eigen::Vector3d extent;
    for (int a = 0; a < 3; ++a)
      extent[a] = cell_size * (hi[static_cast<std::size_t>(a)] + 1 - lo[static_cast<std::size_t>(a)]);
    return extent.norm();
  }

  void validate() const {
    detail::require(cell_size > 0.0, "grid cell size must be positive");
    detail::require(half_cells > 0, "grid must span at least one cell");
    for (const auto& [c, m] : cells) {
      detail::require(in_bounds(c), "grid cell outside declared bounds");
      detail::require(m >= 0.0 && std::isfinite(m),
                      "cell manipulability must be finite and nonnegative");
    }
  }
};

// Monte-Carlo occupancy of the chain's tool point over uniformly sampled
// joint configurations (all of the agent's joints move, so posture joints
// upstream of the chain widen the picture realistically).
inline WorkspaceGrid sample_workspace(const AgentModel& agent,
                                      const std::string& chain_name,
                                      long long n_samples, GridSpec spec,
                                      std::uint64_t seed) {
  agent.validate();
  const ChainDef& chain = agent.chain(chain_name);
  detail::require(n_samples > 0, "workspace sampling needs at least one sample");

  WorkspaceGrid grid;
  grid.agent = agent.name;
  grid.chain = chain_name;
  grid.seed = seed;
  grid.cell_size =
      spec.cell_size > 0.0 ? spec.cell_size : agent.total_length() / 20.0;

  const double reach =
      spec.half_extent > 0.0 ? spec.half_extent : agent.path_length(chain.last_joint);
  grid.half_cells = static_cast<int>(std::floor(reach / grid.cell_size)) + 1;

  Rng rng(seed);
  const auto tool_link = static_cast<std::size_t>(chain.last_joint);
  for (long long s = 0; s < n_samples; ++s) {
    const Pose pose = random_pose(agent, rng);
    const FrameSet f = compute_frames(agent, pose);
    const Eigen::Vector3d tool = f.tip[tool_link];
    const auto cell = grid.cell_of(tool);
    if (!grid.in_bounds(cell)) continue;  // only when explicit bounds cut off
    Eigen::MatrixXd jac(3, chain.dof());
    for (int j = chain.first_joint; j <= chain.last_joint; ++j) {
      const auto idx = static_cast<std::size_t>(j);
      jac.col(j - chain.first_joint) =
          f.world_axis[idx].cross(tool - f.origin[idx]);
    }
    const double m = manipulability_of_jacobian(jac);
    auto [it, inserted] = grid.cells.try_emplace(cell, m);
    if (!inserted && m > it->second) it->second = m;
    ++grid.samples;
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Feature encoding: the vector a mapping network consumes or produces.

inline Eigen::VectorXd feature_vector(const AgentModel& agent,
                                      const Pose& pose) {
  if (agent.feature_encoding == FeatureEncoding::joint_angles)
    return pose.angles;
  const auto kps = forward_kinematics(agent, pose);
  Eigen::VectorXd out(3 * static_cast<int>(kps.size()));
  for (std::size_t i = 0; i < kps.size(); ++i)
    out.segment<3>(3 * static_cast<Eigen::Index>(i)) = kps[i];
  return out;
}

// Keypoint positions implied by a feature vector: a reshape for cartesian
// features, a forward-kinematics pass for joint-angle features.
inline std::vector<Eigen::Vector3d> keypoints_from_features(
    const AgentModel& agent, const Eigen::VectorXd& features) {
  detail::require(features.size() == agent.feature_width(),
                  "feature width does not match agent '" + agent.name + "'");
  if (agent.feature_encoding == FeatureEncoding::joint_angles)
    return forward_kinematics(agent, Pose(features));
  std::vector<Eigen::Vector3d> out(agent.keypoints.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = features.segment<3>(3 * static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace symap
