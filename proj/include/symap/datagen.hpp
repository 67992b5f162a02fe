#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "symap/error.hpp"
#include "symap/kinematics.hpp"
#include "symap/rng.hpp"

namespace symap {

// Which follower keypoint imitates which leader keypoint.  `scale` converts
// leader keypoint positions into follower targets; 0 means "derive from the
// agents' size ratio" (follower length / leader length), which keeps the
// imitation proportional when bodies differ in stature.
struct CorrespondencePair {
  std::string leader_keypoint;
  std::string follower_keypoint;
  double weight = 1.0;
};

struct CorrespondenceMap {
  std::vector<CorrespondencePair> pairs;
  double scale = 0.0;

  void validate() const {
    detail::require(!pairs.empty(), "correspondence map has no pairs");
    detail::require(scale >= 0.0, "correspondence scale must be nonnegative");
    for (const auto& p : pairs)
      detail::require(p.weight > 0.0, "correspondence weights must be positive");
  }
};

namespace detail {

struct ResolvedCorrespondence {
  std::vector<std::tuple<int, int, double>> pairs;  // leader kp, follower kp, weight
  double scale = 1.0;
};

inline ResolvedCorrespondence resolve(const CorrespondenceMap& map,
                                      const AgentModel& leader,
                                      const AgentModel& follower) {
  map.validate();
  ResolvedCorrespondence r;
  r.scale = map.scale > 0.0 ? map.scale
                            : follower.total_length() / leader.total_length();
  for (const auto& p : map.pairs)
    r.pairs.emplace_back(leader.keypoint_index(p.leader_keypoint),
                         follower.keypoint_index(p.follower_keypoint),
                         p.weight);
  return r;
}

}  // namespace detail

// Smooth leader trajectory: uniformly sampled waypoints joined by smoothstep
// interpolation, so consecutive samples look like motion rather than white
// noise in joint space.
inline std::vector<Pose> sample_source_motion(const AgentModel& agent,
                                              long long n_samples,
                                              std::uint64_t seed,
                                              int steps_per_segment = 25) {
  agent.validate();
  detail::require(n_samples > 0, "motion sampling needs at least one sample");
  detail::require(steps_per_segment > 0, "steps per segment must be positive");

  Rng rng(seed);
  const long long segments =
      std::max<long long>(1, (n_samples + steps_per_segment - 1) / steps_per_segment);
  std::vector<Eigen::VectorXd> waypoints;
  for (long long w = 0; w <= segments; ++w)
    waypoints.push_back(random_pose(agent, rng).angles);

  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (long long i = 0; i < n_samples; ++i) {
    const double t = n_samples == 1
                         ? 0.0
                         : static_cast<double>(i) * static_cast<double>(segments) /
                               static_cast<double>(n_samples - 1);
    auto k = static_cast<long long>(t);
    if (k >= segments) k = segments - 1;
    const double u = t - static_cast<double>(k);
    const double s = u * u * (3.0 - 2.0 * u);
    out.emplace_back(
        (1.0 - s) * waypoints[static_cast<std::size_t>(k)] +
        s * waypoints[static_cast<std::size_t>(k + 1)]);
  }
  return out;
}

struct MimicConfig {
  double initial_step = 0.5;
  int max_iterations = 150;
  double gradient_tolerance = 1e-8;

  void validate() const {
    detail::require(initial_step > 0.0, "mimic step size must be positive");
    detail::require(max_iterations > 0, "mimic iteration cap must be positive");
    detail::require(gradient_tolerance >= 0.0,
                    "mimic tolerance must be nonnegative");
  }
};

struct MimicResult {
  Pose pose;
  double objective = 0.0;  // weighted sum of squared target distances
  int iterations = 0;
  bool converged = false;
};

// Projected gradient descent with a backtracking step: the follower bends
// toward the scaled leader keypoints while its joint limits are enforced by
// clamping after every step.  Joints that do not influence any tracked
// keypoint keep their initial angles.
inline MimicResult mimic_targets(
    const AgentModel& follower,
    const std::vector<std::pair<int, Eigen::Vector3d>>& targets,
    const std::vector<double>& weights, const Pose& init,
    const MimicConfig& config = {}) {
  config.validate();
  detail::require(!targets.empty(), "mimic needs at least one target");
  detail::require(weights.size() == targets.size(),
                  "mimic needs one weight per target");
  detail::require(init.angles.size() == follower.dof(),
                  "mimic initial pose does not match the follower");

  auto clamp_pose = [&](Eigen::VectorXd angles) {
    for (int j = 0; j < follower.dof(); ++j) {
      const auto& spec = follower.joints[static_cast<std::size_t>(j)];
      angles[j] = std::clamp(angles[j], spec.lower, spec.upper);
    }
    return angles;
  };

  auto objective_and_grad = [&](const Eigen::VectorXd& angles,
                                Eigen::VectorXd* grad) {
    const FrameSet frames = compute_frames(follower, Pose(angles));
    double value = 0.0;
    if (grad) grad->setZero(follower.dof());
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const auto [kp_index, target] = targets[t];
      const auto& kp = follower.keypoints[static_cast<std::size_t>(kp_index)];
      const Eigen::Vector3d point = frames.tip[static_cast<std::size_t>(kp.link)];
      const Eigen::Vector3d residual = point - target;
      value += weights[t] * residual.squaredNorm();
      if (grad)
        *grad += 2.0 * weights[t] *
                 (point_jacobian(follower, frames, kp.link, point).transpose() *
                  residual);
    }
    return value;
  };

  MimicResult result;
  Eigen::VectorXd angles = clamp_pose(init.angles);
  double value = objective_and_grad(angles, nullptr);
  double step = config.initial_step;

  for (int it = 0; it < config.max_iterations; ++it) {
    result.iterations = it + 1;
    Eigen::VectorXd grad;
    value = objective_and_grad(angles, &grad);
    if (grad.norm() <= config.gradient_tolerance) {
      result.converged = true;
      break;
    }
    bool improved = false;
    while (step > 1e-12) {
      const Eigen::VectorXd candidate = clamp_pose(angles - step * grad);
      const double candidate_value = objective_and_grad(candidate, nullptr);
      if (candidate_value < value) {
        angles = candidate;
        value = candidate_value;
        step = std::min(step * 1.5, 4.0 * config.initial_step);
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      // No descent direction within machine step sizes: a constrained
      // stationary point (typically pressed against joint limits).
      result.converged = true;
      break;
    }
  }
  result.pose = Pose(std::move(angles));
  result.objective = value;
  return result;
}

// Convenience wrapper: targets taken from a leader pose through a
// correspondence map.
inline MimicResult mimic(const AgentModel& follower, const AgentModel& leader,
                         const Pose& leader_pose, const CorrespondenceMap& map,
                         const Pose& init, const MimicConfig& config = {}) {
  const auto resolved = detail::resolve(map, leader, follower);
  const auto leader_kps = forward_kinematics(leader, leader_pose);
  std::vector<std::pair<int, Eigen::Vector3d>> targets;
  std::vector<double> weights;
  for (const auto& [lead_kp, follow_kp, weight] : resolved.pairs) {
    targets.emplace_back(follow_kp,
                         resolved.scale * leader_kps[static_cast<std::size_t>(lead_kp)]);
    weights.push_back(weight);
  }
  return mimic_targets(follower, targets, weights, init, config);
}

// Paired motion features for two agents.  Columns are samples; rows are the
// per-agent feature encodings.  As recorded, `a` is the agent that led and
// `b` the imitator, but derived pairings (a swapped view, or two imitations
// of one demonstration zipped together) are datasets in their own right.
struct MotionDataset {
  std::string agent_a, agent_b;
  FeatureEncoding encoding_a = FeatureEncoding::joint_angles;
  FeatureEncoding encoding_b = FeatureEncoding::joint_angles;
  Eigen::MatrixXd features_a;  // width_a x n
  Eigen::MatrixXd features_b;  // width_b x n
  std::uint64_t seed = 0;
  double noise_sigma_a = 0.0;
  double noise_sigma_b = 0.0;
  double mean_mimic_objective = 0.0;

  long long size() const { return features_a.cols(); }
  int width_a() const { return static_cast<int>(features_a.rows()); }
  int width_b() const { return static_cast<int>(features_b.rows()); }

  void validate() const {
    detail::require(!agent_a.empty() && !agent_b.empty(),
                    "dataset must name both agents");
    detail::require(agent_a != agent_b, "dataset agents must differ");
    detail::require(features_a.cols() == features_b.cols(),
                    "dataset sides must pair up sample for sample");
    detail::require(features_a.cols() > 0, "dataset is empty");
    detail::require(features_a.rows() > 0 && features_b.rows() > 0,
                    "dataset features must be nonempty");
    detail::require(features_a.allFinite() && features_b.allFinite(),
                    "dataset features must be finite");
    detail::require(noise_sigma_a >= 0.0 && noise_sigma_b >= 0.0,
                    "dataset noise levels must be nonnegative");
  }

  // Same pairs viewed from the other side; mapping direction is a training
  // choice, not a property of the recording.
  MotionDataset swapped() const {
    MotionDataset out = *this;
    std::swap(out.agent_a, out.agent_b);
    std::swap(out.encoding_a, out.encoding_b);
    std::swap(out.features_a, out.features_b);
    std::swap(out.noise_sigma_a, out.noise_sigma_b);
    return out;
  }

  MotionDataset subset(const std::vector<std::size_t>& indices) const {
    detail::require(!indices.empty(), "dataset subset must not be empty");
    MotionDataset out = *this;
    out.features_a.resize(features_a.rows(), static_cast<Eigen::Index>(indices.size()));
    out.features_b.resize(features_b.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i) {
      detail::require(indices[i] < static_cast<std::size_t>(size()),
                      "dataset subset index out of range");
      out.features_a.col(static_cast<Eigen::Index>(i)) =
          features_a.col(static_cast<Eigen::Index>(indices[i]));
      out.features_b.col(static_cast<Eigen::Index>(i)) =
          features_b.col(static_cast<Eigen::Index>(indices[i]));
    }
    return out;
  }
};

// Record a paired session: the leader sweeps smooth random motion, the
// follower imitates each frame (warm-started from its previous pose, the way
// a live imitator would track).  Features are stored noise-free; sensor
// noise is a separate, explicit step.
inline MotionDataset generate_paired_dataset(const AgentModel& leader,
                                             const AgentModel& follower,
                                             const CorrespondenceMap& map,
                                             long long n_samples,
                                             std::uint64_t seed,
                                             const MimicConfig& mimic_config = {},
                                             int steps_per_segment = 25) {
  leader.validate();
  follower.validate();
  const auto resolved = detail::resolve(map, leader, follower);

  std::vector<std::pair<int, Eigen::Vector3d>> targets(resolved.pairs.size());
  std::vector<double> weights(resolved.pairs.size());
  for (std::size_t i = 0; i < resolved.pairs.size(); ++i)
    weights[i] = std::get<2>(resolved.pairs[i]);

  MotionDataset ds;
  ds.agent_a = leader.name;
  ds.agent_b = follower.name;
  ds.encoding_a = leader.feature_encoding;
  ds.encoding_b = follower.feature_encoding;
  ds.seed = seed;
  ds.features_a.resize(leader.feature_width(), n_samples);
  ds.features_b.resize(follower.feature_width(), n_samples);

  const std::vector<Pose> leader_motion =
      sample_source_motion(leader, n_samples, seed, steps_per_segment);

  // Imitation starts from the middle of the follower's joint ranges.
  Eigen::VectorXd warm(follower.dof());
  for (int j = 0; j < follower.dof(); ++j) {
    const auto& spec = follower.joints[static_cast<std::size_t>(j)];
    warm[j] = 0.5 * (spec.lower + spec.upper);
  }

  double objective_sum = 0.0;
  for (long long i = 0; i < n_samples; ++i) {
    const Pose& lead = leader_motion[static_cast<std::size_t>(i)];
    const auto leader_kps = forward_kinematics(leader, lead);
    for (std::size_t t = 0; t < resolved.pairs.size(); ++t) {
      const auto& [lead_kp, follow_kp, weight] = resolved.pairs[t];
      targets[t] = {follow_kp,
                    resolved.scale * leader_kps[static_cast<std::size_t>(lead_kp)]};
    }
    const MimicResult res =
        mimic_targets(follower, targets, weights, Pose(warm), mimic_config);
    warm = res.pose.angles;
    objective_sum += res.objective;
    ds.features_a.col(i) = feature_vector(leader, lead);
    ds.features_b.col(i) = feature_vector(follower, res.pose);
  }
  ds.mean_mimic_objective = objective_sum / static_cast<double>(n_samples);
  ds.validate();
  return ds;
}

// Additive iid Gaussian noise per feature entry, the usual stand-in for
// marker or encoder error.  Refuses to stack noise on noise so the recorded
// sigmas always describe the actual corruption.
inline MotionDataset add_sensor_noise(const MotionDataset& clean,
                                      double sigma_a, double sigma_b,
                                      std::uint64_t seed) {
  clean.validate();
  detail::require(sigma_a >= 0.0 && sigma_b >= 0.0,
                  "noise levels must be nonnegative");
  detail::require(clean.noise_sigma_a == 0.0 && clean.noise_sigma_b == 0.0,
                  "dataset already carries sensor noise");
  MotionDataset noisy = clean;
  noisy.noise_sigma_a = sigma_a;
  noisy.noise_sigma_b = sigma_b;
  Rng rng(seed);
  for (long long i = 0; i < clean.size(); ++i) {
    for (int r = 0; r < clean.width_a(); ++r)
      noisy.features_a(r, i) += rng.normal(0.0, sigma_a);
    for (int r = 0; r < clean.width_b(); ++r)
      noisy.features_b(r, i) += rng.normal(0.0, sigma_b);
  }
  return noisy;
}

}  // namespace symap
