#pragma once

#include <cstdint>
#include <numbers>
#include <string>

#include "symap/datagen.hpp"
#include "symap/kinematics.hpp"
#include "symap/transferability.hpp"

namespace symap {

// A small demonstration cast used by the `reproduce` command and the
// acceptance checks: two humanoids of different build and a desk robot arm.
// Dimensions are metres.  The cast is deliberately lopsided: the small
// humanoid has two limber mirrored arms, the large humanoid pairs a long
// reaching left arm with a short, stiff right arm, and the robot is a single
// five-joint chain.  Imitation uses the right arms, so the large humanoid is
// the tall-but-clumsy member of the cast: grids sampled over its right arm
// cover little volume, and the direction "large into small" transfers much
// better than the reverse.

namespace fixture {

inline AgentModel humanoid(const std::string& name, double scale, double sigma,
                           double elbow_upper) {
  constexpr double pi = std::numbers::pi;
  AgentModel a;
  a.name = name;
  a.sensor_noise_sigma = sigma;
  a.feature_encoding = FeatureEncoding::cartesian_keypoints;
  auto joint = [&](double ax, double ay, double az, double lo, double hi,
                   int parent, double length) {
    JointSpec j;
    j.axis = Eigen::Vector3d(ax, ay, az);
    j.lower = lo;
    j.upper = hi;
    j.parent_link = parent;
    a.joints.push_back(j);
    a.link_lengths.push_back(length * scale);
  };
  // torso and right arm
  joint(0, 0, 1, -0.45, 0.45, -1, 0.16);            // 0 torso yaw
  joint(0, 1, 0, -1.2, 1.2, 0, 0.05);               // 1 r shoulder pitch
  joint(0, 0, 1, -1.0, 1.3, 1, 0.26);               // 2 r shoulder yaw
  joint(0, 1, 0, 0.25, elbow_upper, 2, 0.23);       // 3 r elbow
  // left clavicle and arm (mirrored, mounted looking backwards)
  joint(0, 0, 1, pi - 0.45, pi + 0.45, -1, 0.16);   // 4 l clavicle yaw
  joint(0, 1, 0, -1.2, 1.2, 4, 0.05);               // 5 l shoulder pitch
  joint(0, 0, 1, -1.3, 1.0, 5, 0.26);               // 6 l shoulder yaw
  joint(0, 1, 0, 0.25, elbow_upper, 6, 0.23);       // 7 l elbow
  a.keypoints = {{"right_elbow", 2},
                 {"right_wrist", 3},
                 {"left_elbow", 6},
                 {"left_wrist", 7}};
  a.chains = {{"right_arm", 1, 3}, {"left_arm", 5, 7}};
  a.validate();
  return a;
}

}  // namespace fixture

inline AgentModel fixture_small_human() {
  return fixture::humanoid("human_small", 1.0, 0.019, 2.2);
}

// The large humanoid is built joint by joint rather than by scaling the
// template: its stature lives in the left arm (long links, wide elbow range)
// while the right arm — the one used for imitation — is short and stiff.
inline AgentModel fixture_large_human() {
  constexpr double pi = std::numbers::pi;
  AgentModel a;
  a.name = "human_large";
  a.sensor_noise_sigma = 0.025;
  a.feature_encoding = FeatureEncoding::cartesian_keypoints;
  auto joint = [&](double ax, double ay, double az, double lo, double hi,
                   int parent, double length) {
    JointSpec j;
    j.axis = Eigen::Vector3d(ax, ay, az);
    j.lower = lo;
    j.upper = hi;
    j.parent_link = parent;
    a.joints.push_back(j);
    a.link_lengths.push_back(length);
  };
  joint(0, 0, 1, -0.45, 0.45, -1, 0.24);            // 0 torso yaw
  joint(0, 1, 0, -1.2, 1.2, 0, 0.075);              // 1 r shoulder pitch
  joint(0, 0, 1, -1.0, 1.3, 1, 0.14);               // 2 r shoulder yaw
  joint(0, 1, 0, 0.25, 1.2, 2, 0.12);               // 3 r elbow (stiff)
  joint(0, 0, 1, pi - 0.45, pi + 0.45, -1, 0.24);   // 4 l clavicle yaw
  joint(0, 1, 0, -1.2, 1.2, 4, 0.075);              // 5 l shoulder pitch
  joint(0, 0, 1, -1.3, 1.0, 5, 0.39);               // 6 l shoulder yaw
  joint(0, 1, 0, 0.25, 2.2, 6, 0.345);              // 7 l elbow (long arm)
  a.keypoints = {{"right_elbow", 2},
                 {"right_wrist", 3},
                 {"left_elbow", 6},
                 {"left_wrist", 7}};
  a.chains = {{"right_arm", 1, 3}, {"left_arm", 5, 7}};
  a.validate();
  return a;
}

inline AgentModel fixture_robot() {
  AgentModel a;
  a.name = "robot_arm";
  a.sensor_noise_sigma = 0.019;
  a.feature_encoding = FeatureEncoding::joint_angles;
  auto joint = [&](double ax, double ay, double az, double lo, double hi,
                   int parent, double length) {
    JointSpec j;
    j.axis = Eigen::Vector3d(ax, ay, az);
    j.lower = lo;
    j.upper = hi;
    j.parent_link = parent;
    a.joints.push_back(j);
    a.link_lengths.push_back(length);
  };
  joint(0, 0, 1, -2.6, 2.6, -1, 0.10);   // base yaw
  joint(0, 1, 0, -1.4, 1.4, 0, 0.20);    // shoulder pitch
  joint(0, 1, 0, -2.0, 2.0, 1, 0.16);    // elbow pitch
  joint(0, 1, 0, -1.8, 1.8, 2, 0.06);    // wrist pitch
  joint(0, 0, 1, -2.9, 2.9, 3, 0.055);   // wrist yaw
  a.keypoints = {{"elbow", 1}, {"wrist", 4}};
  a.chains = {{"arm", 0, 4}};
  a.validate();
  return a;
}

// Human-to-human imitation tracks both arms.
inline CorrespondenceMap fixture_corr_human_to_human() {
  CorrespondenceMap map;
  map.pairs = {{"right_elbow", "right_elbow", 1.0},
               {"right_wrist", "right_wrist", 1.0},
               {"left_elbow", "left_elbow", 1.0},
               {"left_wrist", "left_wrist", 1.0}};
  return map;
}

// Robot demonstrations are imitated with the right arm only.
inline CorrespondenceMap fixture_corr_robot_to_human() {
  CorrespondenceMap map;
  map.pairs = {{"elbow", "right_elbow", 1.0}, {"wrist", "right_wrist", 1.0}};
  return map;
}

inline CorrespondenceMap fixture_corr_human_to_robot() {
  CorrespondenceMap map;
  map.pairs = {{"right_elbow", "elbow", 1.0}, {"right_wrist", "wrist", 1.0}};
  return map;
}

// One lattice for the whole cast, so any two occupancy grids are cell-by-cell
// comparable.
inline GridSpec fixture_grid_spec() {
  GridSpec spec;
  const double longest = fixture_large_human().total_length();
  spec.cell_size = longest / 20.0;
  spec.half_extent = longest;
  return spec;
}

inline double fixture_sigma_best() { return 0.019; }

// Demonstration scaling for the recorded sessions.  Every session is driven
// by the robot arm's demo sweep; each humanoid tracks the demo keypoints at
// its own scale.  The large humanoid works near full working-arm extension
// (a stiff elbow and narrow shoulder yaw leave visible tracking scatter);
// the small one tracks deep inside its reach and follows faithfully.  That
// asymmetry — the large is hard to predict and a lossy intermediate, the
// small a transparent one — is the behavioural face of the directed
// transferability between the two.
struct FixtureCorrs {
  CorrespondenceMap demo_large;  // robot demo -> large-humanoid targets
  CorrespondenceMap demo_small;  // robot demo -> small-humanoid targets
};

inline FixtureCorrs fixture_session_corrs() {
  FixtureCorrs out;
  out.demo_large = fixture_corr_robot_to_human();
  out.demo_large.scale = 0.9;  // targets up to ~90% of its working arm
  out.demo_small = fixture_corr_robot_to_human();
  out.demo_small.scale = 0.7;  // targets well inside its reach
  return out;
}

namespace fixture {

// Two imitations of one demonstration, paired sample for sample.  The demo
// features on both sides must be identical — same recording seed.
inline MotionDataset zip_followers(const MotionDataset& demo_to_a,
                                   const MotionDataset& demo_to_b) {
  detail::require(demo_to_a.agent_a == demo_to_b.agent_a &&
                      demo_to_a.seed == demo_to_b.seed &&
                      demo_to_a.size() == demo_to_b.size() &&
                      demo_to_a.features_a.cwiseEqual(demo_to_b.features_a).all(),
                  "zipped sessions must imitate one demonstration");
  MotionDataset out;
  out.agent_a = demo_to_a.agent_b;
  out.agent_b = demo_to_b.agent_b;
  out.encoding_a = demo_to_a.encoding_b;
  out.encoding_b = demo_to_b.encoding_b;
  out.features_a = demo_to_a.features_b;
  out.features_b = demo_to_b.features_b;
  out.seed = demo_to_a.seed;
  out.mean_mimic_objective =
      0.5 * (demo_to_a.mean_mimic_objective + demo_to_b.mean_mimic_objective);
  return out;
}

}  // namespace fixture

// Recorded pair sessions, all driven by robot-arm demonstrations: each
// humanoid imitates the demo sweep with its right arm, and the human pair is
// two imitations of one demonstration zipped together.  Anchoring every pair
// to the same demo stream keeps a chain's stage inputs on the distribution
// its stage model was trained on.  Sensor noise is applied at each agent's
// own level.
struct FixtureDatasets {
  MotionDataset large_robot;  // a = human_large, b = robot_arm
  MotionDataset small_robot;  // a = human_small, b = robot_arm
  MotionDataset large_small;  // a = human_large, b = human_small
};

inline FixtureDatasets fixture_datasets(std::uint64_t seed,
                                        long long n_large_robot = 740,
                                        long long n_small_robot = 788,
                                        long long n_large_small = 660) {
  const AgentModel small = fixture_small_human();
  const AgentModel large = fixture_large_human();
  const AgentModel robot = fixture_robot();
  const FixtureCorrs corrs = fixture_session_corrs();
  Rng rng(seed);

  FixtureDatasets out;
  {
    const std::uint64_t record_seed = rng.next_u64();
    const std::uint64_t noise_seed = rng.next_u64();
    out.large_robot = add_sensor_noise(
        generate_paired_dataset(robot, large, corrs.demo_large, n_large_robot,
                                record_seed)
            .swapped(),
        large.sensor_noise_sigma, robot.sensor_noise_sigma, noise_seed);
  }
  {
    const std::uint64_t record_seed = rng.next_u64();
    const std::uint64_t noise_seed = rng.next_u64();
    out.small_robot = add_sensor_noise(
        generate_paired_dataset(robot, small, corrs.demo_small, n_small_robot,
                                record_seed)
            .swapped(),
        small.sensor_noise_sigma, robot.sensor_noise_sigma, noise_seed);
  }
  {
    const std::uint64_t record_seed = rng.next_u64();
    const std::uint64_t noise_seed = rng.next_u64();
    out.large_small = add_sensor_noise(
        fixture::zip_followers(
            generate_paired_dataset(robot, large, corrs.demo_large,
                                    n_large_small, record_seed),
            generate_paired_dataset(robot, small, corrs.demo_small,
                                    n_large_small, record_seed)),
        large.sensor_noise_sigma, small.sensor_noise_sigma, noise_seed);
  }
  return out;
}

// A held-out demonstration for scoring chains: one fresh robot demo sweep,
// imitated by both humanoids, so chained predictions, stage references, and
// the final robot reference all describe the same motion.  The chain-input
// side carries that agent's sensor noise (the chain sees realistic input);
// reference sides stay clean.
struct FixtureEvalSessions {
  MotionDataset large_robot;  // a = noisy large imitation, b = clean demo
  MotionDataset small_robot;  // a = noisy small imitation, b = clean demo
  MotionDataset large_small;  // a = noisy large, b = clean small imitation
  MotionDataset small_large;  // a = noisy small, b = clean large imitation
};

inline FixtureEvalSessions fixture_eval_sessions(std::uint64_t seed,
                                                 long long n = 600) {
  const AgentModel small = fixture_small_human();
  const AgentModel large = fixture_large_human();
  const AgentModel robot = fixture_robot();
  const FixtureCorrs corrs = fixture_session_corrs();
  Rng rng(seed);
  const std::uint64_t record_seed = rng.next_u64();
  const std::uint64_t noise_large = rng.next_u64();
  const std::uint64_t noise_small = rng.next_u64();

  // Short segments: a fresh waypoint every ten frames keeps the session from
  // being a handful of long sweeps.
  constexpr int steps_per_segment = 10;
  const MotionDataset demo_large = generate_paired_dataset(
      robot, large, corrs.demo_large, n, record_seed, {}, steps_per_segment);
  const MotionDataset demo_small = generate_paired_dataset(
      robot, small, corrs.demo_small, n, record_seed, {}, steps_per_segment);

  FixtureEvalSessions out;
  out.large_robot = add_sensor_noise(demo_large.swapped(),
                                     large.sensor_noise_sigma, 0.0, noise_large);
  out.small_robot = add_sensor_noise(demo_small.swapped(),
                                     small.sensor_noise_sigma, 0.0, noise_small);

  out.large_small = out.large_robot;  // same noisy large imitation as input
  out.large_small.agent_b = small.name;
  out.large_small.encoding_b = demo_small.encoding_b;
  out.large_small.features_b = demo_small.features_b;
  out.large_small.mean_mimic_objective =
      0.5 * (demo_large.mean_mimic_objective + demo_small.mean_mimic_objective);

  out.small_large = out.small_robot;
  out.small_large.agent_b = large.name;
  out.small_large.encoding_b = demo_large.encoding_b;
  out.small_large.features_b = demo_large.features_b;
  out.small_large.mean_mimic_objective = out.large_small.mean_mimic_objective;
  return out;
}

}  // namespace symap
