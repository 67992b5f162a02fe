#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "symap/error.hpp"
#include "symap/kinematics.hpp"
#include "symap/mapping.hpp"

namespace symap {

struct KeypointError {
  std::string keypoint;
  double mean = 0.0;    // metres
  double stddev = 0.0;  // population deviation, metres
};

// Average distance error: per-keypoint Euclidean distance between predicted
// and reference positions, summarized as mean and deviation.  The total row
// pools every (sample, keypoint) distance.
struct EvalReport {
  std::vector<KeypointError> per_keypoint;
  double total_mean = 0.0;
  double total_stddev = 0.0;
  long long samples = 0;
  std::vector<EvalReport> folds;  // filled by cross-validation
};

namespace detail {

inline std::pair<double, double> mean_and_stddev(const Eigen::VectorXd& values) {
  const double mean = values.mean();
  const double var =
      (values.array() - mean).square().sum() / static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

}  // namespace detail

// Distances per keypoint (rows) and sample (columns).  Feature vectors are
// decoded to keypoint positions first, so joint-angle agents are compared in
// workspace coordinates, same as cartesian ones.
inline Eigen::MatrixXd keypoint_distances(
    const AgentModel& agent, const Eigen::MatrixXd& predicted,
    const Eigen::MatrixXd& reference,
    const std::vector<std::string>& keypoint_names) {
  detail::require(predicted.rows() == agent.feature_width() &&
                      reference.rows() == agent.feature_width(),
                  "feature width does not match agent '" + agent.name + "'");
  detail::require(predicted.cols() == reference.cols(),
                  "prediction and reference sample counts differ");
  detail::require(!keypoint_names.empty(), "no keypoints selected");

  std::vector<std::size_t> kp_index;
  for (const auto& name : keypoint_names)
    kp_index.push_back(static_cast<std::size_t>(agent.keypoint_index(name)));

  Eigen::MatrixXd distances(static_cast<Eigen::Index>(kp_index.size()),
                            predicted.cols());
  for (Eigen::Index s = 0; s < predicted.cols(); ++s) {
    const auto pred_kps = keypoints_from_features(agent, predicted.col(s));
    const auto ref_kps = keypoints_from_features(agent, reference.col(s));
    for (std::size_t k = 0; k < kp_index.size(); ++k)
      distances(static_cast<Eigen::Index>(k), s) =
          (pred_kps[kp_index[k]] - ref_kps[kp_index[k]]).norm();
  }
  return distances;
}

inline EvalReport eval_from_distances(
    const std::vector<std::string>& keypoint_names,
    const Eigen::MatrixXd& distances) {
  detail::require(distances.rows() == static_cast<Eigen::Index>(keypoint_names.size()),
                  "one distance row per keypoint required");
  detail::require(distances.cols() > 0, "cannot evaluate zero samples");
  EvalReport report;
  report.samples = distances.cols();
  for (std::size_t k = 0; k < keypoint_names.size(); ++k) {
    const auto [mean, dev] = detail::mean_and_stddev(
        distances.row(static_cast<Eigen::Index>(k)).transpose());
    report.per_keypoint.push_back({keypoint_names[k], mean, dev});
  }
  const Eigen::VectorXd pooled =
      Eigen::Map<const Eigen::VectorXd>(distances.data(), distances.size());
  const auto [mean, dev] = detail::mean_and_stddev(pooled);
  report.total_mean = mean;
  report.total_stddev = dev;
  return report;
}

inline std::vector<std::string> all_keypoint_names(const AgentModel& agent) {
  std::vector<std::string> names;
  for (const auto& kp : agent.keypoints) names.push_back(kp.name);
  return names;
}

inline EvalReport avg_distance_error(
    const AgentModel& agent, const Eigen::MatrixXd& predicted,
    const Eigen::MatrixXd& reference,
    std::vector<std::string> keypoint_names = {}) {
  if (keypoint_names.empty()) keypoint_names = all_keypoint_names(agent);
  return eval_from_distances(
      keypoint_names,
      keypoint_distances(agent, predicted, reference, keypoint_names));
}

enum class MapMethod { dual, direct };

inline const char* to_string(MapMethod m) {
  return m == MapMethod::dual ? "dual" : "direct";
}

inline MapMethod map_method_from_string(const std::string& s) {
  if (s == "dual") return MapMethod::dual;
  if (s == "direct") return MapMethod::direct;
  throw ValidationError("unknown mapping method: '" + s + "'");
}

struct CrossValReport {
  EvalReport forward;   // predictions into agent B's space
  EvalReport backward;  // predictions into agent A's space (dual models only)
  bool has_backward = false;
};

// Seeded k-fold cross-validation.  The sample order is shuffled once, folds
// are contiguous slices of the shuffle, and every fold's model is fitted
// (scalers included) on its training portion only.
inline CrossValReport cross_validate(const MotionDataset& ds,
                                     const AgentModel& agent_a,
                                     const AgentModel& agent_b,
                                     MapMethod method, const ArchSpec& arch,
                                     const TrainConfig& config, int folds = 3) {
  ds.validate();
  detail::require(agent_a.name == ds.agent_a && agent_b.name == ds.agent_b,
                  "agents do not match the dataset");
  const auto n = static_cast<std::size_t>(ds.size());
  detail::require(folds >= 2 && folds <= static_cast<int>(n),
                  "fold count must lie in [2, sample count]");

  Rng rng(config.seed);
  const std::vector<std::size_t> perm = rng.permutation(n);

  const std::vector<std::string> kps_a = all_keypoint_names(agent_a);
  const std::vector<std::string> kps_b = all_keypoint_names(agent_b);

  CrossValReport cv;
  cv.has_backward = method == MapMethod::dual;
  std::vector<Eigen::MatrixXd> fwd_distances, bwd_distances;

  for (int f = 0; f < folds; ++f) {
    const std::size_t begin = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(folds);
    const std::size_t end = n * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(folds);
    std::vector<std::size_t> test_idx(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                                      perm.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<std::size_t> train_idx;
    train_idx.reserve(n - test_idx.size());
    for (std::size_t i = 0; i < begin; ++i) train_idx.push_back(perm[i]);
    for (std::size_t i = end; i < n; ++i) train_idx.push_back(perm[i]);

    const MotionDataset train = ds.subset(train_idx);
    const MotionDataset test = ds.subset(test_idx);

    TrainConfig fold_config = config;
    fold_config.seed = rng.next_u64();

    if (method == MapMethod::dual) {
      const auto [model, losses] = train_dual_autoencoder(train, arch, fold_config);
      fwd_distances.push_back(keypoint_distances(
          agent_b, map_forward(model, test.features_a), test.features_b, kps_b));
      bwd_distances.push_back(keypoint_distances(
          agent_a, map_backward(model, test.features_b), test.features_a, kps_a));
      cv.forward.folds.push_back(eval_from_distances(kps_b, fwd_distances.back()));
      cv.backward.folds.push_back(eval_from_distances(kps_a, bwd_distances.back()));
    } else {
      const auto [model, losses] = train_direct(train, arch, fold_config);
      fwd_distances.push_back(keypoint_distances(
          agent_b, map_forward(model, test.features_a), test.features_b, kps_b));
      cv.forward.folds.push_back(eval_from_distances(kps_b, fwd_distances.back()));
    }
  }

  auto pool = [](const std::vector<Eigen::MatrixXd>& parts,
                 const std::vector<std::string>& names,
                 std::vector<EvalReport> fold_reports) {
    Eigen::Index total_cols = 0;
    for (const auto& p : parts) total_cols += p.cols();
    Eigen::MatrixXd all(parts.front().rows(), total_cols);
    Eigen::Index at = 0;
    for (const auto& p : parts) {
      all.middleCols(at, p.cols()) = p;
      at += p.cols();
    }
    EvalReport report = eval_from_distances(names, all);
    report.folds = std::move(fold_reports);
    return report;
  };

  cv.forward = pool(fwd_distances, kps_b, std::move(cv.forward.folds));
  if (cv.has_backward)
    cv.backward = pool(bwd_distances, kps_a, std::move(cv.backward.folds));
  return cv;
}

}  // namespace symap
