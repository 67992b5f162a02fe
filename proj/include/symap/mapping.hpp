#pragma once

#include <Eigen/Core>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "symap/datagen.hpp"
#include "symap/error.hpp"
#include "symap/neuralnet.hpp"

namespace symap {

// Per-dimension standardization fitted on training data.  Dimensions whose
// spread collapses below the floor are remembered: they carry no signal and
// a report should say so rather than silently dividing by epsilon.
struct FeatureScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // floored
  std::vector<int> degenerate;

  static constexpr double stddev_floor = 1e-8;

  static FeatureScaler fit(const Eigen::MatrixXd& data) {
    detail::require(data.cols() > 0, "cannot fit a scaler on no samples");
    FeatureScaler s;
    s.mean = data.rowwise().mean();
    const Eigen::MatrixXd centered = data.colwise() - s.mean;
    s.stddev = (centered.array().square().rowwise().sum() /
                static_cast<double>(data.cols()))
                   .sqrt()
                   .matrix();
    for (int r = 0; r < s.stddev.size(); ++r)
      if (s.stddev[r] < stddev_floor) {
        s.stddev[r] = stddev_floor;
        s.degenerate.push_back(r);
      }
    return s;
  }

  int width() const { return static_cast<int>(mean.size()); }

  Eigen::MatrixXd normalize(const Eigen::MatrixXd& x) const {
    detail::require(x.rows() == mean.size(), "scaler width mismatch");
    return ((x.colwise() - mean).array().colwise() / stddev.array()).matrix();
  }

  Eigen::MatrixXd denormalize(const Eigen::MatrixXd& x) const {
    detail::require(x.rows() == mean.size(), "scaler width mismatch");
    return ((x.array().colwise() * stddev.array()).colwise() + mean.array())
        .matrix();
  }

  void validate() const {
    detail::require(mean.size() > 0 && mean.size() == stddev.size(),
                    "scaler is empty or inconsistent");
    detail::require(mean.allFinite() && stddev.allFinite(),
                    "scaler statistics must be finite");
    detail::require((stddev.array() > 0.0).all(),
                    "scaler spread must be positive");
  }
};

// Mirrored-coder architecture: how wide the shared code is and how many
// hidden layers sit on each side of it.  Hidden widths taper geometrically
// between the feature width and the code width.
struct ArchSpec {
  int latent_width = 0;   // 0 -> ceil(min(width_a, width_b) / 4)
  int hidden_layers = 2;  // per coder
  int hidden_width = 0;   // 0 -> geometric taper; >0 -> that width throughout

  void validate() const {
    detail::require(latent_width >= 0, "latent width must be nonnegative");
    detail::require(hidden_layers >= 0, "hidden layer count must be nonnegative");
    detail::require(hidden_width >= 0, "hidden width must be nonnegative");
  }

  int resolved_latent(int width_a, int width_b) const {
    const int latent =
        latent_width > 0
            ? latent_width
            : (std::min(width_a, width_b) + 3) / 4;
    detail::require(latent >= 1, "latent width must be at least 1");
    detail::require(latent <= std::min(width_a, width_b),
                    "latent width must not exceed either feature width");
    return latent;
  }
};

namespace detail {

inline std::vector<int> taper_widths(int from, int to, int hidden,
                                     int uniform = 0) {
  std::vector<int> widths{from};
  const double ratio = static_cast<double>(to) / static_cast<double>(from);
  for (int k = 1; k <= hidden; ++k) {
    const double w =
        from * std::pow(ratio, static_cast<double>(k) / (hidden + 1));
    widths.push_back(uniform > 0
                         ? uniform
                         : std::max(std::min(from, to),
                                    static_cast<int>(std::lround(w))));
  }
  widths.push_back(to);
  return widths;
}

// tanh throughout, except a linear read-out where `linear_output` is set
// (reconstruction targets are standardized but unbounded).
inline std::vector<LayerSpec> coder_specs(const std::vector<int>& widths,
                                          bool linear_output) {
  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const bool last = i + 2 == widths.size();
    specs.push_back({widths[i], widths[i + 1],
                     last && linear_output ? Activation::identity
                                           : Activation::tanh_fn});
  }
  return specs;
}

}  // namespace detail

inline std::vector<LayerSpec> encoder_specs(int width, int latent, int hidden,
                                            int uniform = 0) {
  return detail::coder_specs(
      detail::taper_widths(width, latent, hidden, uniform), false);
}

inline std::vector<LayerSpec> decoder_specs(int latent, int width, int hidden,
                                            int uniform = 0) {
  return detail::coder_specs(
      detail::taper_widths(latent, width, hidden, uniform), true);
}

// Two autoencoders joined at the code: encoder/decoder pairs for each agent,
// trained so that paired motions land on the same code.  One trained model
// therefore maps in both directions.
struct DualAutoencoderModel {
  std::string agent_a, agent_b;
  FeatureScaler norm_a, norm_b;
  NetworkParams encoder_a, decoder_a, encoder_b, decoder_b;

  int latent_width() const { return encoder_a.output_width(); }
  int width_a() const { return encoder_a.input_width(); }
  int width_b() const { return encoder_b.input_width(); }

  void validate() const {
    detail::require(!agent_a.empty() && !agent_b.empty() && agent_a != agent_b,
                    "mapping model must name two distinct agents");
    norm_a.validate();
    norm_b.validate();
    encoder_a.validate();
    decoder_a.validate();
    encoder_b.validate();
    decoder_b.validate();
    detail::require(norm_a.width() == encoder_a.input_width() &&
                        norm_b.width() == encoder_b.input_width(),
                    "scaler widths must match the encoders");
    detail::require(decoder_a.output_width() == encoder_a.input_width() &&
                        decoder_b.output_width() == encoder_b.input_width(),
                    "decoders must reconstruct their own feature widths");
    detail::require(encoder_a.output_width() == encoder_b.output_width() &&
                        decoder_a.input_width() == encoder_a.output_width() &&
                        decoder_b.input_width() == encoder_b.output_width(),
                    "both coder pairs must share one code width");
  }
};

// One-way baseline: a single network from A features to B features with the
// same layer budget as the dual model's encode/decode path.
struct DirectMapModel {
  std::string agent_a, agent_b;
  FeatureScaler norm_a, norm_b;
  NetworkParams net;

  void validate() const {
    detail::require(!agent_a.empty() && !agent_b.empty() && agent_a != agent_b,
                    "mapping model must name two distinct agents");
    norm_a.validate();
    norm_b.validate();
    net.validate();
    detail::require(net.input_width() == norm_a.width() &&
                        net.output_width() == norm_b.width(),
                    "network widths must match the scalers");
  }
};

// Per-epoch training means.  For the dual model, `total` is
// loss_a + loss_b + latent_weight * loss_latent; the direct baseline fills
// only `total`.
struct LossReport {
  std::vector<double> loss_a, loss_b, loss_latent, total;
  std::vector<int> degenerate_a, degenerate_b;
  long long samples = 0;

  double final_total() const { return total.empty() ? 0.0 : total.back(); }
};

namespace detail {

inline std::vector<std::vector<std::size_t>> epoch_batches(
    std::size_t n, int batch_size, Rng& rng) {
  const std::vector<std::size_t> perm = rng.permutation(n);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                         perm.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

inline Eigen::MatrixXd gather(const Eigen::MatrixXd& data,
                              const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(data.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) =
        data.col(static_cast<Eigen::Index>(cols[i]));
  return out;
}

struct DualBatchGradients {
  double loss_a = 0.0, loss_b = 0.0, loss_latent = 0.0;
  Gradients encoder_a, decoder_a, encoder_b, decoder_b;

  double total(double lambda) const {
    return loss_a + loss_b + lambda * loss_latent;
  }
};

// One evaluation of the joint objective l_A + l_B + lambda * l_align on a
// batch of standardized features, with gradients for all four networks.
inline DualBatchGradients dual_loss_gradients(const DualAutoencoderModel& model,
                                              const Eigen::MatrixXd& batch_a,
                                              const Eigen::MatrixXd& batch_b,
                                              double lambda) {
  DualBatchGradients out;
  ForwardCache cache_ea, cache_da, cache_eb, cache_db;
  const Eigen::MatrixXd za = forward(model.encoder_a, batch_a, &cache_ea);
  const Eigen::MatrixXd ra = forward(model.decoder_a, za, &cache_da);
  const Eigen::MatrixXd zb = forward(model.encoder_b, batch_b, &cache_eb);
  const Eigen::MatrixXd rb = forward(model.decoder_b, zb, &cache_db);

  const auto [loss_a, grad_ra] = l1_loss_and_grad(ra, batch_a);
  const auto [loss_b, grad_rb] = l1_loss_and_grad(rb, batch_b);
  const auto [loss_latent, grad_za_align] = l1_loss_and_grad(za, zb);
  out.loss_a = loss_a;
  out.loss_b = loss_b;
  out.loss_latent = loss_latent;

  // Reconstruction gradients flow through each decoder into its encoder;
  // the code-alignment term pulls the two encoders toward each other.
  Eigen::MatrixXd grad_za_rec, grad_zb_rec;
  out.decoder_a = backward(model.decoder_a, cache_da, grad_ra, &grad_za_rec);
  out.decoder_b = backward(model.decoder_b, cache_db, grad_rb, &grad_zb_rec);
  out.encoder_a = backward(model.encoder_a, cache_ea,
                           grad_za_rec + lambda * grad_za_align);
  out.encoder_b = backward(model.encoder_b, cache_eb,
                           grad_zb_rec - lambda * grad_za_align);
  return out;
}

}  // namespace detail

inline std::pair<DualAutoencoderModel, LossReport> train_dual_autoencoder(
    const MotionDataset& ds, const ArchSpec& arch, const TrainConfig& config) {
  ds.validate();
  arch.validate();
  config.validate();

  DualAutoencoderModel model;
  model.agent_a = ds.agent_a;
  model.agent_b = ds.agent_b;
  model.norm_a = FeatureScaler::fit(ds.features_a);
  model.norm_b = FeatureScaler::fit(ds.features_b);

  const int latent = arch.resolved_latent(ds.width_a(), ds.width_b());
  Rng rng(config.seed);
  model.encoder_a = init_network(
      encoder_specs(ds.width_a(), latent, arch.hidden_layers,
                    arch.hidden_width),
      rng.next_u64());
  model.decoder_a = init_network(
      decoder_specs(latent, ds.width_a(), arch.hidden_layers,
                    arch.hidden_width),
      rng.next_u64());
  model.encoder_b = init_network(
      encoder_specs(ds.width_b(), latent, arch.hidden_layers,
                    arch.hidden_width),
      rng.next_u64());
  model.decoder_b = init_network(
      decoder_specs(latent, ds.width_b(), arch.hidden_layers,
                    arch.hidden_width),
      rng.next_u64());

  AdamState adam_ea = AdamState::zeros_like(model.encoder_a);
  AdamState adam_da = AdamState::zeros_like(model.decoder_a);
  AdamState adam_eb = AdamState::zeros_like(model.encoder_b);
  AdamState adam_db = AdamState::zeros_like(model.decoder_b);

  const Eigen::MatrixXd xa = model.norm_a.normalize(ds.features_a);
  const Eigen::MatrixXd xb = model.norm_b.normalize(ds.features_b);
  const auto n = static_cast<std::size_t>(ds.size());

  LossReport report;
  report.samples = ds.size();
  report.degenerate_a = model.norm_a.degenerate;
  report.degenerate_b = model.norm_b.degenerate;

  const double lambda = config.latent_loss_weight;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double sum_a = 0.0, sum_b = 0.0, sum_latent = 0.0;
    for (const auto& batch : detail::epoch_batches(n, config.batch_size, rng)) {
      const Eigen::MatrixXd batch_a = detail::gather(xa, batch);
      const Eigen::MatrixXd batch_b = detail::gather(xb, batch);

      const detail::DualBatchGradients g =
          detail::dual_loss_gradients(model, batch_a, batch_b, lambda);

      adam_step(model.decoder_a, g.decoder_a, adam_da, config);
      adam_step(model.decoder_b, g.decoder_b, adam_db, config);
      adam_step(model.encoder_a, g.encoder_a, adam_ea, config);
      adam_step(model.encoder_b, g.encoder_b, adam_eb, config);

      const double weight = static_cast<double>(batch.size());
      sum_a += g.loss_a * weight;
      sum_b += g.loss_b * weight;
      sum_latent += g.loss_latent * weight;
    }
    const double scale = 1.0 / static_cast<double>(n);
    report.loss_a.push_back(sum_a * scale);
    report.loss_b.push_back(sum_b * scale);
    report.loss_latent.push_back(sum_latent * scale);
    report.total.push_back((sum_a + sum_b + lambda * sum_latent) * scale);
  }
  model.validate();
  return {std::move(model), std::move(report)};
}

inline std::pair<DirectMapModel, LossReport> train_direct(
    const MotionDataset& ds, const ArchSpec& arch, const TrainConfig& config) {
  ds.validate();
  arch.validate();
  config.validate();

  DirectMapModel model;
  model.agent_a = ds.agent_a;
  model.agent_b = ds.agent_b;
  model.norm_a = FeatureScaler::fit(ds.features_a);
  model.norm_b = FeatureScaler::fit(ds.features_b);

  // Same layer budget as the dual path A -> code -> B, for a fair baseline.
  const int latent = arch.resolved_latent(ds.width_a(), ds.width_b());
  std::vector<LayerSpec> specs =
      encoder_specs(ds.width_a(), latent, arch.hidden_layers, arch.hidden_width);
  for (const LayerSpec& s : decoder_specs(latent, ds.width_b(), arch.hidden_layers,
                                        arch.hidden_width))
    specs.push_back(s);

  Rng rng(config.seed);
  model.net = init_network(specs, rng.next_u64());
  AdamState adam = AdamState::zeros_like(model.net);

  const Eigen::MatrixXd xa = model.norm_a.normalize(ds.features_a);
  const Eigen::MatrixXd xb = model.norm_b.normalize(ds.features_b);
  const auto n = static_cast<std::size_t>(ds.size());

  LossReport report;
  report.samples = ds.size();
  report.degenerate_a = model.norm_a.degenerate;
  report.degenerate_b = model.norm_b.degenerate;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double sum = 0.0;
    for (const auto& batch : detail::epoch_batches(n, config.batch_size, rng)) {
      const Eigen::MatrixXd batch_a = detail::gather(xa, batch);
      const Eigen::MatrixXd batch_b = detail::gather(xb, batch);
      ForwardCache cache;
      const Eigen::MatrixXd pred = forward(model.net, batch_a, &cache);
      const auto [loss, grad] = l1_loss_and_grad(pred, batch_b);
      adam_step(model.net, backward(model.net, cache, grad), adam, config);
      sum += loss * static_cast<double>(batch.size());
    }
    report.total.push_back(sum / static_cast<double>(n));
  }
  model.validate();
  return {std::move(model), std::move(report)};
}

// A -> B through the shared code.
inline Eigen::MatrixXd map_forward(const DualAutoencoderModel& model,
                                   const Eigen::MatrixXd& features_a) {
  return model.norm_b.denormalize(forward(
      model.decoder_b,
      forward(model.encoder_a, model.norm_a.normalize(features_a))));
}

// B -> A, from the same trained model.
inline Eigen::MatrixXd map_backward(const DualAutoencoderModel& model,
                                    const Eigen::MatrixXd& features_b) {
  return model.norm_a.denormalize(forward(
      model.decoder_a,
      forward(model.encoder_b, model.norm_b.normalize(features_b))));
}

inline Eigen::MatrixXd map_forward(const DirectMapModel& model,
                                   const Eigen::MatrixXd& features_a) {
  return model.norm_b.denormalize(
      forward(model.net, model.norm_a.normalize(features_a)));
}

// One hop of a mapping chain.  Dual models may run in either direction;
// the direct baseline only forward.
struct MappingStage {
  std::shared_ptr<const DualAutoencoderModel> dual;
  std::shared_ptr<const DirectMapModel> direct;
  bool reverse = false;

  static MappingStage from_dual(std::shared_ptr<const DualAutoencoderModel> m,
                                bool reversed = false) {
    MappingStage s;
    s.dual = std::move(m);
    s.reverse = reversed;
    return s;
  }

  static MappingStage from_direct(std::shared_ptr<const DirectMapModel> m) {
    MappingStage s;
    s.direct = std::move(m);
    return s;
  }

  void validate() const {
    detail::require(static_cast<bool>(dual) != static_cast<bool>(direct),
                    "a mapping stage wraps exactly one model");
    detail::require(!(direct && reverse),
                    "direct models cannot run in reverse");
    if (dual) dual->validate();
    if (direct) direct->validate();
  }

  const std::string& from_agent() const {
    if (dual) return reverse ? dual->agent_b : dual->agent_a;
    return direct->agent_a;
  }
  const std::string& to_agent() const {
    if (dual) return reverse ? dual->agent_a : dual->agent_b;
    return direct->agent_b;
  }
  int in_width() const {
    if (dual) return reverse ? dual->width_b() : dual->width_a();
    return direct->net.input_width();
  }
  int out_width() const {
    if (dual) return reverse ? dual->width_a() : dual->width_b();
    return direct->net.output_width();
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const {
    if (dual) return reverse ? map_backward(*dual, features)
                             : map_forward(*dual, features);
    return map_forward(*direct, features);
  }
};

struct ChainMapResult {
  std::vector<Eigen::MatrixXd> stage_outputs;  // one per stage

  const Eigen::MatrixXd& output() const { return stage_outputs.back(); }
};

// Composes stages end to end.  Every intermediate agent is fully decoded to
// its native feature space before the next hop consumes it, so each stage
// sees exactly the kind of input it was trained on.
inline ChainMapResult chain_map(const std::vector<MappingStage>& stages,
                                const Eigen::MatrixXd& features) {
  detail::require(!stages.empty(), "mapping chain is empty");
  for (const auto& s : stages) s.validate();
  for (std::size_t i = 0; i + 1 < stages.size(); ++i)
    detail::require(stages[i].to_agent() == stages[i + 1].from_agent(),
                    "mapping chain breaks between stage " + std::to_string(i) +
                        " and " + std::to_string(i + 1));
  detail::require(features.rows() == stages.front().in_width(),
                  "chain input width does not match the first stage");

  ChainMapResult result;
  Eigen::MatrixXd current = features;
  for (const auto& stage : stages) {
    current = stage.apply(current);
    result.stage_outputs.push_back(current);
  }
  return result;
}

}  // namespace symap
