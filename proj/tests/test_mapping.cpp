#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "symap/mapping.hpp"
#include "symap/rng.hpp"

using namespace symap;

namespace {

// Paired features with an exactly recoverable relationship in both
// directions: b = M a + c with M full column rank, so b determines a.
MotionDataset linear_pair(long long n, std::uint64_t seed) {
  Eigen::Matrix<double, 4, 3> m;
  m << 1.0, 0.2, -0.4,
       -0.3, 0.8, 0.1,
       0.5, -0.6, 0.9,
       0.2, 0.4, 0.7;
  const Eigen::Vector4d c(0.1, -0.2, 0.3, 0.0);

  MotionDataset ds;
  ds.agent_a = "synth_a";
  ds.agent_b = "synth_b";
  ds.seed = seed;
  ds.features_a.resize(3, n);
  ds.features_b.resize(4, n);
  Rng rng(seed);
  for (long long i = 0; i < n; ++i) {
    Eigen::Vector3d a;
    for (int r = 0; r < 3; ++r) a[r] = rng.uniform(-1.0, 1.0);
    ds.features_a.col(i) = a;
    ds.features_b.col(i) = m * a + c;
  }
  return ds;
}

TrainConfig quick_config(std::uint64_t seed, int epochs = 300) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.epochs = epochs;
  // The width-3 tanh stacks used here train slowly at the default rate.
  cfg.learning_rate = 3e-3;
  return cfg;
}

ArchSpec latent3() {
  ArchSpec arch;
  arch.latent_width = 3;
  return arch;
}

double mean_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().mean(); }

}  // namespace

TEST_CASE("feature scaler matches hand-computed population moments") {
  Eigen::MatrixXd data(2, 3);
  data << 1.0, 2.0, 3.0,
          4.0, 4.0, 4.0;
  const FeatureScaler s = FeatureScaler::fit(data);
  REQUIRE(s.mean[0] == Catch::Approx(2.0).margin(1e-15));
  REQUIRE(s.mean[1] == Catch::Approx(4.0).margin(1e-15));
  REQUIRE(s.stddev[0] == Catch::Approx(std::sqrt(2.0 / 3.0)).margin(1e-15));

  // A constant row gets floored, not divided by zero, and is reported.
  REQUIRE(s.stddev[1] == 1e-8);
  REQUIRE(s.degenerate == std::vector<int>{1});

  const Eigen::MatrixXd z = s.normalize(data);
  REQUIRE(z.row(0).mean() == Catch::Approx(0.0).margin(1e-12));
  REQUIRE((s.denormalize(z) - data).cwiseAbs().maxCoeff() < 1e-12);

  REQUIRE_THROWS_AS(s.normalize(Eigen::MatrixXd::Zero(3, 2)), ValidationError);
}

TEST_CASE("coder layer widths taper geometrically") {
  const auto enc = encoder_specs(12, 3, 2);
  REQUIRE(enc.size() == 3);
  REQUIRE(enc[0].inputs == 12);
  REQUIRE(enc[0].outputs == 8);
  REQUIRE(enc[1].outputs == 5);
  REQUIRE(enc[2].outputs == 3);
  for (const auto& l : enc) REQUIRE(l.activation == Activation::tanh_fn);

  const auto dec = decoder_specs(3, 12, 2);
  REQUIRE(dec.size() == 3);
  REQUIRE(dec[0].inputs == 3);
  REQUIRE(dec[0].outputs == 5);
  REQUIRE(dec[1].outputs == 8);
  REQUIRE(dec[2].outputs == 12);
  REQUIRE(dec[0].activation == Activation::tanh_fn);
  REQUIRE(dec[2].activation == Activation::identity);

  // Near-equal widths stay within the bracket.
  for (int w : detail::taper_widths(4, 3, 2)) {
    REQUIRE(w >= 3);
    REQUIRE(w <= 4);
  }

  ArchSpec def;
  REQUIRE(def.resolved_latent(12, 5) == 2);
  REQUIRE(def.resolved_latent(12, 12) == 3);
  ArchSpec wide;
  wide.latent_width = 6;
  REQUIRE_THROWS_AS(wide.resolved_latent(12, 5), ValidationError);
  // Zero hidden layers is legal (single-layer coders); negative is not.
  ArchSpec flat;
  flat.hidden_layers = 0;
  flat.validate();
  REQUIRE(encoder_specs(5, 2, 0).size() == 1);
  ArchSpec bad;
  bad.hidden_layers = -1;
  REQUIRE_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("uniform hidden width overrides the taper") {
  const auto enc = encoder_specs(12, 3, 2, 40);
  REQUIRE(enc.size() == 3);
  REQUIRE(enc[0].inputs == 12);
  REQUIRE(enc[0].outputs == 40);
  REQUIRE(enc[1].outputs == 40);
  REQUIRE(enc[2].outputs == 3);
  const auto dec = decoder_specs(3, 12, 2, 40);
  REQUIRE(dec[0].outputs == 40);
  REQUIRE(dec[1].outputs == 40);
  REQUIRE(dec[2].outputs == 12);

  // The endpoints never change, so zero hidden layers ignores the width.
  REQUIRE(encoder_specs(5, 2, 0, 40).size() == 1);
  REQUIRE(encoder_specs(5, 2, 0, 40)[0].outputs == 2);

  ArchSpec bad;
  bad.hidden_width = -4;
  REQUIRE_THROWS_AS(bad.validate(), ValidationError);

  // A wide dual model round-trips through training untouched: widths come
  // from the spec, not from the data.
  MotionDataset ds;
  ds.agent_a = "a";
  ds.agent_b = "b";
  Rng rng(3);
  ds.features_a = Eigen::MatrixXd::NullaryExpr(
      4, 50, [&](Eigen::Index, Eigen::Index) { return rng.normal(0.0, 1.0); });
  ds.features_b = ds.features_a.topRows(3);
  ArchSpec arch;
  arch.latent_width = 2;
  arch.hidden_width = 17;
  TrainConfig cfg;
  cfg.epochs = 2;
  const auto [model, report] = train_dual_autoencoder(ds, arch, cfg);
  REQUIRE(model.encoder_a.layers[0].weights.rows() == 17);
  REQUIRE(model.encoder_a.layers[1].weights.rows() == 17);
  REQUIRE(model.decoder_b.layers[1].weights.rows() == 17);
  REQUIRE(model.latent_width() == 2);
}

TEST_CASE("dual autoencoder learns a bidirectional linear pairing") {
  const MotionDataset ds = linear_pair(400, 9);
  const auto [model, report] = train_dual_autoencoder(ds, latent3(), quick_config(1));

  REQUIRE(report.total.size() == 300);
  REQUIRE(report.final_total() < 0.25 * report.total.front());
  REQUIRE(report.loss_a.back() < 0.08);
  REQUIRE(report.loss_b.back() < 0.08);
  REQUIRE(report.loss_latent.back() < 0.08);

  // The reported total is exactly the weighted sum of its parts.
  for (std::size_t e = 0; e < report.total.size(); ++e)
    REQUIRE(report.total[e] ==
            Catch::Approx(report.loss_a[e] + report.loss_b[e] +
                          report.loss_latent[e])
                .margin(1e-12));

  // Held-out accuracy, both directions from the one model.
  const MotionDataset fresh = linear_pair(200, 1234);
  const Eigen::MatrixXd to_b = map_forward(model, fresh.features_a);
  const Eigen::MatrixXd to_a = map_backward(model, fresh.features_b);
  REQUIRE(mean_abs(to_b - fresh.features_b) < 0.15);
  REQUIRE(mean_abs(to_a - fresh.features_a) < 0.15);

  REQUIRE(model.latent_width() == 3);
  REQUIRE(model.width_a() == 3);
  REQUIRE(model.width_b() == 4);
  REQUIRE_THROWS_AS(map_forward(model, Eigen::MatrixXd::Zero(4, 2)),
                    ValidationError);
  REQUIRE_THROWS_AS(map_backward(model, Eigen::MatrixXd::Zero(3, 2)),
                    ValidationError);
}

TEST_CASE("latent penalty is what aligns the codes") {
  const MotionDataset ds = linear_pair(300, 4);
  TrainConfig with = quick_config(2, 200);
  TrainConfig without = quick_config(2, 200);
  without.latent_loss_weight = 0.0;

  const auto [m1, r1] = train_dual_autoencoder(ds, latent3(), with);
  const auto [m2, r2] = train_dual_autoencoder(ds, latent3(), without);
  REQUIRE(r1.loss_latent.back() < 0.5 * r2.loss_latent.back());

  // Without alignment the cross mapping decodes garbage codes.
  const Eigen::MatrixXd cross1 = map_forward(m1, ds.features_a);
  const Eigen::MatrixXd cross2 = map_forward(m2, ds.features_a);
  REQUIRE(mean_abs(cross1 - ds.features_b) < mean_abs(cross2 - ds.features_b));
}

TEST_CASE("training is deterministic in the seed") {
  const MotionDataset ds = linear_pair(120, 5);
  const auto [m1, r1] = train_dual_autoencoder(ds, latent3(), quick_config(7, 40));
  const auto [m2, r2] = train_dual_autoencoder(ds, latent3(), quick_config(7, 40));
  const auto [m3, r3] = train_dual_autoencoder(ds, latent3(), quick_config(8, 40));

  REQUIRE((m1.encoder_a.layers[0].weights - m2.encoder_a.layers[0].weights)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  REQUIRE((m1.decoder_b.layers.back().biases - m2.decoder_b.layers.back().biases)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  REQUIRE(r1.total == r2.total);
  REQUIRE((m1.encoder_a.layers[0].weights - m3.encoder_a.layers[0].weights)
              .cwiseAbs()
              .maxCoeff() > 0.0);
}

TEST_CASE("degenerate feature rows are reported and survivable") {
  MotionDataset ds = linear_pair(100, 6);
  ds.features_a.conservativeResize(4, Eigen::NoChange);
  ds.features_a.row(3).setConstant(0.25);

  const auto [model, report] = train_dual_autoencoder(ds, latent3(), quick_config(3, 20));
  REQUIRE(report.degenerate_a == std::vector<int>{3});
  REQUIRE(report.degenerate_b.empty());
  REQUIRE(std::isfinite(report.final_total()));
  REQUIRE(map_forward(model, ds.features_a).allFinite());
}

TEST_CASE("direct baseline shares the glued architecture and learns forward") {
  const MotionDataset ds = linear_pair(400, 10);
  const auto [model, report] = train_direct(ds, latent3(), quick_config(11));

  // encoder taper + decoder taper, hidden tanh, final identity
  REQUIRE(model.net.layers.size() == 6);
  REQUIRE(model.net.input_width() == 3);
  REQUIRE(model.net.output_width() == 4);
  REQUIRE(model.net.layers[2].weights.rows() == 3);  // waist at the code width
  for (std::size_t i = 0; i + 1 < model.net.layers.size(); ++i)
    REQUIRE(model.net.layers[i].activation == Activation::tanh_fn);
  REQUIRE(model.net.layers.back().activation == Activation::identity);

  REQUIRE(report.loss_a.empty());
  REQUIRE(report.total.size() == 300);
  REQUIRE(report.final_total() < 0.25 * report.total.front());

  const MotionDataset fresh = linear_pair(200, 4321);
  REQUIRE(mean_abs(map_forward(model, fresh.features_a) - fresh.features_b) < 0.15);
}

TEST_CASE("mapping stages compose and police their boundaries") {
  const MotionDataset ab = linear_pair(300, 12);

  // Second hop: c = N b, width 2, learnable from b.
  MotionDataset bc;
  bc.agent_a = "synth_b";
  bc.agent_b = "synth_c";
  Eigen::Matrix<double, 2, 4> n2;
  n2 << 0.6, -0.2, 0.3, 0.1,
        -0.4, 0.5, 0.2, -0.3;
  bc.features_a = ab.features_b;
  bc.features_b = n2 * ab.features_b;

  ArchSpec arch_bc;
  arch_bc.latent_width = 2;
  const auto dual_ab =
      std::make_shared<DualAutoencoderModel>(
          train_dual_autoencoder(ab, latent3(), quick_config(13)).first);
  const auto dual_bc =
      std::make_shared<DualAutoencoderModel>(
          train_dual_autoencoder(bc, arch_bc, quick_config(14)).first);
  const auto direct_ab =
      std::make_shared<DirectMapModel>(
          train_direct(ab, latent3(), quick_config(15, 50)).first);

  const MappingStage s1 = MappingStage::from_dual(dual_ab);
  const MappingStage s2 = MappingStage::from_dual(dual_bc);
  REQUIRE(s1.from_agent() == "synth_a");
  REQUIRE(s1.to_agent() == "synth_b");
  REQUIRE(s1.in_width() == 3);
  REQUIRE(s1.out_width() == 4);

  const Eigen::MatrixXd x = ab.features_a.leftCols(20);
  const ChainMapResult chained = chain_map({s1, s2}, x);
  REQUIRE(chained.stage_outputs.size() == 2);

  // The chain is exactly stage-by-stage application: every intermediate is
  // decoded to native features before the next hop.
  const Eigen::MatrixXd manual = map_forward(*dual_bc, map_forward(*dual_ab, x));
  REQUIRE((chained.output() - manual).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((chained.stage_outputs[0] - map_forward(*dual_ab, x)).cwiseAbs().maxCoeff() == 0.0);

  // Reversed dual stage swaps its endpoints; a reversed chain round-trips.
  const MappingStage back = MappingStage::from_dual(dual_ab, true);
  REQUIRE(back.from_agent() == "synth_b");
  REQUIRE(back.to_agent() == "synth_a");
  const ChainMapResult round = chain_map({s1, back}, x);
  REQUIRE(mean_abs(round.output() - x) < 0.3);

  // Broken adjacency: b->c cannot follow b->c.
  REQUIRE_THROWS_AS(chain_map({s2, s2}, bc.features_a.leftCols(5)),
                    ValidationError);
  // Wrong input width for the first stage.
  REQUIRE_THROWS_AS(chain_map({s1, s2}, Eigen::MatrixXd::Zero(4, 5)),
                    ValidationError);
  REQUIRE_THROWS_AS(chain_map({}, x), ValidationError);

  // A direct stage never runs backward, and a stage wraps exactly one model.
  MappingStage bad_direct = MappingStage::from_direct(direct_ab);
  bad_direct.reverse = true;
  REQUIRE_THROWS_AS(bad_direct.validate(), ValidationError);
  MappingStage both = MappingStage::from_direct(direct_ab);
  both.dual = dual_ab;
  REQUIRE_THROWS_AS(both.validate(), ValidationError);
  MappingStage neither;
  REQUIRE_THROWS_AS(neither.validate(), ValidationError);
}

TEST_CASE("training config validation") {
  const MotionDataset ds = linear_pair(50, 1);
  TrainConfig bad = quick_config(1);
  bad.batch_size = 0;
  REQUIRE_THROWS_AS(train_dual_autoencoder(ds, latent3(), bad), ValidationError);
  bad = quick_config(1);
  bad.epochs = 0;
  REQUIRE_THROWS_AS(train_dual_autoencoder(ds, latent3(), bad), ValidationError);
  bad = quick_config(1);
  bad.learning_rate = 0.0;
  REQUIRE_THROWS_AS(train_direct(ds, latent3(), bad), ValidationError);
  bad = quick_config(1);
  bad.latent_loss_weight = -0.5;
  REQUIRE_THROWS_AS(train_dual_autoencoder(ds, latent3(), bad), ValidationError);
}
