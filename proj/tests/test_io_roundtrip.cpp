#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include "symap/agent_io.hpp"
#include "symap/dataset_io.hpp"
#include "symap/fixtures.hpp"
#include "symap/fleet_io.hpp"
#include "symap/model_io.hpp"
#include "symap/reports.hpp"

using namespace symap;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir =
      fs::temp_directory_path() / ("symap_io_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

MotionDataset tiny_dataset() {
  return generate_paired_dataset(fixture_robot(), fixture_small_human(),
                                 fixture_corr_robot_to_human(), 12, 31);
}

}  // namespace

TEST_CASE("agents round-trip through json") {
  const fs::path dir = temp_dir();
  for (const AgentModel& agent :
       {fixture_robot(), fixture_small_human(), fixture_large_human()}) {
    const fs::path file = dir / (agent.name + ".json");
    save_agent(file, agent);
    const AgentModel back = load_agent(file);
    // Equality via canonical serialization: every field shows up there.
    REQUIRE(agent_to_json(back).dump(2) == agent_to_json(agent).dump(2));
    back.validate();
  }

  // Optional total-length override survives the trip.
  AgentModel tweaked = fixture_robot();
  tweaked.total_length_override = 1.42;
  REQUIRE(agent_from_json(agent_to_json(tweaked)).total_length() == 1.42);

  REQUIRE_THROWS_AS(load_agent(dir / "missing.json"), IoError);
  write_file(dir / "broken.json", "{ not json");
  REQUIRE_THROWS_AS(load_agent(dir / "broken.json"), ParseError);
  write_file(dir / "schema.json", R"({"schema": 999})");
  REQUIRE_THROWS_AS(load_agent(dir / "schema.json"), ParseError);

  nlohmann::json bad = agent_to_json(fixture_robot());
  bad["feature_encoding"] = "quaternions";
  REQUIRE_THROWS_AS(agent_from_json(bad), ParseError);
  bad = agent_to_json(fixture_robot());
  bad["joints"][0]["axis"] = {0.0, 0.0};
  REQUIRE_THROWS_AS(agent_from_json(bad), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("datasets round-trip exactly, including bytes") {
  const MotionDataset ds = tiny_dataset();
  const MotionDataset noisy = add_sensor_noise(ds, 0.019, 0.019, 5);

  Provenance prov;
  prov.command = "unit-test";
  prov.seeds = {31, 5};
  prov.inputs = {{"leader", "fnv1a64:0"}};

  const std::string text = dataset_to_text(noisy, prov);
  const MotionDataset back = dataset_from_text(text);
  REQUIRE(back.agent_a == noisy.agent_a);
  REQUIRE(back.agent_b == noisy.agent_b);
  REQUIRE(back.encoding_a == noisy.encoding_a);
  REQUIRE(back.encoding_b == noisy.encoding_b);
  REQUIRE(back.seed == noisy.seed);
  REQUIRE(back.noise_sigma_a == noisy.noise_sigma_a);
  REQUIRE(back.noise_sigma_b == noisy.noise_sigma_b);
  REQUIRE(back.mean_mimic_objective == noisy.mean_mimic_objective);
  REQUIRE((back.features_a - noisy.features_a).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.features_b - noisy.features_b).cwiseAbs().maxCoeff() == 0.0);

  // Re-serialization reproduces the file byte for byte.
  REQUIRE(dataset_to_text(back, prov) == text);

  // Seeds cover the full unsigned range, beyond what a signed parse allows.
  MotionDataset big_seed = noisy;
  big_seed.seed = 18446744073709551615ull;
  REQUIRE(dataset_from_text(dataset_to_text(big_seed, prov)).seed ==
          big_seed.seed);

  // The header carries provenance and never a timestamp.
  REQUIRE(text.find("# command: unit-test") != std::string::npos);
  REQUIRE(text.find("# seed: 31") != std::string::npos);
  REQUIRE(text.find("time") == std::string::npos);

  // Agent pinning.
  const AgentModel robot = fixture_robot();
  const AgentModel small = fixture_small_human();
  REQUIRE_NOTHROW(dataset_from_text(text, &robot, &small));
  REQUIRE_THROWS_AS(dataset_from_text(text, &small, &robot), ParseError);
  AgentModel wrong_width = robot;
  wrong_width.joints.pop_back();
  wrong_width.link_lengths.pop_back();
  wrong_width.keypoints[1].link = 3;
  wrong_width.chains[0].last_joint = 3;
  REQUIRE_THROWS_AS(dataset_from_text(text, &wrong_width, &small), ParseError);
}

TEST_CASE("dataset parser rejects malformed input") {
  const std::string good = dataset_to_text(tiny_dataset());

  // Declared sample count must match the rows.
  std::string fewer = good;
  fewer.erase(fewer.rfind("sample,"));
  REQUIRE_THROWS_AS(dataset_from_text(fewer), ParseError);

  // Row with the wrong number of values.
  std::string short_row = good;
  short_row.resize(short_row.rfind("sample,"));
  short_row += "sample,0.5\n";
  REQUIRE_THROWS_AS(dataset_from_text(short_row), ParseError);

  // Unparseable number.
  std::string bad_num = good;
  bad_num.replace(bad_num.rfind("sample,") + 7, 3, "xyz");
  REQUIRE_THROWS_AS(dataset_from_text(bad_num), ParseError);

  // Unknown record kind and missing meta.
  REQUIRE_THROWS_AS(dataset_from_text("bogus,1,2\n"), ParseError);
  REQUIRE_THROWS_AS(dataset_from_text("meta,agent_a,x\n"), ParseError);
  REQUIRE_THROWS_AS(dataset_from_text(""), ParseError);
}

TEST_CASE("trained models round-trip with identical predictions") {
  const MotionDataset ds = tiny_dataset();
  ArchSpec arch;
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.seed = 2;

  const auto [dual, dual_losses] = train_dual_autoencoder(ds, arch, cfg);
  const auto [direct, direct_losses] = train_direct(ds, arch, cfg);

  const std::string dual_text = model_to_text(dual);
  const StoredModel dual_back = model_from_text(dual_text);
  REQUIRE(dual_back.dual);
  REQUIRE_FALSE(dual_back.direct);
  REQUIRE(dual_back.agent_a() == ds.agent_a);
  REQUIRE(model_to_text(*dual_back.dual) == dual_text);

  // Bit-identical behavior, both directions.
  REQUIRE((map_forward(*dual_back.dual, ds.features_a) -
           map_forward(dual, ds.features_a))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  REQUIRE((map_backward(*dual_back.dual, ds.features_b) -
           map_backward(dual, ds.features_b))
              .cwiseAbs()
              .maxCoeff() == 0.0);

  const std::string direct_text = model_to_text(direct);
  const StoredModel direct_back = model_from_text(direct_text);
  REQUIRE(direct_back.direct);
  REQUIRE(model_to_text(*direct_back.direct) == direct_text);
  REQUIRE((map_forward(*direct_back.direct, ds.features_a) -
           map_forward(direct, ds.features_a))
              .cwiseAbs()
              .maxCoeff() == 0.0);

  // File-level save/load.
  const fs::path dir = temp_dir();
  save_model(dir / "dual.model", dual);
  const StoredModel loaded = load_model(dir / "dual.model");
  REQUIRE(model_to_text(*loaded.dual) == dual_text);
  REQUIRE_THROWS_AS(load_model(dir / "nope.model"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("model parser rejects corrupted files") {
  const MotionDataset ds = tiny_dataset();
  TrainConfig cfg;
  cfg.epochs = 2;
  const auto [dual, losses] = train_dual_autoencoder(ds, ArchSpec{}, cfg);
  const std::string text = model_to_text(dual);

  // Dropping any single payload line must be caught by a count or shape
  // check somewhere.
  const std::vector<std::string> lines = payload_lines(text);
  for (std::size_t drop = 0; drop < lines.size(); drop += 7) {
    std::string mutated;
    for (std::size_t i = 0; i < lines.size(); ++i)
      if (i != drop) mutated += lines[i] + "\n";
    REQUIRE_THROWS_AS(model_from_text(mutated), ParseError);
  }

  REQUIRE_THROWS_AS(model_from_text(""), ParseError);
  REQUIRE_THROWS_AS(model_from_text("meta,kind,upside_down\n"), ParseError);
  REQUIRE_THROWS_AS(model_from_text("shrug\n"), ParseError);

  std::string bad_act = text;
  bad_act.replace(bad_act.find("tanh"), 4, "gelu");
  REQUIRE_THROWS_AS(model_from_text(bad_act), ParseError);
}

TEST_CASE("fleets and candidates round-trip through json") {
  FleetGraph fleet;
  fleet.agents = {{"h1", AgentKind::human},
                  {"h2", AgentKind::human},
                  {"r1", AgentKind::robot}};
  fleet.edges = {{"h2", "h1", 0.50792, 0.4542}, {"h1", "r1", 0.2335, 0.1368}};

  const fs::path dir = temp_dir();
  save_fleet(dir / "fleet.json", fleet);
  const FleetGraph back = load_fleet(dir / "fleet.json");
  REQUIRE(fleet_to_json(back).dump(2) == fleet_to_json(fleet).dump(2));

  nlohmann::json cand;
  cand["candidates"] = {{{"attach_to", "h1"},
                         {"t_existing_to_new", 0.2335},
                         {"t_new_to_existing", 0.0718}}};
  const auto parsed = candidates_from_json(cand);
  REQUIRE(parsed.size() == 1);
  REQUIRE(parsed[0].attach_to == "h1");
  REQUIRE(parsed[0].t_existing_to_new == 0.2335);

  REQUIRE_THROWS_AS(fleet_from_json(nlohmann::json::object()), ParseError);
  nlohmann::json bad = fleet_to_json(fleet);
  bad["agents"][0]["kind"] = "cyborg";
  REQUIRE_THROWS_AS(fleet_from_json(bad), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("report csvs are stable and self-describing") {
  // Perfect predictions produce an all-zero error table.
  const AgentModel robot = fixture_robot();
  Eigen::MatrixXd poses(robot.feature_width(), 4);
  Rng rng(3);
  for (int c = 0; c < 4; ++c) poses.col(c) = random_pose(robot, rng).angles;
  EvalReport perfect = avg_distance_error(robot, poses, poses);
  perfect.folds.push_back(perfect);

  const std::string csv =
      eval_report_csv({{"forward", &perfect}}, Provenance{});
  REQUIRE(csv.find("section,fold,keypoint,mean_m,stddev_m,samples") !=
          std::string::npos);
  for (const auto& line : payload_lines(csv)) {
    if (line.rfind("section", 0) == 0) continue;
    REQUIRE(line.find(",0,") != std::string::npos);
  }
  REQUIRE(csv.find("forward,all,total,0,0,4") != std::string::npos);

  // Loss CSV: dual layout carries the three parts, direct only totals.
  LossReport lr;
  lr.loss_a = {0.5, 0.25};
  lr.loss_b = {0.5, 0.2};
  lr.loss_latent = {0.1, 0.05};
  lr.total = {1.1, 0.5};
  lr.samples = 7;
  const std::string loss_csv = loss_report_csv(lr, Provenance{});
  REQUIRE(loss_csv.find("epoch,loss_a,loss_b,loss_latent,total") !=
          std::string::npos);
  REQUIRE(loss_csv.find("1,0.25,0.2,0.05,0.5") != std::string::npos);

  LossReport direct_lr;
  direct_lr.total = {0.9, 0.4};
  direct_lr.samples = 7;
  direct_lr.degenerate_a = {2};
  const std::string direct_csv = loss_report_csv(direct_lr, Provenance{});
  REQUIRE(direct_csv.find("epoch,total") != std::string::npos);
  REQUIRE(direct_csv.find("degenerate") != std::string::npos);

  // Transferability CSV re-validates every row.
  TransferabilityReport tr;
  tr.from_agent = "a";
  tr.to_agent = "b";
  tr.alpha = 0.76;
  tr.length = 0.5;
  tr.sufficient = 0.25;
  tr.dissim = 0.5;
  tr.value = transferability_value(tr.alpha, tr.length, tr.sufficient, tr.dissim);
  const std::string tcsv = transfer_report_csv({tr}, Provenance{});
  REQUIRE(tcsv.find("from,to,alpha,length_ratio,sufficient_ratio,"
                    "dissimilarity,transferability") != std::string::npos);
  REQUIRE(tcsv.find("a,b,0.76,0.5,0.25,0.5,") != std::string::npos);
  tr.value = 0.999;
  REQUIRE_THROWS_AS(transfer_report_csv({tr}, Provenance{}), ValidationError);
}
