// Command-line front end for the symap library: dataset generation, model
// training, evaluation, mapping, transferability analysis, and fleet
// planning.  Every artifact starts with a provenance header (tool version,
// normalized command, seeds, input digests) and contains no timestamps, so a
// rerun with identical flags is byte-identical.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "symap/symap.hpp"

namespace fs = std::filesystem;
using namespace symap;

namespace {

fs::path resolve_out(const fs::path& out_dir, const fs::path& p) {
  return p.is_absolute() ? p : out_dir / p;
}

// Seed for one agent's workspace sampling, derived from the base seed and
// the agent's name.  Two identical agents therefore see identical grids,
// and a rerun reproduces them exactly.
std::uint64_t seed_for(std::uint64_t base, const std::string& label) {
  Fnv1a64 h;
  h.update(label);
  return base ^ h.value();
}

// Agents referenced by an invocation, loaded once and looked up by name.
class AgentSet {
 public:
  void load(const fs::path& path, Provenance& prov) {
    AgentModel agent = load_agent(path);
    prov.inputs.emplace_back("agent " + agent.name, digest_file(path));
    agents_.emplace(agent.name, std::move(agent));
  }

  const AgentModel& get(const std::string& name) const {
    const auto it = agents_.find(name);
    if (it == agents_.end())
      throw ValidationError("no --agent file describes '" + name +
                            "'; pass its description");
    return it->second;
  }

 private:
  std::map<std::string, AgentModel> agents_;
};

// Orients a stored pair model so it maps out of `need_from`.  Dual models
// run either way; the direct baseline only forward.
MappingStage orient(const StoredModel& model, const std::string& need_from) {
  if (model.agent_a() == need_from)
    return model.dual ? MappingStage::from_dual(model.dual)
                      : MappingStage::from_direct(model.direct);
  if (model.dual && model.agent_b() == need_from)
    return MappingStage::from_dual(model.dual, true);
  throw ValidationError("model for (" + model.agent_a() + ", " +
                        model.agent_b() + ") cannot map from '" + need_from +
                        "'");
}

// Architecture implied by a stored model, for retraining during
// cross-validation.
ArchSpec arch_of(const StoredModel& model) {
  ArchSpec arch;
  const NetworkParams* coder = nullptr;
  if (model.dual) {
    arch.latent_width = model.dual->latent_width();
    arch.hidden_layers = static_cast<int>(model.dual->encoder_a.layers.size()) - 1;
    coder = &model.dual->encoder_a;
  } else {
    const auto& layers = model.direct->net.layers;
    arch.hidden_layers = static_cast<int>(layers.size()) / 2 - 1;
    arch.latent_width = static_cast<int>(
        layers[layers.size() / 2 - 1].weights.rows());
    coder = &model.direct->net;
  }
  // Hidden widths are either the default geometric taper or one uniform
  // width; tell them apart by recomputing the taper.
  if (arch.hidden_layers > 0) {
    const int input = static_cast<int>(coder->layers.front().weights.cols());
    const std::vector<int> taper = detail::taper_widths(
        input, arch.latent_width, arch.hidden_layers);
    const int first_hidden =
        static_cast<int>(coder->layers.front().weights.rows());
    if (first_hidden != taper[1]) arch.hidden_width = first_hidden;
  }
  return arch;
}

std::string chain_label(const std::vector<MappingStage>& stages) {
  std::string label = stages.front().from_agent();
  for (const auto& s : stages) label += "->" + s.to_agent();
  return label;
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataOptions {
  fs::path leader, follower, correspondence, out;
  long long samples = 500;
  bool clean = false;
  std::uint64_t seed = 0;
  fs::path out_dir;
};

void run_gen_data(const GenDataOptions& opt) {
  Provenance prov;
  const AgentModel leader = load_agent(opt.leader);
  const AgentModel follower = load_agent(opt.follower);
  const CorrespondenceMap corr = load_correspondence(opt.correspondence);
  prov.inputs.emplace_back("leader " + leader.name, digest_file(opt.leader));
  prov.inputs.emplace_back("follower " + follower.name, digest_file(opt.follower));
  prov.inputs.emplace_back("correspondence", digest_file(opt.correspondence));

  Rng rng(opt.seed);
  const std::uint64_t record_seed = rng.next_u64();
  const std::uint64_t noise_seed = rng.next_u64();

  MotionDataset ds =
      generate_paired_dataset(leader, follower, corr, opt.samples, record_seed);
  if (!opt.clean)
    ds = add_sensor_noise(ds, leader.sensor_noise_sigma,
                          follower.sensor_noise_sigma, noise_seed);

  std::ostringstream cmd;
  cmd << "gen-data leader=" << leader.name << " follower=" << follower.name
      << " samples=" << opt.samples << " noise=" << (opt.clean ? 0 : 1)
      << " seed=" << opt.seed;
  prov.command = cmd.str();
  prov.seeds = {opt.seed, record_seed};
  if (!opt.clean) prov.seeds.push_back(noise_seed);

  const fs::path out = resolve_out(opt.out_dir, opt.out);
  export_dataset(out, ds, prov);
  std::cout << "wrote " << out.string() << ": samples=" << ds.size()
            << " mean_mimic_objective=" << format_double(ds.mean_mimic_objective)
            << "\n";
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  fs::path dataset, out, loss_csv;
  std::string method = "dual";
  ArchSpec arch;
  TrainConfig config;
  fs::path out_dir;
};

void run_train(const TrainOptions& opt) {
  Provenance prov;
  const MotionDataset ds = import_dataset(opt.dataset);
  prov.inputs.emplace_back("dataset", digest_file(opt.dataset));

  std::ostringstream cmd;
  cmd << "train method=" << opt.method << " latent=" << opt.arch.latent_width
      << " hidden=" << opt.arch.hidden_layers
      << " hidden-width=" << opt.arch.hidden_width
      << " epochs=" << opt.config.epochs
      << " batch-size=" << opt.config.batch_size
      << " learning-rate=" << format_double(opt.config.learning_rate)
      << " latent-weight=" << format_double(opt.config.latent_loss_weight)
      << " seed=" << opt.config.seed;
  prov.command = cmd.str();
  prov.seeds = {opt.config.seed};

  const fs::path model_path = resolve_out(opt.out_dir, opt.out);
  fs::path loss_path = opt.loss_csv.empty()
                           ? fs::path(model_path).replace_extension(".loss.csv")
                           : resolve_out(opt.out_dir, opt.loss_csv);

  LossReport losses;
  if (map_method_from_string(opt.method) == MapMethod::dual) {
    auto [model, report] = train_dual_autoencoder(ds, opt.arch, opt.config);
    losses = std::move(report);
    save_model(model_path, model, prov);
  } else {
    auto [model, report] = train_direct(ds, opt.arch, opt.config);
    losses = std::move(report);
    save_model(model_path, model, prov);
  }
  write_file(loss_path, loss_report_csv(losses, prov));
  std::cout << "wrote " << model_path.string() << ": final_loss="
            << format_double(losses.final_total()) << "\n";
  std::cout << "wrote " << loss_path.string() << "\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::vector<fs::path> models;
  fs::path dataset, out;
  std::vector<fs::path> stage_datasets;
  std::vector<fs::path> agent_paths;
  std::vector<std::string> keypoints;
  int folds = 0;  // 0: holdout on the full dataset
  TrainConfig config;
  fs::path out_dir;
};

void run_eval(const EvalOptions& opt) {
  Provenance prov;
  AgentSet agents;
  for (const auto& p : opt.agent_paths) agents.load(p, prov);

  std::vector<StoredModel> models;
  for (const auto& p : opt.models) {
    models.push_back(load_model(p));
    prov.inputs.emplace_back("model " + std::to_string(models.size()),
                             digest_file(p));
  }
  const MotionDataset ds = import_dataset(opt.dataset);
  prov.inputs.emplace_back("dataset", digest_file(opt.dataset));

  std::ostringstream cmd;
  cmd << "eval models=" << models.size() << " folds=" << opt.folds;
  if (opt.folds >= 2)
    cmd << " epochs=" << opt.config.epochs << " batch-size="
        << opt.config.batch_size << " learning-rate="
        << format_double(opt.config.learning_rate) << " latent-weight="
        << format_double(opt.config.latent_loss_weight) << " seed="
        << opt.config.seed;
  for (const auto& kp : opt.keypoints) cmd << " keypoint=" << kp;
  prov.command = cmd.str();
  if (opt.folds >= 2) prov.seeds = {opt.config.seed};

  std::vector<std::pair<std::string, const EvalReport*>> sections;
  std::vector<std::unique_ptr<EvalReport>> owned;
  const auto keep = [&](EvalReport r) {
    owned.push_back(std::make_unique<EvalReport>(std::move(r)));
    return owned.back().get();
  };

  if (models.size() == 1) {
    if (!opt.stage_datasets.empty())
      throw ValidationError("stage datasets apply to multi-model chains");
    const StoredModel& model = models.front();
    if (model.agent_a() != ds.agent_a || model.agent_b() != ds.agent_b)
      throw ValidationError(
          "dataset (" + ds.agent_a + ", " + ds.agent_b +
          ") does not match the model (" + model.agent_a() + ", " +
          model.agent_b() + ")");
    const AgentModel& agent_a = agents.get(ds.agent_a);
    const AgentModel& agent_b = agents.get(ds.agent_b);

    if (opt.folds >= 2) {
      if (!opt.keypoints.empty())
        throw ValidationError(
            "keypoint selection is not available with cross-validation");
      const MapMethod method =
          model.dual ? MapMethod::dual : MapMethod::direct;
      const CrossValReport cv = cross_validate(ds, agent_a, agent_b, method,
                                               arch_of(model), opt.config,
                                               opt.folds);
      sections.emplace_back("forward", keep(cv.forward));
      if (cv.has_backward) sections.emplace_back("backward", keep(cv.backward));
    } else {
      const MappingStage stage = orient(model, ds.agent_a);
      sections.emplace_back(
          "forward", keep(avg_distance_error(agent_b, stage.apply(ds.features_a),
                                             ds.features_b, opt.keypoints)));
      if (model.dual)
        sections.emplace_back(
            "backward",
            keep(avg_distance_error(agent_a, map_backward(*model.dual, ds.features_b),
                                    ds.features_a)));
    }
  } else {
    if (opt.folds >= 2)
      throw ValidationError("cross-validation applies to a single pair model");
    // Orient every stage by walking the chain from the dataset's side a.
    std::vector<MappingStage> stages;
    std::string at = ds.agent_a;
    for (const StoredModel& model : models) {
      stages.push_back(orient(model, at));
      at = stages.back().to_agent();
    }
    if (at != ds.agent_b)
      throw ValidationError("chain ends at '" + at +
                            "' but the dataset pairs with '" + ds.agent_b + "'");

    // Optional per-stage hold-out errors, each computed exactly as a
    // standalone single-model evaluation of that stage would.
    if (!opt.stage_datasets.empty()) {
      if (opt.stage_datasets.size() != stages.size())
        throw ValidationError("one stage dataset per model required");
      for (std::size_t i = 0; i < stages.size(); ++i) {
        const MappingStage& stage = stages[i];
        const AgentModel& from = agents.get(stage.from_agent());
        const AgentModel& to = agents.get(stage.to_agent());
        const MotionDataset stage_ds =
            import_dataset(opt.stage_datasets[i], &from, &to);
        prov.inputs.emplace_back("stage dataset " + std::to_string(i + 1),
                                 digest_file(opt.stage_datasets[i]));
        sections.emplace_back(
            "stage" + std::to_string(i + 1),
            keep(avg_distance_error(to, stage.apply(stage_ds.features_a),
                                    stage_ds.features_b)));
      }
    }

    const AgentModel& target = agents.get(ds.agent_b);
    const ChainMapResult chained = chain_map(stages, ds.features_a);
    sections.emplace_back(
        "chain", keep(avg_distance_error(target, chained.output(),
                                         ds.features_b, opt.keypoints)));
  }

  const fs::path out = resolve_out(opt.out_dir, opt.out);
  write_file(out, eval_report_csv(sections, prov));
  std::cout << "wrote " << out.string();
  for (const auto& [name, report] : sections)
    std::cout << " " << name << "=" << format_double(report->total_mean);
  std::cout << "\n";
}

// ---------------------------------------------------------------------------
// map / chain-map

struct MapOptions {
  std::vector<fs::path> models;
  fs::path dataset, target_agent, out;
  fs::path out_dir;
};

void run_map(const MapOptions& opt) {
  Provenance prov;
  std::vector<StoredModel> models;
  for (const auto& p : opt.models) {
    models.push_back(load_model(p));
    prov.inputs.emplace_back("model " + std::to_string(models.size()),
                             digest_file(p));
  }
  const MotionDataset ds = import_dataset(opt.dataset);
  prov.inputs.emplace_back("dataset", digest_file(opt.dataset));
  const AgentModel target = load_agent(opt.target_agent);
  prov.inputs.emplace_back("agent " + target.name,
                           digest_file(opt.target_agent));

  std::vector<MappingStage> stages;
  std::string at = ds.agent_a;
  for (const StoredModel& model : models) {
    stages.push_back(orient(model, at));
    at = stages.back().to_agent();
  }
  if (at != target.name)
    throw ValidationError("chain ends at '" + at + "' but --target-agent is '" +
                          target.name + "'");
  if (stages.back().out_width() != target.feature_width())
    throw ValidationError("chain output width does not match '" + target.name +
                          "'");

  const ChainMapResult result = chain_map(stages, ds.features_a);

  MotionDataset out_ds;
  out_ds.agent_a = ds.agent_a;
  out_ds.agent_b = target.name;
  out_ds.encoding_a = ds.encoding_a;
  out_ds.encoding_b = target.feature_encoding;
  out_ds.features_a = ds.features_a;
  out_ds.features_b = result.output();
  out_ds.seed = ds.seed;
  out_ds.noise_sigma_a = ds.noise_sigma_a;

  prov.command = "map chain=" + chain_label(stages);
  const fs::path out = resolve_out(opt.out_dir, opt.out);
  export_dataset(out, out_ds, prov);
  std::cout << "wrote " << out.string() << ": " << chain_label(stages)
            << " samples=" << out_ds.size() << "\n";
}

// ---------------------------------------------------------------------------
// transfer

struct TransferOptions {
  fs::path agent_a, agent_b, out;
  std::string chain_a, chain_b;
  long long samples = 60000;
  double cell_size = 0.0;
  double half_extent = 0.0;
  double sigma_best = 0.0;
  std::uint64_t seed = 0;
  fs::path out_dir;
};

void run_transfer(const TransferOptions& opt) {
  Provenance prov;
  const AgentModel a = load_agent(opt.agent_a);
  const AgentModel b = load_agent(opt.agent_b);
  prov.inputs.emplace_back("agent " + a.name, digest_file(opt.agent_a));
  if (opt.agent_b != opt.agent_a)
    prov.inputs.emplace_back("agent " + b.name, digest_file(opt.agent_b));

  const auto pick_chain = [](const AgentModel& agent, const std::string& name) {
    if (!name.empty()) return agent.chain(name).name;
    detail::require(!agent.chains.empty(),
                    "agent '" + agent.name + "' declares no chains");
    return agent.chains.front().name;
  };
  const std::string chain_a = pick_chain(a, opt.chain_a);
  const std::string chain_b = pick_chain(b, opt.chain_b);

  // Both workspaces must land on one shared lattice to be comparable cell
  // by cell, so the grid geometry is fixed up front from the pair.
  GridSpec spec;
  spec.cell_size = opt.cell_size > 0.0
                       ? opt.cell_size
                       : std::max(a.total_length(), b.total_length()) / 20.0;
  spec.half_extent =
      opt.half_extent > 0.0
          ? opt.half_extent
          : std::max(a.path_length(a.chain(chain_a).last_joint),
                     b.path_length(b.chain(chain_b).last_joint));

  const double sigma_best =
      opt.sigma_best > 0.0
          ? opt.sigma_best
          : std::min(a.sensor_noise_sigma, b.sensor_noise_sigma);

  const std::uint64_t seed_a = seed_for(opt.seed, a.name);
  const std::uint64_t seed_b = seed_for(opt.seed, b.name);
  const WorkspaceGrid grid_a =
      sample_workspace(a, chain_a, opt.samples, spec, seed_a);
  const WorkspaceGrid grid_b =
      sample_workspace(b, chain_b, opt.samples, spec, seed_b);

  const std::vector<TransferabilityReport> rows = {
      transferability(a, b, grid_a, grid_b, sigma_best),
      transferability(b, a, grid_b, grid_a, sigma_best)};

  std::ostringstream cmd;
  cmd << "transfer a=" << a.name << ":" << chain_a << " b=" << b.name << ":"
      << chain_b << " samples=" << opt.samples << " cell-size="
      << format_double(spec.cell_size) << " half-extent="
      << format_double(spec.half_extent) << " sigma-best="
      << format_double(sigma_best) << " seed=" << opt.seed;
  prov.command = cmd.str();
  prov.seeds = {opt.seed, seed_a, seed_b};

  const fs::path out = resolve_out(opt.out_dir, opt.out);
  write_file(out, transfer_report_csv(rows, prov));
  std::cout << "wrote " << out.string();
  for (const auto& r : rows)
    std::cout << " T(" << r.from_agent << "->" << r.to_agent
              << ")=" << format_double(r.value);
  std::cout << "\n";
}

// ---------------------------------------------------------------------------
// plan

struct PlanOptions {
  fs::path fleet, candidates, out;
  std::string new_agent;
  std::string kind = "robot";
  std::string objective = "worst_counterpart";
  fs::path out_dir;
};

void run_plan(const PlanOptions& opt) {
  Provenance prov;
  const FleetGraph fleet = load_fleet(opt.fleet);
  const std::vector<CandidateAttachment> candidates =
      load_candidates(opt.candidates);
  prov.inputs.emplace_back("fleet", digest_file(opt.fleet));
  prov.inputs.emplace_back("candidates", digest_file(opt.candidates));
  prov.command = "plan new-agent=" + opt.new_agent + " kind=" + opt.kind +
                 " objective=" + opt.objective;

  const AgentKind kind = agent_kind_from_string(opt.kind);
  const PlanObjective objective =
      opt.objective == "best_counterpart" ? PlanObjective::best_counterpart
                                          : PlanObjective::worst_counterpart;
  const ChainPlan plan =
      plan_chain(fleet, opt.new_agent, kind, candidates, objective);

  // Model-count economics with the new agent on board: one model per
  // human-robot pair versus one chain spanning the fleet.
  long long n_humans = kind == AgentKind::human ? 1 : 0;
  long long n_robots = kind == AgentKind::robot ? 1 : 0;
  for (const auto& agent : fleet.agents)
    (agent.kind == AgentKind::human ? n_humans : n_robots) += 1;
  const auto [pairwise, chained] = min_models(n_humans, n_robots);

  std::string report = plan_report(plan, prov);
  report += "models," + std::to_string(pairwise) + "," +
            std::to_string(chained) + "\n";

  const fs::path out = resolve_out(opt.out_dir, opt.out);
  write_file(out, report);
  std::cout << "wrote " << out.string() << ": attach " << plan.new_agent
            << " to " << plan.chosen << " (objective="
            << format_double(plan.chosen_value) << ", models " << pairwise
            << " pairwise vs " << chained << " chained)\n";
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceOptions {
  std::uint64_t seed = 0;
  fs::path out_dir;
  bool quick = false;
  int epochs = 150;
  int folds = 3;
  long long grid_samples = 60000;
  long long n_large_robot = 740;
  long long n_small_robot = 788;
  long long n_large_small = 660;
  long long eval_samples = 600;
};

void run_reproduce(const ReproduceOptions& opt) {
  const fs::path base = opt.out_dir;
  Provenance prov;
  {
    std::ostringstream cmd;
    cmd << "reproduce epochs=" << opt.epochs << " folds=" << opt.folds
        << " grid-samples=" << opt.grid_samples << " samples="
        << opt.n_large_robot << "," << opt.n_small_robot << ","
        << opt.n_large_small << " eval-samples=" << opt.eval_samples
        << " seed=" << opt.seed;
    prov.command = cmd.str();
    prov.seeds = {opt.seed};
  }
  const auto note = [&](const fs::path& p) {
    std::cout << "wrote " << p.string() << "\n";
  };

  const AgentModel small = fixture_small_human();
  const AgentModel large = fixture_large_human();
  const AgentModel robot = fixture_robot();
  for (const AgentModel* agent : {&small, &large, &robot}) {
    const fs::path p = base / "agents" / (agent->name + ".json");
    save_agent(p, *agent);
    note(p);
  }
  const std::vector<std::pair<std::string, CorrespondenceMap>> corrs = {
      {"corr_human_to_human", fixture_corr_human_to_human()},
      {"corr_robot_to_human", fixture_corr_robot_to_human()},
      {"corr_human_to_robot", fixture_corr_human_to_robot()}};
  for (const auto& [name, map] : corrs) {
    const fs::path p = base / "agents" / (name + ".json");
    save_correspondence(p, map);
    note(p);
  }

  // Paired recording sessions.
  const FixtureDatasets sessions = fixture_datasets(
      opt.seed, opt.n_large_robot, opt.n_small_robot, opt.n_large_small);
  struct PairJob {
    const char* tag;
    const MotionDataset* ds;
    const AgentModel* a;
    const AgentModel* b;
  };
  const std::vector<PairJob> jobs = {
      {"large_robot", &sessions.large_robot, &large, &robot},
      {"small_robot", &sessions.small_robot, &small, &robot},
      {"large_small", &sessions.large_small, &large, &small}};
  for (const auto& job : jobs) {
    const fs::path p = base / "datasets" / (std::string(job.tag) + ".txt");
    export_dataset(p, *job.ds, prov);
    note(p);
  }

  // Directed transferability between every pair, all on one lattice.
  const GridSpec spec = fixture_grid_spec();
  std::map<std::string, const AgentModel*> cast = {
      {small.name, &small}, {large.name, &large}, {robot.name, &robot}};
  std::map<std::string, WorkspaceGrid> grids;
  for (const auto& [name, agent] : cast)
    grids.emplace(name, sample_workspace(*agent, agent->chains.front().name,
                                         opt.grid_samples, spec,
                                         seed_for(opt.seed, name)));
  std::vector<TransferabilityReport> transfer_rows;
  std::map<std::pair<std::string, std::string>, double> t_value;
  for (const auto& [from_name, from] : cast)
    for (const auto& [to_name, to] : cast) {
      if (from_name == to_name) continue;
      transfer_rows.push_back(transferability(*from, *to, grids.at(from_name),
                                              grids.at(to_name),
                                              fixture_sigma_best()));
      t_value[{from_name, to_name}] = transfer_rows.back().value;
    }
  {
    const fs::path p = base / "reports" / "transfer.csv";
    write_file(p, transfer_report_csv(transfer_rows, prov));
    note(p);
  }

  // One model of each kind per pair, plus cross-validated errors.
  std::map<std::string, std::shared_ptr<DualAutoencoderModel>> duals;
  for (const auto& job : jobs) {
    for (const std::string method : {"dual", "direct"}) {
      TrainConfig cfg;
      cfg.epochs = opt.epochs;
      cfg.seed = seed_for(opt.seed, "train:" + std::string(job.tag) + ":" + method);
      const fs::path model_path =
          base / "models" / (std::string(job.tag) + "_" + method + ".model");
      LossReport losses;
      if (method == "dual") {
        auto [model, report] = train_dual_autoencoder(*job.ds, ArchSpec{}, cfg);
        losses = std::move(report);
        save_model(model_path, model, prov);
        duals[job.tag] =
            std::make_shared<DualAutoencoderModel>(std::move(model));
      } else {
        auto [model, report] = train_direct(*job.ds, ArchSpec{}, cfg);
        losses = std::move(report);
        save_model(model_path, model, prov);
      }
      note(model_path);
      const fs::path loss_path =
          base / "models" / (std::string(job.tag) + "_" + method + ".loss.csv");
      write_file(loss_path, loss_report_csv(losses, prov));
      note(loss_path);

      TrainConfig cv_cfg = cfg;
      cv_cfg.seed = seed_for(opt.seed, "cv:" + std::string(job.tag) + ":" + method);
      const CrossValReport cv = cross_validate(
          *job.ds, *job.a, *job.b, map_method_from_string(method), ArchSpec{},
          cv_cfg, opt.folds);
      std::vector<std::pair<std::string, const EvalReport*>> sections = {
          {"forward", &cv.forward}};
      if (cv.has_backward) sections.emplace_back("backward", &cv.backward);
      const fs::path eval_path =
          base / "reports" /
          ("eval_" + std::string(job.tag) + "_" + method + ".csv");
      write_file(eval_path, eval_report_csv(sections, prov));
      note(eval_path);
    }
  }

  // Both chain orders into the robot, each scored on a fresh demonstration
  // session none of its stages saw during training.
  const FixtureEvalSessions eval_sessions =
      fixture_eval_sessions(seed_for(opt.seed, "eval-sessions"),
                            opt.eval_samples);
  struct ChainJob {
    std::vector<MappingStage> stages;
    const MotionDataset* eval_ds;  // side a: chain input, side b: reference
  };
  const auto run_chain = [&](const ChainJob& job) {
    const ChainMapResult mapped =
        chain_map(job.stages, job.eval_ds->features_a);
    return avg_distance_error(robot, mapped.output(), job.eval_ds->features_b);
  };
  const ChainJob chain_from_large = {
      {MappingStage::from_dual(duals.at("large_small")),
       MappingStage::from_dual(duals.at("small_robot"))},
      &eval_sessions.large_robot};
  const ChainJob chain_from_small = {
      {MappingStage::from_dual(duals.at("large_small"), true),
       MappingStage::from_dual(duals.at("large_robot"))},
      &eval_sessions.small_robot};
  const EvalReport err_large = run_chain(chain_from_large);
  const EvalReport err_small = run_chain(chain_from_small);
  const std::string label_large = chain_label(chain_from_large.stages);
  const std::string label_small = chain_label(chain_from_small.stages);
  {
    const fs::path p = base / "reports" / "eval_chains.csv";
    write_file(p, eval_report_csv(
                      {{label_large, &err_large}, {label_small, &err_small}},
                      prov));
    note(p);
  }
  const auto product_t = [&](const std::vector<MappingStage>& stages) {
    std::vector<double> hops;
    for (const auto& s : stages)
      hops.push_back(t_value.at({s.from_agent(), s.to_agent()}));
    return chain_transferability(hops);
  };
  {
    std::ostringstream out;
    out << prov.header("chain-summary");
    out << "chain,product_t,mean_error_m,stddev_m,samples\n";
    for (const auto& [label, stages, report] :
         {std::tie(label_large, chain_from_large.stages, err_large),
          std::tie(label_small, chain_from_small.stages, err_small)})
      out << label << "," << format_double(product_t(stages)) << ","
          << format_double(report.total_mean) << ","
          << format_double(report.total_stddev) << "," << report.samples
          << "\n";
    const fs::path p = base / "reports" / "chain_summary.csv";
    write_file(p, out.str());
    note(p);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symap: chain motion mapping between kinematic agents"};
  app.set_version_flag("--version", std::string("symap ") + version_string);
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a config file");

  std::uint64_t seed = 0;
  fs::path out_dir = ".";
  app.add_option("--seed", seed, "base random seed")->capture_default_str();
  app.add_option("--out-dir", out_dir, "directory output paths resolve against")
      ->capture_default_str();

  GenDataOptions gen;
  CLI::App* cmd_gen = app.add_subcommand(
      "gen-data", "record a paired imitation session as a dataset");
  cmd_gen->add_option("--leader", gen.leader, "leader agent description (json)")
      ->required();
  cmd_gen->add_option("--follower", gen.follower, "follower agent description (json)")
      ->required();
  cmd_gen->add_option("--correspondence", gen.correspondence,
                      "keypoint correspondence map (json)")
      ->required();
  cmd_gen->add_option("--samples", gen.samples, "number of paired samples")
      ->capture_default_str();
  cmd_gen->add_flag("--clean", gen.clean, "skip the sensor-noise pass");
  cmd_gen->add_option("--out", gen.out, "output dataset path")->required();

  TrainOptions train;
  CLI::App* cmd_train =
      app.add_subcommand("train", "fit a pair mapping model on a dataset");
  cmd_train->add_option("--dataset", train.dataset, "paired dataset file")
      ->required();
  cmd_train
      ->add_option("--method", train.method,
                   "dual (bidirectional autoencoders) or direct (one-way)")
      ->check(CLI::IsMember({"dual", "direct"}))
      ->capture_default_str();
  cmd_train->add_option("--latent", train.arch.latent_width,
                        "shared code width (0: derive from feature widths)")
      ->capture_default_str();
  cmd_train->add_option("--hidden", train.arch.hidden_layers,
                        "hidden layers per coder")
      ->capture_default_str();
  cmd_train->add_option("--hidden-width", train.arch.hidden_width,
                        "uniform hidden width (0: geometric taper)")
      ->capture_default_str();
  cmd_train->add_option("--epochs", train.config.epochs, "training epochs")
      ->capture_default_str();
  cmd_train->add_option("--batch-size", train.config.batch_size, "minibatch size")
      ->capture_default_str();
  cmd_train->add_option("--learning-rate", train.config.learning_rate,
                        "adam step size")
      ->capture_default_str();
  cmd_train->add_option("--latent-weight", train.config.latent_loss_weight,
                        "weight of the shared-code alignment loss")
      ->capture_default_str();
  cmd_train->add_option("--out", train.out, "output model path")->required();
  cmd_train->add_option("--loss-csv", train.loss_csv,
                        "per-epoch loss table (default: model path with .loss.csv)");

  EvalOptions eval;
  CLI::App* cmd_eval = app.add_subcommand(
      "eval", "average distance error of a model or model chain");
  cmd_eval->add_option("--model", eval.models,
                       "model file; repeat in order for a chain")
      ->required();
  cmd_eval->add_option("--dataset", eval.dataset,
                       "dataset pairing the chain's endpoints")
      ->required();
  cmd_eval->add_option("--stage-dataset", eval.stage_datasets,
                       "per-stage dataset for intermediate errors (repeatable)");
  cmd_eval->add_option("--agent", eval.agent_paths,
                       "agent description for every agent involved (repeatable)")
      ->required();
  cmd_eval->add_option("--keypoint", eval.keypoints,
                       "restrict the final comparison to these keypoints");
  cmd_eval->add_option("--folds", eval.folds,
                       "k-fold cross-validation (0: plain holdout)")
      ->capture_default_str();
  cmd_eval->add_option("--epochs", eval.config.epochs,
                       "training epochs per fold")
      ->capture_default_str();
  cmd_eval->add_option("--batch-size", eval.config.batch_size, "minibatch size")
      ->capture_default_str();
  cmd_eval->add_option("--learning-rate", eval.config.learning_rate,
                       "adam step size")
      ->capture_default_str();
  cmd_eval->add_option("--latent-weight", eval.config.latent_loss_weight,
                       "weight of the shared-code alignment loss")
      ->capture_default_str();
  cmd_eval->add_option("--out", eval.out, "output csv path")->required();

  MapOptions map_opt;
  CLI::App* cmd_map = app.add_subcommand(
      "map", "map recorded motion through one pair model");
  CLI::App* cmd_chain_map = app.add_subcommand(
      "chain-map", "map recorded motion through a chain of pair models");
  for (CLI::App* c : {cmd_map, cmd_chain_map}) {
    c->add_option("--model", map_opt.models,
                  "model file; repeat in order for a chain")
        ->required();
    c->add_option("--dataset", map_opt.dataset,
                  "input dataset; its side a feeds the chain")
        ->required();
    c->add_option("--target-agent", map_opt.target_agent,
                  "agent description of the chain's destination")
        ->required();
    c->add_option("--out", map_opt.out, "output dataset path")->required();
  }

  TransferOptions transfer;
  CLI::App* cmd_transfer = app.add_subcommand(
      "transfer", "directed transferability of a pair, both ways");
  cmd_transfer->add_option("--agent-a", transfer.agent_a, "first agent (json)")
      ->required();
  cmd_transfer->add_option("--agent-b", transfer.agent_b, "second agent (json)")
      ->required();
  cmd_transfer->add_option("--chain-a", transfer.chain_a,
                           "chain of agent a (default: its first)");
  cmd_transfer->add_option("--chain-b", transfer.chain_b,
                           "chain of agent b (default: its first)");
  cmd_transfer->add_option("--samples", transfer.samples,
                           "workspace samples per agent")
      ->capture_default_str();
  cmd_transfer->add_option("--cell-size", transfer.cell_size,
                           "grid cell size in metres (0: derive)")
      ->capture_default_str();
  cmd_transfer->add_option("--half-extent", transfer.half_extent,
                           "grid half extent in metres (0: derive)")
      ->capture_default_str();
  cmd_transfer->add_option("--sigma-best", transfer.sigma_best,
                           "system-best sensor noise (0: best of the pair)")
      ->capture_default_str();
  cmd_transfer->add_option("--out", transfer.out, "output csv path")->required();

  PlanOptions plan;
  CLI::App* cmd_plan = app.add_subcommand(
      "plan", "choose where a new agent joins the fleet");
  cmd_plan->add_option("--fleet", plan.fleet, "fleet graph (json)")->required();
  cmd_plan->add_option("--new-agent", plan.new_agent, "id of the new agent")
      ->required();
  cmd_plan->add_option("--kind", plan.kind, "kind of the new agent")
      ->check(CLI::IsMember({"human", "robot"}))
      ->capture_default_str();
  cmd_plan->add_option("--candidates", plan.candidates,
                       "candidate attachments (json)")
      ->required();
  cmd_plan->add_option("--objective", plan.objective, "planning objective")
      ->check(CLI::IsMember({"worst_counterpart", "best_counterpart"}))
      ->capture_default_str();
  cmd_plan->add_option("--out", plan.out, "output report path")->required();

  ReproduceOptions repro;
  CLI::App* cmd_repro = app.add_subcommand(
      "reproduce", "build the three-agent demonstration study end to end");
  cmd_repro->add_flag("--quick", repro.quick,
                      "small sample counts and short training, for smoke tests");
  cmd_repro->add_option("--epochs", repro.epochs, "training epochs")
      ->capture_default_str();
  cmd_repro->add_option("--folds", repro.folds, "cross-validation folds")
      ->capture_default_str();
  cmd_repro->add_option("--grid-samples", repro.grid_samples,
                        "workspace samples per agent")
      ->capture_default_str();
  cmd_repro->add_option("--eval-samples", repro.eval_samples,
                        "samples per held-out chain evaluation session")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_gen->parsed()) {
      gen.seed = seed;
      gen.out_dir = out_dir;
      run_gen_data(gen);
    } else if (cmd_train->parsed()) {
      train.config.seed = seed;
      train.out_dir = out_dir;
      run_train(train);
    } else if (cmd_eval->parsed()) {
      eval.config.seed = seed;
      eval.out_dir = out_dir;
      run_eval(eval);
    } else if (cmd_map->parsed() || cmd_chain_map->parsed()) {
      map_opt.out_dir = out_dir;
      if (cmd_map->parsed() && map_opt.models.size() != 1)
        throw ValidationError("map takes exactly one model; use chain-map");
      run_map(map_opt);
    } else if (cmd_transfer->parsed()) {
      transfer.seed = seed;
      transfer.out_dir = out_dir;
      run_transfer(transfer);
    } else if (cmd_plan->parsed()) {
      plan.out_dir = out_dir;
      run_plan(plan);
    } else if (cmd_repro->parsed()) {
      repro.seed = seed;
      repro.out_dir = out_dir;
      if (repro.quick) {
        if (!cmd_repro->count("--epochs")) repro.epochs = 40;
        if (!cmd_repro->count("--grid-samples")) repro.grid_samples = 8000;
        repro.n_large_robot = 124;
        repro.n_small_robot = 132;
        repro.n_large_small = 110;
        if (!cmd_repro->count("--eval-samples")) repro.eval_samples = 120;
      }
      run_reproduce(repro);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
