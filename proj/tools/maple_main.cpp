#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "maple/config.hpp"
#include "maple/gradcheck.hpp"
#include "maple/logio.hpp"
#include "maple/rng.hpp"
#include "maple/sketch.hpp"
#include "maple/trainer.hpp"

namespace fs = std::filesystem;
using namespace maple;

namespace {

ExperimentConfig build_config(const std::string& file,
                              const std::vector<std::string>& sets) {
  ExperimentConfig cfg;
  if (!file.empty()) cfg = ExperimentConfig::from_file(file);
  cfg.apply_env_overrides();
  for (const std::string& kv : sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError(kv, "expected key=value");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void prepare_out(const ExperimentConfig& cfg, const std::string& out) {
  fs::create_directories(out);
  std::ofstream os(out + "/config.txt");
  if (!os) throw std::runtime_error("cannot write " + out + "/config.txt");
  os << cfg.describe();
}

int run_training(Trainer& trainer, const ExperimentConfig& cfg,
                 const std::string& out) {
  MetricsCsv csv(out + "/metrics.csv");
  TrajectoryLog traj(out + "/trajectories.jsonl");
  const std::vector<MetricRecord> records = trainer.run(&csv, &traj, out);
  const std::vector<TaskSketch> sketches =
      trainer.collect_sketches(cfg.sketch_episodes);
  write_sketches(out + "/sketches.jsonl", sketches);
  if (!records.empty()) {
    const MetricRecord& last = records.back();
    std::cout << "final env_steps=" << last.env_steps
              << " return_norm=" << last.return_norm
              << " success_rate=" << last.success_rate << "\n";
  }
  return 0;
}

int cmd_train(const std::string& config_file,
              const std::vector<std::string>& sets, const std::string& out) {
  const ExperimentConfig cfg = build_config(config_file, sets);
  prepare_out(cfg, out);
  Trainer trainer(cfg);
  return run_training(trainer, cfg, out);
}

int cmd_transfer(const std::string& config_file,
                 const std::vector<std::string>& sets, const std::string& out,
                 const std::string& sketch_file) {
  const ExperimentConfig cfg = build_config(config_file, sets);
  const std::vector<TaskSketch> source = read_sketches(sketch_file);
  const TransferSchedule sched = make_schedule(source, cfg);
  std::cout << "schedule:";
  for (PrimitiveId id : sched.tokens) std::cout << ' ' << primitive_name(id);
  std::cout << "\n";
  prepare_out(cfg, out);
  Trainer trainer(cfg, sched);
  return run_training(trainer, cfg, out);
}

int cmd_eval(const std::string& config_file,
             const std::vector<std::string>& sets, const std::string& ckpt,
             int episodes) {
  const ExperimentConfig cfg = build_config(config_file, sets);
  const TaskDef task = make_task(cfg.task);
  const PrimitiveLibrary lib = make_library(cfg.method, task);
  std::unique_ptr<Agent> agent = make_agent(cfg, task, lib);
  agent->load(Checkpoint::load(ckpt));

  auto rng = make_rng(cfg.seed, "cli-eval");
  DecisionPolicy policy = [&](const Vec& obs, int decision_index) {
    return agent->act(obs, decision_index, true, rng);
  };
  const EvalResult r =
      evaluate_policy(task, policy, lib, episodes,
                      derive_seed(cfg.seed, "eval-battery"), cfg.episode_cap);
  std::cout << "episodes=" << episodes << " return_norm=" << r.return_norm
            << " success_rate=" << r.success_rate << "\n";
  std::cout << "usage:";
  for (size_t i = 0; i < r.usage.size(); ++i)
    std::cout << ' ' << primitive_name(lib.spec(static_cast<int>(i)).id) << '='
              << r.usage[i];
  std::cout << "\n";
  return 0;
}

int cmd_analyze(const std::string& input, bool success_only) {
  std::vector<TaskSketch> recs = read_sketches(input);
  if (success_only) {
    std::vector<TaskSketch> kept;
    for (TaskSketch& s : recs)
      if (s.success) kept.push_back(std::move(s));
    recs = std::move(kept);
  }
  if (recs.size() < 2) {
    std::cerr << "need at least two sketches, have " << recs.size() << "\n";
    return 1;
  }
  const auto tokens = tokenize_all(recs);
  const int med = medoid_index(tokens);
  std::cout << "sketches " << recs.size() << "\n";
  std::cout << "f_comp " << compositionality(tokens) << "\n";
  std::cout << "medoid";
  for (PrimitiveId id : recs[static_cast<size_t>(med)].tokens)
    std::cout << ' ' << primitive_name(id);
  std::cout << "\n";
  return 0;
}

int cmd_gradcheck(uint64_t seed, int instances) {
  const bool ok = gradient_checks_ok(seed, instances, &std::cout);
  std::cout << (ok ? "gradcheck passed" : "gradcheck failed") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"primitive-augmented RL workbench for tabletop manipulation"};
  app.require_subcommand(1);

  std::string config_file, out_dir, ckpt, sketch_file;
  std::vector<std::string> sets;
  int episodes = 20;
  bool success_only = false;
  uint64_t gc_seed = 0;
  int gc_instances = 20;

  CLI::App* train = app.add_subcommand("train", "train an agent");
  train->add_option("--config", config_file, "key=value config file");
  train->add_option("--set", sets, "override one config key (key=value)");
  train->add_option("--out", out_dir, "output directory")->required();

  CLI::App* evalc = app.add_subcommand("eval", "evaluate a checkpoint");
  evalc->add_option("--config", config_file, "key=value config file");
  evalc->add_option("--set", sets, "override one config key (key=value)");
  evalc->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  evalc->add_option("--episodes", episodes, "evaluation episodes");

  CLI::App* analyze =
      app.add_subcommand("analyze-sketches", "compositionality of a corpus");
  analyze->add_option("--input", sketch_file, "sketch JSONL file")->required();
  analyze->add_flag("--success-only", success_only,
                    "keep successful episodes only");

  CLI::App* transfer =
      app.add_subcommand("transfer", "train guided by a source sketch corpus");
  transfer->add_option("--config", config_file, "key=value config file");
  transfer->add_option("--set", sets, "override one config key (key=value)");
  transfer->add_option("--sketches", sketch_file, "source sketch JSONL file")
      ->required();
  transfer->add_option("--out", out_dir, "output directory")->required();

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient audit");
  gradcheck->add_option("--seed", gc_seed, "master seed");
  gradcheck->add_option("--instances", gc_instances, "instances per loss");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return cmd_train(config_file, sets, out_dir);
    if (evalc->parsed()) return cmd_eval(config_file, sets, ckpt, episodes);
    if (analyze->parsed()) return cmd_analyze(sketch_file, success_only);
    if (transfer->parsed())
      return cmd_transfer(config_file, sets, out_dir, sketch_file);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_seed, gc_instances);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
