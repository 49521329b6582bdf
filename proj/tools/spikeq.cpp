// spikeq: train, sweep, validate and compare decision-feedback equalizers.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spikeq/exp/commands.hpp"
#include "spikeq/snn/checkpoint.hpp"

#ifndef SPIKEQ_REVISION
#define SPIKEQ_REVISION "unknown"
#endif

namespace {

using namespace spikeq;

struct Common {
  std::string config;
  std::string profile;
  std::string out = ".";
  std::string channel;
  std::string equalizer;
  std::optional<std::uint64_t> seed;
  std::optional<double> ebn0;
  std::optional<int> epochs;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config (YAML)");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--profile", c.profile, "smoke or full")->check(CLI::IsMember({"smoke", "full"}));
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--channel", c.channel, "Channel preset (proakis-a|b|c, identity) when no config is given");
  cmd->add_option("--eq", c.equalizer, "Equalizer: snn_dfe, ann_dfe_encoded, ann_dfe_raw, zf, lmmse, dfe, map");
  cmd->add_option("--ebn0", c.ebn0, "Training and validation Eb/N0 in dB");
  cmd->add_option("--epochs", c.epochs, "Training epochs");
  cmd->add_option("--workers", c.workers, "Sweep worker threads");
}

/// Config file, else the config stored in the checkpoint, else a preset.
exp::ExperimentConfig resolve(const Common& c, const std::string& checkpoint) {
  exp::ExperimentConfig cfg;
  if (!c.config.empty()) {
    if (!c.channel.empty()) throw ConfigError("--channel cannot be combined with --config; set it in the file");
    cfg = exp::load_config(c.config);
  } else if (!checkpoint.empty() && c.channel.empty()) {
    cfg = exp::parse_config(snn::load_checkpoint(checkpoint).metadata, checkpoint + " (embedded config)");
  } else {
    cfg = exp::preset_config(c.channel.empty() ? "proakis-b" : c.channel);
  }
  if (!c.equalizer.empty()) cfg.equalizer = c.equalizer;
  if (c.seed) cfg.seed = *c.seed;
  if (c.ebn0) cfg.train_ebn0_db = *c.ebn0;
  if (c.epochs) cfg.training.epochs = *c.epochs;
  if (c.workers) cfg.sweep.workers = *c.workers;
  if (!c.profile.empty()) exp::apply_profile(cfg, exp::profile_from_string(c.profile));
  else exp::apply_profile(cfg, cfg.profile);
  cfg.validate();
  return cfg;
}

exp::RunContext context(const Common& c) {
  exp::RunContext ctx;
  ctx.out_dir = c.out;
  ctx.revision = SPIKEQ_REVISION;
  ctx.log = [](const std::string& m) { std::cerr << m << std::endl; };
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking-neural-network decision-feedback equalization toolkit"};
  app.require_subcommand(1);

  Common train_opts, sweep_opts, validate_opts;
  std::string sweep_checkpoint, validate_checkpoint;
  std::vector<std::string> curves;
  std::string compare_out = ".";

  auto* train = app.add_subcommand("train", "Train a neural equalizer and write its checkpoint");
  add_common(train, train_opts);

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo BER sweep over the configured Eb/N0 grid");
  add_common(sweep, sweep_opts);
  sweep->add_option("--checkpoint", sweep_checkpoint, "Checkpoint of a trained neural equalizer");

  auto* validate = app.add_subcommand("validate", "Decision-feedback vs teacher-forcing validation");
  add_common(validate, validate_opts);
  validate->add_option("--checkpoint", validate_checkpoint, "Checkpoint to validate")->required();

  auto* compare = app.add_subcommand("compare", "Join BER curves into one table with ordering summary");
  compare->add_option("curves", curves, "Curve CSV files")->required();
  compare->add_option("--out", compare_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      const auto cfg = resolve(train_opts, "");
      exp::cmd_train(cfg, context(train_opts));
    } else if (*sweep) {
      const auto cfg = resolve(sweep_opts, sweep_checkpoint);
      std::optional<std::filesystem::path> cp;
      if (!sweep_checkpoint.empty()) cp = sweep_checkpoint;
      const auto r = exp::cmd_sweep(cfg, cp, context(sweep_opts));
      std::cerr << "wrote " << r.csv.string() << " and " << r.json.string() << std::endl;
    } else if (*validate) {
      const auto cfg = resolve(validate_opts, validate_checkpoint);
      exp::cmd_validate(cfg, validate_checkpoint, context(validate_opts));
    } else if (*compare) {
      Common c;
      c.out = compare_out;
      std::vector<std::filesystem::path> files(curves.begin(), curves.end());
      const auto r = exp::cmd_compare(files, context(c));
      std::cerr << "wrote " << r.csv.string() << " and " << r.json.string();
      if (r.flagged) std::cerr << " (" << r.flagged << " point(s) where a neural receiver is not below a linear one)";
      std::cerr << std::endl;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return exp::exit_code_for(e);
  }
  return 0;
}
