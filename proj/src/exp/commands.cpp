#include "spikeq/exp/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "spikeq/eq/train.hpp"
#include "spikeq/exp/artifacts.hpp"

namespace spikeq::exp {

namespace {

using Json = nlohmann::ordered_json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json run_header(const char* command, const ExperimentConfig& cfg, const RunContext& ctx) {
  Json j;
  j["command"] = command;
  j["equalizer"] = cfg.equalizer;
  j["channel"] = cfg.channel;
  j["constellation"] = cfg.constellation;
  j["seed"] = cfg.seed;
  j["profile"] = std::string(to_string(cfg.profile));
  j["config_hash"] = cfg.hash();
  j["revision"] = ctx.revision;
  j["config"] = cfg.to_yaml();
  return j;
}

void say(const RunContext& ctx, const std::string& msg) {
  if (ctx.log) ctx.log(msg);
}

}  // namespace

std::string checkpoint_file_name(const ExperimentConfig& cfg) {
  return "checkpoint_" + cfg.equalizer + "_" + cfg.channel + ".spkq";
}

TrainResult cmd_train(const ExperimentConfig& cfg, const RunContext& ctx) {
  cfg.validate();
  if (!is_neural(cfg.equalizer)) {
    throw ConfigError("equalizer '" + cfg.equalizer + "' is designed in closed form and needs no training");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = cfg.make_constellation();
  const auto h = cfg.make_channel();
  auto net = eq::make_neural(cfg.neural_setup(), c, cfg.seed);

  TrainResult result;
  result.train_log = ctx.out_dir / "train_log.csv";
  result.checkpoint = ctx.out_dir / checkpoint_file_name(cfg);
  const int every = std::max(1, cfg.training.epochs / 20);
  auto progress = [&](const eq::TrainLogRow& r) {
    result.log.push_back(r);
    if (r.epoch % every == 0 || r.val_ser >= 0.0 || r.epoch + 1 == cfg.training.epochs) {
      std::ostringstream msg;
      msg << "epoch " << r.epoch << " loss " << r.loss << " lr " << r.lr;
      if (r.val_ser >= 0.0) msg << " val_ser " << r.val_ser;
      say(ctx, msg.str());
    }
  };
  try {
    eq::train_neural(*net, c, h, cfg.train_ebn0_db, cfg.training, cfg.seed, progress);
  } catch (const DivergenceError&) {
    write_atomic(result.train_log, train_log_csv(result.log, cfg, ctx.revision));
    throw;
  }
  write_atomic(result.train_log, train_log_csv(result.log, cfg, ctx.revision));
  std::filesystem::create_directories(ctx.out_dir);
  snn::save_checkpoint(net->checkpoint(cfg.to_yaml()), result.checkpoint);

  Json j = run_header("train", cfg, ctx);
  j["epochs"] = cfg.training.epochs;
  j["train_ebn0_db"] = cfg.train_ebn0_db;
  j["initial_loss"] = result.log.front().loss;
  j["final_loss"] = result.log.back().loss;
  if (result.log.back().val_ser >= 0.0) j["final_val_ser"] = result.log.back().val_ser;
  j["encoder_clip_count"] = net->clip_count();
  j["files"] = {{"checkpoint", result.checkpoint.filename().string()},
                {"checkpoint_crc32", file_crc(result.checkpoint)},
                {"train_log", result.train_log.filename().string()}};
  j["wall_time_s"] = seconds_since(t0);
  write_atomic(ctx.out_dir / "summary.json", j.dump(2) + "\n");
  say(ctx, "wrote " + result.checkpoint.string());
  return result;
}

SweepResult cmd_sweep(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& checkpoint,
                      const RunContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<snn::Checkpoint> cp;
  if (checkpoint) cp = snn::load_checkpoint(*checkpoint);
  if (is_neural(cfg.equalizer) && !cp) {
    throw ConfigError("equalizer '" + cfg.equalizer + "' needs --checkpoint for a sweep");
  }
  SweepResult r;
  r.curve = run_sweep(cfg, cp ? &*cp : nullptr, ctx.revision, ctx.log);
  const std::string stem = curve_file_stem(r.curve);
  r.csv = ctx.out_dir / (stem + ".csv");
  r.json = ctx.out_dir / (stem + ".json");
  write_atomic(r.csv, curve_csv(r.curve));
  write_atomic(r.json, curve_json(r.curve));

  Json j = run_header("sweep", cfg, ctx);
  if (checkpoint) j["checkpoint"] = checkpoint->string();
  j["points"] = Json::array();
  for (const auto& p : r.curve.points) {
    j["points"].push_back({{"ebn0_db", p.ebn0_db},
                           {"bit_errors", p.bit_errors},
                           {"bits", p.bits},
                           {"ber", p.ber},
                           {"stopped_by", std::string(to_string(p.stop))},
                           {"wall_time_s", p.wall_time_s}});
  }
  j["files"] = {{"curve_csv", r.csv.filename().string()}, {"curve_json", r.json.filename().string()}};
  j["wall_time_s"] = seconds_since(t0);
  write_atomic(ctx.out_dir / "summary.json", j.dump(2) + "\n");
  return r;
}

ValidationReport run_validation(const ExperimentConfig& cfg, eq::NeuralEqualizer& net) {
  const auto c = cfg.make_constellation();
  const auto h = cfg.make_channel();
  const double s2 = ebn0_to_sigma2(cfg.train_ebn0_db, c.bits_per_symbol());
  const auto lanes = static_cast<std::uint64_t>(cfg.validation.lanes);
  const std::size_t len = (cfg.validation.symbols + lanes - 1) / lanes;
  const auto tail = static_cast<std::size_t>(net.architecture().decision_delay());
  Rng data = make_rng(cfg.seed, Stream::Validation, 2);
  Rng noise = make_rng(cfg.seed, Stream::Validation, 3);
  std::vector<ComplexVector> ys;
  std::vector<IndexVector> sent;
  for (std::uint64_t l = 0; l < lanes; ++l) {
    eq::Burst b = eq::draw_burst(c, h, s2, len + tail, data, noise);
    ys.push_back(std::move(b.received));
    sent.push_back(std::move(b.sent));
  }
  const auto decided = eq::run_neural(net, c, ys, eq::FeedbackMode::Decision);
  const auto teacher = eq::run_neural(net, c, ys, eq::FeedbackMode::Teacher, sent);
  eq::ErrorCount ed, et;
  for (std::size_t l = 0; l < ys.size(); ++l) {
    ed += eq::count_errors(decided[l], sent[l], len, c);
    et += eq::count_errors(teacher[l], sent[l], len, c);
  }
  ValidationReport r;
  r.symbols = ed.symbols;
  r.ser_decision = ed.ser();
  r.ber_decision = ed.ber();
  r.ser_teacher = et.ser();
  r.ber_teacher = et.ber();
  r.symbol_errors_decision = ed.symbol_errors;
  r.symbol_errors_teacher = et.symbol_errors;
  r.gap = r.ser_decision - r.ser_teacher;
  return r;
}

ValidationReport cmd_validate(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                              const RunContext& ctx) {
  cfg.validate();
  if (!is_neural(cfg.equalizer)) throw ConfigError("validate applies to neural equalizers only");
  const auto t0 = std::chrono::steady_clock::now();
  const auto cp = snn::load_checkpoint(checkpoint);
  auto net = eq::load_neural(cfg.neural_setup(), cfg.make_constellation(), cp);
  const ValidationReport r = run_validation(cfg, *net);

  Json j = run_header("validate", cfg, ctx);
  j["checkpoint"] = checkpoint.string();
  j["ebn0_db"] = cfg.train_ebn0_db;
  j["symbols"] = r.symbols;
  j["decision_feedback"] = {{"ser", r.ser_decision}, {"ber", r.ber_decision}, {"symbol_errors", r.symbol_errors_decision}};
  j["teacher_forcing"] = {{"ser", r.ser_teacher}, {"ber", r.ber_teacher}, {"symbol_errors", r.symbol_errors_teacher}};
  j["teacher_forcing_gap"] = r.gap;
  const std::string report = j.dump(2) + "\n";
  write_atomic(ctx.out_dir / "validate_report.json", report);
  j["files"] = {{"report", "validate_report.json"}};
  j["wall_time_s"] = seconds_since(t0);
  write_atomic(ctx.out_dir / "summary.json", j.dump(2) + "\n");
  std::ostringstream msg;
  msg << "decision feedback SER " << r.ser_decision << " BER " << r.ber_decision << ", teacher forcing SER "
      << r.ser_teacher << " BER " << r.ber_teacher << ", gap " << r.gap << " (config " << cfg.hash() << ")";
  say(ctx, msg.str());
  return r;
}

CompareResult cmd_compare(const std::vector<std::filesystem::path>& files, const RunContext& ctx) {
  if (files.empty()) throw ConfigError("compare needs at least one curve file");
  std::vector<BerCurve> curves;
  for (const auto& f : files) curves.push_back(parse_curve_csv(read_file(f), f.string()));

  CompareResult r;
  std::map<std::string, int> uses;
  for (const auto& c : curves) ++uses[c.equalizer];
  std::set<std::string> taken;
  for (const auto& c : curves) {
    std::string label = uses[c.equalizer] > 1 ? c.equalizer + "@" + c.channel : c.equalizer;
    for (int k = 2; taken.count(label); ++k) label = c.equalizer + "@" + c.channel + "#" + std::to_string(k);
    taken.insert(label);
    r.labels.push_back(label);
  }

  std::vector<std::map<double, double>> by_point(curves.size());
  std::set<double> all, common;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    std::set<double> mine;
    for (const auto& p : curves[k].points) {
      by_point[k][p.ebn0_db] = p.ber;
      mine.insert(p.ebn0_db);
      all.insert(p.ebn0_db);
    }
    if (k == 0) {
      common = mine;
    } else {
      std::set<double> keep;
      std::set_intersection(common.begin(), common.end(), mine.begin(), mine.end(), std::inserter(keep, keep.end()));
      common = std::move(keep);
    }
  }
  r.grids_match = common == all;
  r.grid.assign(common.begin(), common.end());
  if (!r.grids_match) {
    say(ctx, "warning: curve grids differ; using the " + std::to_string(r.grid.size()) + " common Eb/N0 points");
  }
  if (r.grid.empty()) throw ConfigError("curves share no Eb/N0 point");

  std::ostringstream csv;
  std::vector<std::pair<std::string, std::string>> fields;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    fields.emplace_back("input " + r.labels[k], files[k].filename().string() + " config " + curves[k].config_hash);
  }
  csv << comment_block(fields, "");
  csv << "ebn0_db";
  for (const auto& l : r.labels) csv << "," << l;
  csv << "\n";
  for (double x : r.grid) {
    std::vector<double> row;
    csv << format_double(x);
    for (std::size_t k = 0; k < curves.size(); ++k) {
      row.push_back(by_point[k][x]);
      csv << "," << format_double(row.back());
    }
    csv << "\n";
    r.ber.push_back(std::move(row));
  }

  Json j;
  j["command"] = "compare";
  j["revision"] = ctx.revision;
  j["inputs"] = Json::array();
  for (std::size_t k = 0; k < curves.size(); ++k) {
    j["inputs"].push_back({{"file", files[k].string()},
                           {"label", r.labels[k]},
                           {"equalizer", curves[k].equalizer},
                           {"channel", curves[k].channel},
                           {"seed", curves[k].seed},
                           {"config_hash", curves[k].config_hash}});
  }
  j["grids_match"] = r.grids_match;
  j["ebn0_db"] = r.grid;
  j["orderings"] = Json::array();
  for (std::size_t p = 0; p < r.grid.size(); ++p) {
    std::vector<std::size_t> order(curves.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return r.ber[p][a] < r.ber[p][b]; });
    Json ranking = Json::array();
    for (auto k : order) ranking.push_back(r.labels[k]);
    j["orderings"].push_back({{"ebn0_db", r.grid[p]}, {"lowest_ber_first", ranking}});
  }
  j["pairwise"] = Json::array();
  for (std::size_t a = 0; a < curves.size(); ++a)
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      Json below = Json::array(), above = Json::array(), equal = Json::array();
      for (std::size_t p = 0; p < r.grid.size(); ++p) {
        const double x = r.ber[p][a], y = r.ber[p][b];
        (x < y ? below : x > y ? above : equal).push_back(r.grid[p]);
      }
      j["pairwise"].push_back({{"a", r.labels[a]}, {"b", r.labels[b]}, {"a_below_b", below}, {"a_above_b", above},
                               {"equal", equal}});
    }
  j["flags"] = Json::array();
  for (std::size_t a = 0; a < curves.size(); ++a) {
    if (!is_neural(curves[a].equalizer)) continue;
    for (std::size_t b = 0; b < curves.size(); ++b) {
      if (curves[b].equalizer != "zf" && curves[b].equalizer != "lmmse") continue;
      for (std::size_t p = 0; p < r.grid.size(); ++p) {
        if (r.ber[p][a] >= r.ber[p][b]) {
          ++r.flagged;
          j["flags"].push_back({{"ebn0_db", r.grid[p]},
                                {"neural", r.labels[a]},
                                {"linear", r.labels[b]},
                                {"neural_ber", r.ber[p][a]},
                                {"linear_ber", r.ber[p][b]}});
        }
      }
    }
  }
  r.csv = ctx.out_dir / "compare.csv";
  r.json = ctx.out_dir / "compare_summary.json";
  write_atomic(r.csv, csv.str());
  write_atomic(r.json, j.dump(2) + "\n");
  return r;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const InfeasibleError*>(&e)) return 3;
  if (dynamic_cast<const DivergenceError*>(&e)) return 4;
  if (dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const CorruptFileError*>(&e) ||
      dynamic_cast<const VersionError*>(&e)) {
    return 5;
  }
  return 1;
}

}  // namespace spikeq::exp
