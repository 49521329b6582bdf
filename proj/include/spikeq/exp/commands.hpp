#ifndef SPIKEQ_EXP_COMMANDS_HPP
#define SPIKEQ_EXP_COMMANDS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spikeq/eq/neural.hpp"
#include "spikeq/exp/config.hpp"
#include "spikeq/exp/sweep.hpp"

namespace spikeq::exp {

struct RunContext {
  std::filesystem::path out_dir = ".";
  std::string revision = "unknown";
  LogFn log;
};

struct TrainResult {
  std::filesystem::path checkpoint;
  std::filesystem::path train_log;
  std::vector<eq::TrainLogRow> log;
};

std::string checkpoint_file_name(const ExperimentConfig& cfg);

/// Trains the configured neural equalizer and writes its checkpoint,
/// train_log.csv and summary.json. The log is written even on divergence.
TrainResult cmd_train(const ExperimentConfig& cfg, const RunContext& ctx);

struct SweepResult {
  BerCurve curve;
  std::filesystem::path csv;
  std::filesystem::path json;
};

/// Writes curve_<eq>_<channel>.csv/.json and summary.json.
SweepResult cmd_sweep(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& checkpoint,
                      const RunContext& ctx);

struct ValidationReport {
  std::uint64_t symbols = 0;
  double ser_decision = 0.0;
  double ber_decision = 0.0;
  double ser_teacher = 0.0;
  double ber_teacher = 0.0;
  std::uint64_t symbol_errors_decision = 0;
  std::uint64_t symbol_errors_teacher = 0;
  /// ser_decision - ser_teacher.
  double gap = 0.0;
};

/// Decision-feedback and teacher-forced runs over the same received streams
/// at the training Eb/N0.
ValidationReport run_validation(const ExperimentConfig& cfg, eq::NeuralEqualizer& net);

/// Loads the checkpoint (config from `cfg`, which must match its shapes),
/// validates and writes validate_report.json and summary.json.
ValidationReport cmd_validate(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                              const RunContext& ctx);

struct CompareResult {
  std::vector<std::string> labels;
  std::vector<double> grid;
  bool grids_match = true;
  std::vector<std::vector<double>> ber;  // [point][curve]
  std::filesystem::path csv;
  std::filesystem::path json;
  /// Points where a neural receiver is not strictly below a linear one.
  std::size_t flagged = 0;
};

/// Joins curves on ebn0_db (intersection when the grids differ) into
/// compare.csv and compare_summary.json.
CompareResult cmd_compare(const std::vector<std::filesystem::path>& curves, const RunContext& ctx);

/// Exit status for an exception escaping a command.
int exit_code_for(const std::exception& e);

}  // namespace spikeq::exp

#endif  // SPIKEQ_EXP_COMMANDS_HPP
