#ifndef SPIKEQ_EXP_CONFIG_HPP
#define SPIKEQ_EXP_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spikeq/encoding.hpp"
#include "spikeq/eq/architecture.hpp"
#include "spikeq/eq/neural.hpp"
#include "spikeq/eq/train.hpp"
#include "spikeq/link.hpp"
#include "spikeq/snn/neuron.hpp"

namespace spikeq::exp {

enum class Profile : std::uint8_t { Smoke = 0, Full = 1 };

Profile profile_from_string(std::string_view s);
std::string_view to_string(Profile p);

/// Receivers addressable from a config file.
inline constexpr std::string_view kEqualizers[] = {"snn_dfe", "ann_dfe_encoded", "ann_dfe_raw", "zf",
                                                   "lmmse",   "dfe",             "map"};

bool is_neural(std::string_view equalizer);

struct SweepConfig {
  std::vector<double> ebn0_db;
  std::uint64_t min_bit_errors = 500;
  std::uint64_t max_bits = 10'000'000;
  int burst_symbols = 1000;
  int lanes = 64;
  int workers = 1;
};

struct ValidationConfig {
  std::uint64_t symbols = 100'000;
  int lanes = 100;
};

/// Everything needed to reproduce one training run or BER curve.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  Profile profile = Profile::Full;
  std::string channel = "proakis-b";
  std::string constellation = "qpsk";
  std::string equalizer = "snn_dfe";
  eq::DfeArchitecture arch;
  int linear_taps = 31;
  std::uint64_t map_state_budget = 4096;

  snn::NeuronParams hidden = snn::NeuronParams::lif_defaults();
  snn::NeuronParams readout = snn::NeuronParams::li_defaults();
  double surrogate_slope = 100.0;
  bool recurrent = true;
  bool self_connections = false;

  std::string encoder_kind = "ternary";
  double y_max = 2.0;
  DriveMode drive = DriveMode::Constant;

  eq::TrainSchedule training;
  double train_ebn0_db = 11.0;
  SweepConfig sweep;
  ValidationConfig validation;

  void validate() const;
  /// Canonical text form; parsing it yields an identical config.
  std::string to_yaml() const;
  /// CRC-32 of the canonical text as 8 hex digits.
  std::string hash() const;

  Constellation make_constellation() const;
  FirChannel make_channel() const;
  TernaryEncoderConfig encoder() const;
  eq::NeuralSetup neural_setup() const;
};

/// Default receiver and neuron settings for "proakis-a|b|c" (and "identity", which borrows
/// the Proakis B receiver), with the default Eb/N0 grid of that channel.
ExperimentConfig preset_config(std::string_view channel);

/// Parses YAML text on top of the preset named by its `channel` key.
/// Errors carry `source:line:column`.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Smoke caps training at 200 epochs, the grid at 3 points and each point at
/// 2e5 bits. Full leaves the config untouched.
void apply_profile(ExperimentConfig& cfg, Profile p);

}  // namespace spikeq::exp

#endif  // SPIKEQ_EXP_CONFIG_HPP
