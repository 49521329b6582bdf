#ifndef SPIKEQ_EXP_SWEEP_HPP
#define SPIKEQ_EXP_SWEEP_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spikeq/exp/config.hpp"
#include "spikeq/snn/checkpoint.hpp"

namespace spikeq::exp {

enum class StopReason : std::uint8_t { MinErrors = 0, MaxBits = 1 };

std::string_view to_string(StopReason r);

struct CurvePoint {
  double ebn0_db = 0.0;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
  double ber = 0.0;  // bit_errors / bits
  StopReason stop = StopReason::MaxBits;
  double wall_time_s = 0.0;
};

struct BerCurve {
  std::string equalizer;
  std::string channel;
  std::string constellation;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string revision;
  std::string config_yaml;
  std::vector<CurvePoint> points;
};

using LogFn = std::function<void(const std::string&)>;

/// Receiver built for one Eb/N0 point. run() equalizes a batch of received
/// bursts; neural receivers process them in lockstep.
struct Receiver {
  int delay = 0;
  /// Preferred number of bursts per call.
  int lanes = 1;
  std::function<std::vector<eq::EqualizerOutput>(const std::vector<ComplexVector>&)> run;
};

/// Throws ConfigError when a neural receiver has no checkpoint and
/// InfeasibleError when the MAP trellis is over budget.
Receiver make_receiver(const ExperimentConfig& cfg, double ebn0_db, const snn::Checkpoint* cp);

/// Symbols appended to every burst so each receiver's delayed decisions
/// cover the scored symbols. Shared by all receivers so that, for a given
/// seed and point, every receiver sees the same bits and noise.
std::size_t burst_tail(const ExperimentConfig& cfg);

/// Simulates one grid point until min_bit_errors or max_bits is reached.
CurvePoint simulate_point(const ExperimentConfig& cfg, std::size_t point_index, const snn::Checkpoint* cp);

/// Every grid point, run by a pool of cfg.sweep.workers threads. Results do
/// not depend on the worker count.
BerCurve run_sweep(const ExperimentConfig& cfg, const snn::Checkpoint* cp, const std::string& revision,
                   const LogFn& log = {});

}  // namespace spikeq::exp

#endif  // SPIKEQ_EXP_SWEEP_HPP
