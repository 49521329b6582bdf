#ifndef SPIKEQ_SNN_CHECKPOINT_HPP
#define SPIKEQ_SNN_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spikeq/common.hpp"
#include "spikeq/snn/adam.hpp"
#include "spikeq/snn/network.hpp"

namespace spikeq::snn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class ModelKind : std::uint8_t { Snn = 0, Ann = 1 };

/// Layer tags as stored on disk. LIF/LI are spiking layers, ReLU/Linear the
/// dense layers of the non-spiking baselines.
enum class LayerTag : std::uint8_t { LIF = 0, LI = 1, ReLU = 2, Linear = 3 };

struct CheckpointLayer {
  std::uint32_t fan_in = 0;
  std::uint32_t n_neurons = 0;
  LayerTag tag = LayerTag::LIF;
  bool has_recurrence = false;
  bool has_bias = false;
  bool self_connections = false;
  NeuronParams neuron;
  Eigen::MatrixXd w_in;  // n_neurons x fan_in
  Eigen::MatrixXd w_rec;
  Eigen::MatrixXd bias;  // n_neurons x 1
};

/// Versioned model container. Layout (all little-endian):
///   "SPKQ" | u32 format_version | u8 model_kind | u32 layer_count
///   per layer: u32 fan_in, u32 n_neurons, u8 cell_kind, u8 has_recurrence, u8 has_bias, u8 self_connections
///   per layer neuron block: f64 tau_m, tau_s, v_th, v_rest, dt; u8 reset_mode, u8 membrane_form
///   f64 surrogate_slope
///   optimizer: u64 step, f64 beta1, beta2, eps, u8 has_moments [, per tensor m then v as f64]
///   weights per layer: w_in (fan_in x n_neurons row-major), w_rec (n x n row-major), bias
///   u32 metadata_length | metadata bytes | u32 CRC-32 of everything before it
struct Checkpoint {
  ModelKind model = ModelKind::Snn;
  std::vector<CheckpointLayer> layers;
  double surrogate_slope = 100.0;
  AdamState<double> optimizer;
  std::string metadata;

  /// Tensors in optimizer order: per layer w_in, then w_rec and bias when present.
  std::vector<const Eigen::MatrixXd*> tensors() const;
};

std::vector<std::uint8_t> serialize(const Checkpoint& cp);
Checkpoint deserialize(const std::vector<std::uint8_t>& bytes);

/// Writes through a temporary file and renames it into place.
void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint to_checkpoint(const Network<double>& net, const SurrogateSpec& sg, const AdamState<double>& opt,
                         std::string metadata);
Network<double> network_from_checkpoint(const Checkpoint& cp);

/// Throws ShapeError unless the layer sizes match (fan_in of the first layer,
/// then each layer's size).
void require_layer_sizes(const Checkpoint& cp, const std::vector<std::uint32_t>& sizes);

}  // namespace spikeq::snn

#endif  // SPIKEQ_SNN_CHECKPOINT_HPP
