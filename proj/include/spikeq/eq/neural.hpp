#ifndef SPIKEQ_EQ_NEURAL_HPP
#define SPIKEQ_EQ_NEURAL_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spikeq/encoding.hpp"
#include "spikeq/eq/architecture.hpp"
#include "spikeq/eq/mlp.hpp"
#include "spikeq/link.hpp"
#include "spikeq/snn/adam.hpp"
#include "spikeq/snn/checkpoint.hpp"
#include "spikeq/snn/network.hpp"

namespace spikeq::eq {

enum class FeedbackMode : std::uint8_t {
  Teacher = 0,   // transmitted symbols are fed back
  Decision = 1,  // the receiver's own decisions are fed back
};

enum class NeuralKind : std::uint8_t { Snn = 0, AnnEncoded = 1, AnnRaw = 2 };

NeuralKind neural_kind_from_string(std::string_view s);
std::string_view to_string(NeuralKind k);

/// A trainable classifier behind a decision-feedback front end. Inputs are
/// built one column per decision from a window of received samples (newest
/// first) and the most recent decisions (most recent first).
class NeuralEqualizer {
 public:
  virtual ~NeuralEqualizer() = default;

  virtual NeuralKind kind() const = 0;
  virtual const DfeArchitecture& architecture() const = 0;
  virtual Eigen::Index input_width() const = 0;
  virtual void fill_input(std::span<const Complex> window, std::span<const int> feedback,
                          Eigen::Ref<Eigen::VectorXd> column) = 0;
  /// Class scores, one column per input column.
  virtual Eigen::MatrixXd scores(const Eigen::MatrixXd& inputs) const = 0;
  /// Mean cross-entropy of the batch, followed by one optimizer step.
  virtual double train_step(const Eigen::MatrixXd& inputs, std::span<const int> targets, double lr) = 0;
  virtual snn::Checkpoint checkpoint(std::string metadata) const = 0;
  /// Number of encoder inputs that saturated so far.
  virtual std::uint64_t clip_count() const { return 0; }
};

struct SnnOptions {
  snn::NeuronParams hidden = snn::NeuronParams::lif_defaults();
  snn::NeuronParams readout = snn::NeuronParams::li_defaults();
  snn::SurrogateSpec surrogate{};
  bool recurrent = true;
  bool self_connections = false;
};

/// Ternary-encoded input -> recurrent LIF hidden layer -> LI readout, decided
/// by the largest readout membrane potential after kappa_max steps.
class SnnDfe final : public NeuralEqualizer {
 public:
  SnnDfe(DfeArchitecture arch, TernaryEncoderConfig enc, const SnnOptions& opt, std::uint64_t seed);
  SnnDfe(DfeArchitecture arch, TernaryEncoderConfig enc, const snn::Checkpoint& cp);

  NeuralKind kind() const override { return NeuralKind::Snn; }
  const DfeArchitecture& architecture() const override { return arch_; }
  Eigen::Index input_width() const override { return arch_.n_in(); }
  void fill_input(std::span<const Complex> window, std::span<const int> feedback,
                  Eigen::Ref<Eigen::VectorXd> column) override;
  Eigen::MatrixXd scores(const Eigen::MatrixXd& inputs) const override;
  double train_step(const Eigen::MatrixXd& inputs, std::span<const int> targets, double lr) override;
  snn::Checkpoint checkpoint(std::string metadata) const override;
  std::uint64_t clip_count() const override { return encoder_.clip_count(); }

  const snn::Network<double>& network() const { return net_; }
  snn::Network<double>& mutable_network() { return net_; }
  const TernaryEncoderConfig& encoder_config() const { return encoder_.config(); }

 private:
  snn::Drive<double> drive(const Eigen::MatrixXd& inputs) const;

  DfeArchitecture arch_;
  TernaryEncoder encoder_;
  snn::Network<double> net_;
  snn::SurrogateSpec surrogate_;
  snn::AdamState<double> adam_;
};

/// Two-layer ReLU network. The encoded variant sees the same input as the
/// SNN; the raw variant sees real and imaginary parts of the received window
/// and of the fed-back symbol values.
class AnnDfe final : public NeuralEqualizer {
 public:
  AnnDfe(NeuralKind variant, DfeArchitecture arch, TernaryEncoderConfig enc, Constellation c, std::uint64_t seed);
  AnnDfe(NeuralKind variant, DfeArchitecture arch, TernaryEncoderConfig enc, Constellation c,
         const snn::Checkpoint& cp);

  NeuralKind kind() const override { return variant_; }
  const DfeArchitecture& architecture() const override { return arch_; }
  Eigen::Index input_width() const override;
  void fill_input(std::span<const Complex> window, std::span<const int> feedback,
                  Eigen::Ref<Eigen::VectorXd> column) override;
  Eigen::MatrixXd scores(const Eigen::MatrixXd& inputs) const override;
  double train_step(const Eigen::MatrixXd& inputs, std::span<const int> targets, double lr) override;
  snn::Checkpoint checkpoint(std::string metadata) const override;
  std::uint64_t clip_count() const override { return encoder_.clip_count(); }

  const Mlp<double>& mlp() const { return mlp_; }
  Mlp<double>& mutable_mlp() { return mlp_; }

 private:
  NeuralKind variant_;
  DfeArchitecture arch_;
  TernaryEncoder encoder_;
  Constellation constellation_;
  Mlp<double> mlp_;
  snn::AdamState<double> adam_;
};

struct NeuralSetup {
  NeuralKind kind = NeuralKind::Snn;
  DfeArchitecture arch;
  TernaryEncoderConfig encoder;
  SnnOptions snn;
};

std::unique_ptr<NeuralEqualizer> make_neural(const NeuralSetup& setup, const Constellation& c, std::uint64_t seed);
/// Rebuilds an equalizer from a checkpoint; throws ShapeError when the stored
/// layers do not match the setup.
std::unique_ptr<NeuralEqualizer> load_neural(const NeuralSetup& setup, const Constellation& c,
                                             const snn::Checkpoint& cp);

/// A single decision from explicit window and feedback contents.
int neural_decide(NeuralEqualizer& eq, std::span<const Complex> window, std::span<const int> feedback);

/// Streams every sequence through the equalizer in lockstep (one batch
/// column per stream). All streams must have the same length. Teacher mode
/// needs the transmitted indices of every stream. Output k estimates the
/// symbol sent at k - (n - 1); feedback before the first symbol is index 0.
std::vector<EqualizerOutput> run_neural(NeuralEqualizer& eq, const Constellation& c,
                                        std::span<const ComplexVector> streams, FeedbackMode mode,
                                        std::span<const IndexVector> truth = {});

EqualizerOutput run_neural(NeuralEqualizer& eq, const Constellation& c, std::span<const Complex> y,
                           FeedbackMode mode, std::span<const int> truth = {});

/// Teacher-forced inputs and targets for decisions 0..count-1 of a sequence
/// whose received samples cover decisions up to count - 1.
void teacher_batch(NeuralEqualizer& eq, std::span<const Complex> y, std::span<const int> sent, std::size_t count,
                   Eigen::MatrixXd& inputs, std::vector<int>& targets);

}  // namespace spikeq::eq

#endif  // SPIKEQ_EQ_NEURAL_HPP
