#include "spikeq/eq/train.hpp"

#include <cmath>
#include <string>

namespace spikeq::eq {

double TrainSchedule::lr(int epoch) const { return lr0 * std::pow(1.0 - decay_per_epoch, epoch); }

void TrainSchedule::validate() const {
  if (epochs < 1) throw ConfigError("training.epochs must be at least 1");
  if (burst_len < 1) throw ConfigError("training.burst_len must be at least 1");
  if (!(lr0 > 0.0)) throw ConfigError("training.lr0 must be positive");
  if (!(decay_per_epoch >= 0.0 && decay_per_epoch < 1.0)) throw ConfigError("training.decay_per_epoch must lie in [0, 1)");
  if (validate_every < 0) throw ConfigError("training.validate_every must be non-negative");
  if (validate_every > 0 && (validation_streams < 1 || validation_len < 1)) {
    throw ConfigError("validation needs at least one stream of one symbol");
  }
}

Burst draw_burst(const Constellation& c, const FirChannel& h, double sigma2, std::size_t symbols, Rng& data,
                 Rng& noise) {
  Burst b;
  const BitVector bits = generate_bits(symbols * static_cast<std::size_t>(c.bits_per_symbol()), data);
  b.sent = bits_to_indices(bits, c);
  const ComplexVector x = indices_to_symbols(b.sent, c);
  b.received = add_awgn(apply_channel(x, h), sigma2, noise);
  return b;
}

double validation_ser(NeuralEqualizer& eq, const Constellation& c, const FirChannel& h, double ebn0_db,
                      const TrainSchedule& s, std::uint64_t seed) {
  const double sigma2 = ebn0_to_sigma2(ebn0_db, c.bits_per_symbol());
  const auto len = static_cast<std::size_t>(s.validation_len);
  const auto tail = static_cast<std::size_t>(eq.architecture().decision_delay());
  Rng data = make_rng(seed, Stream::Validation, 0);
  Rng noise = make_rng(seed, Stream::Validation, 1);
  std::vector<ComplexVector> streams;
  std::vector<IndexVector> sent;
  for (int b = 0; b < s.validation_streams; ++b) {
    Burst burst = draw_burst(c, h, sigma2, len + tail, data, noise);
    streams.push_back(std::move(burst.received));
    sent.push_back(std::move(burst.sent));
  }
  const auto outs = run_neural(eq, c, streams, FeedbackMode::Decision);
  ErrorCount e;
  for (std::size_t b = 0; b < outs.size(); ++b) e += count_errors(outs[b], sent[b], len, c);
  return e.ser();
}

std::vector<TrainLogRow> train_neural(NeuralEqualizer& eq, const Constellation& c, const FirChannel& h,
                                      double ebn0_db, const TrainSchedule& s, std::uint64_t seed,
                                      const TrainProgress& progress) {
  s.validate();
  const double sigma2 = ebn0_to_sigma2(ebn0_db, c.bits_per_symbol());
  const auto len = static_cast<std::size_t>(s.burst_len);
  const auto tail = static_cast<std::size_t>(eq.architecture().decision_delay());
  Rng data = make_rng(seed, Stream::Data);
  Rng noise = make_rng(seed, Stream::Noise);

  std::vector<TrainLogRow> log;
  log.reserve(static_cast<std::size_t>(s.epochs));
  Eigen::MatrixXd inputs;
  std::vector<int> targets;
  for (int e = 0; e < s.epochs; ++e) {
    const Burst burst = draw_burst(c, h, sigma2, len + tail, data, noise);
    teacher_batch(eq, burst.received, burst.sent, len, inputs, targets);
    TrainLogRow row;
    row.epoch = e;
    row.lr = s.lr(e);
    row.loss = eq.train_step(inputs, targets, row.lr);
    if (!std::isfinite(row.loss)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(e) + ": loss is " +
                            std::to_string(row.loss) + " at learning rate " + std::to_string(row.lr));
    }
    const bool last = e + 1 == s.epochs;
    if (s.validate_every > 0 && ((e + 1) % s.validate_every == 0 || last)) {
      row.val_ser = validation_ser(eq, c, h, ebn0_db, s, seed);
    }
    log.push_back(row);
    if (progress) progress(row);
  }
  return log;
}

}  // namespace spikeq::eq
