#ifndef SPIKEQ_EQ_TRAIN_HPP
#define SPIKEQ_EQ_TRAIN_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "spikeq/eq/neural.hpp"
#include "spikeq/link.hpp"

namespace spikeq::eq {

struct TrainSchedule {
  int epochs = 10000;
  int burst_len = 200;
  double lr0 = 1e-3;
  double decay_per_epoch = 0.0008;
  /// Validation SER is measured every this many epochs (and after the last); 0 disables it.
  int validate_every = 100;
  int validation_streams = 50;
  int validation_len = 200;

  /// lr0 (1 - decay)^epoch.
  double lr(int epoch) const;
  void validate() const;
};

struct TrainLogRow {
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  double val_ser = -1.0;  // negative when not measured at this epoch
};

using TrainProgress = std::function<void(const TrainLogRow&)>;

/// A transmitted and received burst: `decisions` symbols to estimate plus a
/// tail so that every one of them lies inside the receiver window.
struct Burst {
  IndexVector sent;
  ComplexVector received;
};

Burst draw_burst(const Constellation& c, const FirChannel& h, double sigma2, std::size_t symbols, Rng& data,
                 Rng& noise);

/// Decision-feedback symbol error rate on a fixed validation set.
double validation_ser(NeuralEqualizer& eq, const Constellation& c, const FirChannel& h, double ebn0_db,
                      const TrainSchedule& s, std::uint64_t seed);

/// Teacher-forced training with one fresh burst and one optimizer step per
/// epoch. Throws DivergenceError when the loss stops being finite.
std::vector<TrainLogRow> train_neural(NeuralEqualizer& eq, const Constellation& c, const FirChannel& h,
                                      double ebn0_db, const TrainSchedule& s, std::uint64_t seed,
                                      const TrainProgress& progress = {});

}  // namespace spikeq::eq

#endif  // SPIKEQ_EQ_TRAIN_HPP
