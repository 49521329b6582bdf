#include "spikeq/exp/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "spikeq/eq/classical.hpp"
#include "spikeq/eq/train.hpp"

namespace spikeq::exp {

std::string_view to_string(StopReason r) { return r == StopReason::MinErrors ? "min_bit_errors" : "max_bits"; }

Receiver make_receiver(const ExperimentConfig& cfg, double ebn0_db, const snn::Checkpoint* cp) {
  const auto c = cfg.make_constellation();
  const auto h = cfg.make_channel();
  const double s2 = ebn0_to_sigma2(ebn0_db, c.bits_per_symbol());
  Receiver r;
  const std::string& e = cfg.equalizer;
  if (is_neural(e)) {
    if (!cp) throw ConfigError("equalizer '" + e + "' needs a checkpoint");
    std::shared_ptr<eq::NeuralEqualizer> net = eq::load_neural(cfg.neural_setup(), c, *cp);
    r.delay = net->architecture().decision_delay();
    r.lanes = cfg.sweep.lanes;
    r.run = [net, c](const std::vector<ComplexVector>& ys) {
      return eq::run_neural(*net, c, ys, eq::FeedbackMode::Decision);
    };
    return r;
  }
  auto each = [](auto f) {
    return [f](const std::vector<ComplexVector>& ys) {
      std::vector<eq::EqualizerOutput> out;
      for (const auto& y : ys) out.push_back(f(y));
      return out;
    };
  };
  if (e == "zf" || e == "lmmse") {
    const auto lin = e == "zf" ? eq::zf_equalizer(h, cfg.linear_taps) : eq::lmmse_equalizer(h, cfg.linear_taps, s2);
    r.delay = lin.delay;
    r.run = each([lin, c](const ComplexVector& y) { return eq::equalize_linear(y, lin, c); });
  } else if (e == "dfe") {
    const auto f = eq::classical_dfe(h, cfg.arch.n_ff, cfg.arch.m_fb, s2);
    r.delay = f.delay;
    r.run = each([f, c](const ComplexVector& y) { return eq::equalize_dfe(y, f, c); });
  } else if (e == "map") {
    const auto budget = static_cast<std::size_t>(cfg.map_state_budget);
    if (eq::trellis_states(h, c) > budget) {
      throw InfeasibleError("MAP infeasible for " + c.name() + " on " + h.name() + ": trellis exceeds " +
                            std::to_string(budget) + " states");
    }
    r.delay = 0;
    r.run = each([h, c, s2, budget](const ComplexVector& y) { return eq::map_detector(y, h, c, s2, budget); });
  } else {
    throw ConfigError("unknown equalizer '" + e + "'");
  }
  return r;
}

std::size_t burst_tail(const ExperimentConfig& cfg) {
  const int L = cfg.make_channel().length();
  const int linear = cfg.linear_taps + L - 2;
  const int dfe = cfg.arch.n_ff + L - 2;
  return static_cast<std::size_t>(std::max({cfg.arch.decision_delay(), linear, dfe, 0}));
}

CurvePoint simulate_point(const ExperimentConfig& cfg, std::size_t point_index, const snn::Checkpoint* cp) {
  const auto start = std::chrono::steady_clock::now();
  const auto c = cfg.make_constellation();
  const auto h = cfg.make_channel();
  CurvePoint p;
  p.ebn0_db = cfg.sweep.ebn0_db.at(point_index);
  const double s2 = ebn0_to_sigma2(p.ebn0_db, c.bits_per_symbol());
  const Receiver rx = make_receiver(cfg, p.ebn0_db, cp);
  const auto len = static_cast<std::size_t>(cfg.sweep.burst_symbols);
  const std::size_t tail = burst_tail(cfg);
  if (static_cast<std::size_t>(rx.delay) > tail) throw ShapeError("receiver delay exceeds the burst tail");

  Rng data = make_rng(cfg.seed, Stream::Data, point_index, 1);
  Rng noise = make_rng(cfg.seed, Stream::Noise, point_index, 1);
  eq::ErrorCount total;
  std::vector<ComplexVector> ys;
  std::vector<IndexVector> sent;
  while (total.bit_errors < cfg.sweep.min_bit_errors && total.bits < cfg.sweep.max_bits) {
    ys.clear();
    sent.clear();
    for (int l = 0; l < rx.lanes; ++l) {
      eq::Burst b = eq::draw_burst(c, h, s2, len + tail, data, noise);
      ys.push_back(std::move(b.received));
      sent.push_back(std::move(b.sent));
    }
    const auto outs = rx.run(ys);
    for (std::size_t l = 0; l < outs.size(); ++l) total += eq::count_errors(outs[l], sent[l], len, c);
  }
  p.bit_errors = total.bit_errors;
  p.bits = total.bits;
  p.ber = static_cast<double>(p.bit_errors) / static_cast<double>(p.bits);
  p.stop = p.bit_errors >= cfg.sweep.min_bit_errors ? StopReason::MinErrors : StopReason::MaxBits;
  p.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return p;
}

BerCurve run_sweep(const ExperimentConfig& cfg, const snn::Checkpoint* cp, const std::string& revision,
                   const LogFn& log) {
  cfg.validate();
  // Fail fast on configuration problems before spawning workers.
  make_receiver(cfg, cfg.sweep.ebn0_db.front(), cp);

  BerCurve curve;
  curve.equalizer = cfg.equalizer;
  curve.channel = cfg.channel;
  curve.constellation = cfg.constellation;
  curve.seed = cfg.seed;
  curve.config_hash = cfg.hash();
  curve.revision = revision;
  curve.config_yaml = cfg.to_yaml();
  const std::size_t n = cfg.sweep.ebn0_db.size();
  curve.points.resize(n);

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        curve.points[k] = simulate_point(cfg, k, cp);
      } catch (...) {
        std::lock_guard<std::mutex> lock(log_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
        return;
      }
      if (log) {
        const auto& p = curve.points[k];
        std::ostringstream msg;
        msg << cfg.equalizer << " " << cfg.channel << " Eb/N0 " << p.ebn0_db << " dB: " << p.bit_errors << "/"
            << p.bits << " bit errors, BER " << p.ber << " (" << to_string(p.stop) << ")";
        if (p.stop == StopReason::MaxBits) msg << " warning: fewer than " << cfg.sweep.min_bit_errors << " errors";
        std::lock_guard<std::mutex> lock(log_mutex);
        log(msg.str());
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.sweep.workers), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return curve;
}

}  // namespace spikeq::exp
