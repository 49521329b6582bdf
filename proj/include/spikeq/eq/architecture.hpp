#ifndef SPIKEQ_EQ_ARCHITECTURE_HPP
#define SPIKEQ_EQ_ARCHITECTURE_HPP

#include <span>
#include <string_view>

#include "spikeq/common.hpp"
#include "spikeq/encoding.hpp"
#include "spikeq/link.hpp"

namespace spikeq::eq {

/// Shape of a neural decision-feedback equalizer: an n-sample feedforward
/// window, an m-decision feedback line, and the network sizes that follow.
struct DfeArchitecture {
  int n_ff = 28;
  int m_fb = 3;
  int m_bits = 8;
  int alphabet_size = 4;
  int n_hidden = 320;
  int kappa_max = 10;

  int total_taps() const { return n_ff + m_fb; }
  /// 2 M n + |M| m.
  int n_in() const { return layout().width(); }
  int n_out() const { return alphabet_size; }
  /// Width of the unencoded input: real and imaginary part of every tap.
  int raw_width() const { return 2 * total_taps(); }
  int decision_delay() const { return n_ff - 1; }
  FrameLayout layout() const { return FrameLayout{m_bits, n_ff, m_fb, alphabet_size}; }

  void validate() const;

  /// Defaults for "proakis-a" (16-QAM), "proakis-b" and "proakis-c" (QPSK).
  static DfeArchitecture preset(std::string_view channel);
};

/// Constellation that goes with a channel preset.
std::string_view preset_constellation(std::string_view channel);

/// Receiver decisions for one received sequence. symbol_indices[k] estimates
/// the transmit symbol at k - decision_delay; earlier entries are fill values.
struct EqualizerOutput {
  IndexVector symbol_indices;
  BitVector bits;
  int decision_delay = 0;
};

EqualizerOutput make_output(IndexVector indices, const Constellation& c, int decision_delay);

struct ErrorCount {
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
  std::uint64_t symbol_errors = 0;
  std::uint64_t symbols = 0;

  double ber() const { return bits ? static_cast<double>(bit_errors) / static_cast<double>(bits) : 0.0; }
  double ser() const { return symbols ? static_cast<double>(symbol_errors) / static_cast<double>(symbols) : 0.0; }
  ErrorCount& operator+=(const ErrorCount& o);
};

/// Compares the first `count` transmit symbols with the receiver decisions,
/// aligned by the reported delay. Throws ShapeError when the output is too
/// short to cover them.
ErrorCount count_errors(const EqualizerOutput& out, std::span<const int> sent, std::size_t count,
                        const Constellation& c);

}  // namespace spikeq::eq

#endif  // SPIKEQ_EQ_ARCHITECTURE_HPP
