#ifndef SPIKEQ_ENCODING_HPP
#define SPIKEQ_ENCODING_HPP

#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "spikeq/common.hpp"

namespace spikeq {

/// How an encoded pattern is presented over the simulation window.
enum class DriveMode : std::uint8_t {
  Constant = 0,  // same pattern at every time step
  Impulse = 1,   // pattern at the first step only
};

DriveMode drive_mode_from_string(std::string_view s);
std::string_view to_string(DriveMode m);

struct TernaryEncoderConfig {
  int m_bits = 8;
  double y_max = 2.0;
  DriveMode drive = DriveMode::Constant;

  /// Quantization step y_max / 2^M.
  double delta() const;
  int max_level() const { return (1 << m_bits) - 1; }
  void validate() const;
};

using BipolarVector = Eigen::Matrix<std::int8_t, Eigen::Dynamic, 1>;
/// Rows are time steps, columns input neurons; entries in {-1, 0, +1}.
using SpikeFrame = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Bipolar M-bit quantizer: sign(y) times the binary expansion of
/// floor(|y|/delta + 1/2), saturated at 2^M - 1, MSB at the lowest index.
/// Keeps a per-instance count of clipped inputs.
class TernaryEncoder {
 public:
  explicit TernaryEncoder(TernaryEncoderConfig cfg);

  const TernaryEncoderConfig& config() const { return cfg_; }
  int width() const { return cfg_.m_bits; }

  /// Writes M entries into out.
  template <typename Derived>
  void encode_into(double y, Eigen::DenseBase<Derived>& out);
  BipolarVector encode(double y);
  /// Real lane followed by imaginary lane (2M entries).
  BipolarVector encode(Complex y);

  std::uint64_t clip_count() const { return clipped_; }
  std::uint64_t encode_count() const { return encoded_; }
  void reset_stats() { clipped_ = encoded_ = 0; }

 private:
  int level(double magnitude);

  TernaryEncoderConfig cfg_;
  std::uint64_t clipped_ = 0;
  std::uint64_t encoded_ = 0;
};

BipolarVector ternary_encode(double y, const TernaryEncoderConfig& cfg);
BipolarVector encode_complex(Complex y, const TernaryEncoderConfig& cfg);
/// Inverse quantizer: sign * level * delta. Rejects vectors mixing +1 and -1.
double ternary_decode(const BipolarVector& v, const TernaryEncoderConfig& cfg);

Eigen::VectorXi one_hot(int index, int size);

/// Widths of the input layer blocks for a window of n complex samples and m
/// fed-back symbol decisions.
struct FrameLayout {
  int m_bits = 8;
  int n_ff = 0;
  int m_fb = 0;
  int alphabet_size = 4;

  int feedforward_width() const { return 2 * m_bits * n_ff; }
  int feedback_width() const { return alphabet_size * m_fb; }
  int width() const { return feedforward_width() + feedback_width(); }
};

/// Fills one input column: the encoded window (newest sample first) followed by
/// one-hot blocks of the fed-back indices (most recent first).
template <typename Derived>
void fill_frame_column(TernaryEncoder& enc, const FrameLayout& layout, std::span<const Complex> window,
                       std::span<const int> feedback, Eigen::DenseBase<Derived>& column);

/// Full time-by-neuron frame per the encoder's drive mode.
SpikeFrame build_frame(TernaryEncoder& enc, const FrameLayout& layout, std::span<const Complex> window,
                       std::span<const int> feedback, int kappa_max);

// ---------------------------------------------------------------------------

template <typename Derived>
void TernaryEncoder::encode_into(double y, Eigen::DenseBase<Derived>& out) {
  const int lvl = level(std::abs(y));
  const int sgn = (y > 0.0) - (y < 0.0);
  for (int b = 0; b < cfg_.m_bits; ++b) {
    const int bit = (lvl >> (cfg_.m_bits - 1 - b)) & 1;
    out(b) = static_cast<typename Derived::Scalar>(sgn * bit);
  }
}

template <typename Derived>
void fill_frame_column(TernaryEncoder& enc, const FrameLayout& layout, std::span<const Complex> window,
                       std::span<const int> feedback, Eigen::DenseBase<Derived>& column) {
  if (static_cast<int>(window.size()) != layout.n_ff || static_cast<int>(feedback.size()) != layout.m_fb ||
      column.size() != layout.width()) {
    throw ShapeError("frame layout mismatch: window " + std::to_string(window.size()) + "/" +
                     std::to_string(layout.n_ff) + ", feedback " + std::to_string(feedback.size()) + "/" +
                     std::to_string(layout.m_fb) + ", width " + std::to_string(column.size()) + "/" +
                     std::to_string(layout.width()));
  }
  using Scalar = typename Derived::Scalar;
  const int mb = layout.m_bits;
  Eigen::Index pos = 0;
  for (const Complex& y : window) {
    auto re = column.derived().segment(pos, mb);
    enc.encode_into(y.real(), re);
    auto im = column.derived().segment(pos + mb, mb);
    enc.encode_into(y.imag(), im);
    pos += 2 * mb;
  }
  for (int idx : feedback) {
    if (idx < 0 || idx >= layout.alphabet_size) throw ShapeError("feedback index out of range");
    auto block = column.derived().segment(pos, layout.alphabet_size);
    block.setZero();
    block(idx) = Scalar(1);
    pos += layout.alphabet_size;
  }
}

}  // namespace spikeq

#endif  // SPIKEQ_ENCODING_HPP
