#include "spikeq/encoding.hpp"

#include <cmath>
#include <string>

namespace spikeq {

DriveMode drive_mode_from_string(std::string_view s) {
  if (s == "constant") return DriveMode::Constant;
  if (s == "impulse") return DriveMode::Impulse;
  throw ConfigError("unknown drive_mode '" + std::string(s) + "' (expected constant|impulse)");
}

std::string_view to_string(DriveMode m) { return m == DriveMode::Constant ? "constant" : "impulse"; }

double TernaryEncoderConfig::delta() const { return y_max / std::ldexp(1.0, m_bits); }

void TernaryEncoderConfig::validate() const {
  if (m_bits < 1 || m_bits > 30) throw ConfigError("encoder m_bits must be in [1, 30]");
  if (!(y_max > 0.0) || !std::isfinite(y_max)) throw ConfigError("encoder y_max must be positive");
}

TernaryEncoder::TernaryEncoder(TernaryEncoderConfig cfg) : cfg_(cfg) { cfg_.validate(); }

int TernaryEncoder::level(double magnitude) {
  ++encoded_;
  if (!std::isfinite(magnitude)) throw ShapeError("non-finite value passed to the encoder");
  const double q = std::floor(magnitude / cfg_.delta() + 0.5);
  if (q > cfg_.max_level()) {
    ++clipped_;
    return cfg_.max_level();
  }
  return static_cast<int>(q);
}

BipolarVector TernaryEncoder::encode(double y) {
  BipolarVector v(cfg_.m_bits);
  encode_into(y, v);
  return v;
}

BipolarVector TernaryEncoder::encode(Complex y) {
  BipolarVector v(2 * cfg_.m_bits);
  auto re = v.head(cfg_.m_bits);
  encode_into(y.real(), re);
  auto im = v.tail(cfg_.m_bits);
  encode_into(y.imag(), im);
  return v;
}

BipolarVector ternary_encode(double y, const TernaryEncoderConfig& cfg) {
  TernaryEncoder enc(cfg);
  return enc.encode(y);
}

BipolarVector encode_complex(Complex y, const TernaryEncoderConfig& cfg) {
  TernaryEncoder enc(cfg);
  return enc.encode(y);
}

double ternary_decode(const BipolarVector& v, const TernaryEncoderConfig& cfg) {
  if (v.size() != cfg.m_bits) throw ShapeError("decode: vector length differs from m_bits");
  int sign = 0;
  long long level = 0;
  for (Eigen::Index b = 0; b < v.size(); ++b) {
    const int e = v(b);
    if (e < -1 || e > 1) throw ShapeError("decode: entry outside {-1, 0, +1}");
    if (e != 0) {
      if (sign != 0 && e != sign) throw ShapeError("decode: mixed-sign spike pattern");
      sign = e;
    }
    level = (level << 1) | (e != 0 ? 1 : 0);
  }
  return sign * static_cast<double>(level) * cfg.delta();
}

Eigen::VectorXi one_hot(int index, int size) {
  if (size <= 0 || index < 0 || index >= size) {
    throw ShapeError("one_hot index " + std::to_string(index) + " outside [0, " + std::to_string(size) + ")");
  }
  Eigen::VectorXi v = Eigen::VectorXi::Zero(size);
  v(index) = 1;
  return v;
}

SpikeFrame build_frame(TernaryEncoder& enc, const FrameLayout& layout, std::span<const Complex> window,
                       std::span<const int> feedback, int kappa_max) {
  if (kappa_max < 1) throw ShapeError("kappa_max must be >= 1");
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, 1> column(layout.width());
  fill_frame_column(enc, layout, window, feedback, column);
  SpikeFrame frame = SpikeFrame::Zero(kappa_max, layout.width());
  const int rows = enc.config().drive == DriveMode::Constant ? kappa_max : 1;
  for (int t = 0; t < rows; ++t) frame.row(t) = column.transpose();
  return frame;
}

}  // namespace spikeq
