#ifndef SPIKEQ_LINK_HPP
#define SPIKEQ_LINK_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "spikeq/common.hpp"
#include "spikeq/rng.hpp"

namespace spikeq {

/// Modulation alphabet. Point k carries the bit label equal to the binary
/// expansion of k (most significant bit first), so a symbol index doubles as
/// its label.
class Constellation {
 public:
  Constellation(std::string name, ComplexVector points);

  static Constellation qpsk();
  static Constellation qam16();
  /// "qpsk" or "16qam"; throws ConfigError otherwise.
  static Constellation by_name(std::string_view name);

  const std::string& name() const { return name_; }
  const ComplexVector& points() const { return points_; }
  const Complex& point(int index) const { return points_[static_cast<std::size_t>(index)]; }
  int size() const { return static_cast<int>(points_.size()); }
  int bits_per_symbol() const { return bits_per_symbol_; }
  /// Bit label of a point as a string such as "01".
  std::string bit_label(int index) const;

  /// Index of the nearest point (ties to the lowest index).
  int slice(Complex y) const;

 private:
  std::string name_;
  ComplexVector points_;
  int bits_per_symbol_ = 0;
};

class FirChannel {
 public:
  FirChannel(std::string name, ComplexVector taps);

  static FirChannel proakis_a();
  static FirChannel proakis_b();
  static FirChannel proakis_c();
  static FirChannel identity();
  /// "proakis-a", "proakis-b", "proakis-c" or "identity".
  static FirChannel by_name(std::string_view name);

  const std::string& name() const { return name_; }
  const ComplexVector& taps() const { return taps_; }
  int length() const { return static_cast<int>(taps_.size()); }
  /// Sum of squared tap magnitudes.
  double energy() const;

 private:
  std::string name_;
  ComplexVector taps_;
};

struct NoiseSpec {
  double ebn0_db = 0.0;
  double sigma2 = 0.0;  // total complex noise variance
  std::uint64_t rng_seed = 0;

  /// sigma2 = Eb / 10^(ebn0_db/10) with Eb = 1/bits_per_symbol.
  static NoiseSpec from_ebn0(double ebn0_db, int bits_per_symbol, std::uint64_t seed);
};

double ebn0_to_sigma2(double ebn0_db, int bits_per_symbol);

BitVector generate_bits(std::size_t count, Rng& rng);
BitVector generate_bits(std::size_t count, std::uint64_t seed);

/// Throws ShapeError when the bit count is not a multiple of bits_per_symbol.
ComplexVector gray_map(std::span<const std::uint8_t> bits, const Constellation& c);
IndexVector bits_to_indices(std::span<const std::uint8_t> bits, const Constellation& c);
ComplexVector indices_to_symbols(std::span<const int> indices, const Constellation& c);
BitVector indices_to_bits(std::span<const int> indices, const Constellation& c);
/// Minimum-distance demapping back to bits.
BitVector gray_demap(std::span<const Complex> symbols, const Constellation& c);

/// y[k] = sum_l h[l] x[k-l] with x[k<0] = 0; output has the input length.
ComplexVector apply_channel(std::span<const Complex> x, const FirChannel& ch);

ComplexVector add_awgn(std::span<const Complex> y, double sigma2, Rng& rng);
ComplexVector add_awgn(std::span<const Complex> y, const NoiseSpec& ns);

}  // namespace spikeq

#endif  // SPIKEQ_LINK_HPP
