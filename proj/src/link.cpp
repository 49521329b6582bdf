#include "spikeq/link.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace spikeq {

namespace {

// Gray-labelled 4-PAM levels indexed by the two-bit label.
constexpr double kPam4Gray[4] = {-3.0, -1.0, +3.0, +1.0};

}  // namespace

Constellation::Constellation(std::string name, ComplexVector points)
    : name_(std::move(name)), points_(std::move(points)) {
  const auto n = points_.size();
  if (n < 2 || !std::has_single_bit(n)) {
    throw ConfigError("constellation size must be a power of two >= 2");
  }
  bits_per_symbol_ = std::countr_zero(n);
}

Constellation Constellation::qpsk() {
  // bit 0 selects the sign of the real part, bit 1 the sign of the imaginary part; 0 -> +.
  const double a = 1.0 / std::sqrt(2.0);
  return Constellation("qpsk", {{a, a}, {a, -a}, {-a, a}, {-a, -a}});
}

Constellation Constellation::qam16() {
  // Bits b0 b1 pick the in-phase level, b2 b3 the quadrature level.
  const double scale = 1.0 / std::sqrt(10.0);
  ComplexVector pts(16);
  for (int k = 0; k < 16; ++k) {
    pts[static_cast<std::size_t>(k)] = Complex(kPam4Gray[k >> 2] * scale, kPam4Gray[k & 3] * scale);
  }
  return Constellation("16qam", std::move(pts));
}

Constellation Constellation::by_name(std::string_view name) {
  if (name == "qpsk") return qpsk();
  if (name == "16qam" || name == "qam16") return qam16();
  throw ConfigError("unknown constellation '" + std::string(name) + "'");
}

std::string Constellation::bit_label(int index) const {
  std::string s(static_cast<std::size_t>(bits_per_symbol_), '0');
  for (int b = 0; b < bits_per_symbol_; ++b) {
    if ((index >> (bits_per_symbol_ - 1 - b)) & 1) s[static_cast<std::size_t>(b)] = '1';
  }
  return s;
}

int Constellation::slice(Complex y) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < size(); ++k) {
    const double d = std::norm(y - points_[static_cast<std::size_t>(k)]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

FirChannel::FirChannel(std::string name, ComplexVector taps) : name_(std::move(name)), taps_(std::move(taps)) {
  if (taps_.empty()) throw ConfigError("channel needs at least one tap");
  if (std::all_of(taps_.begin(), taps_.end(), [](Complex t) { return t == Complex{}; })) {
    throw ConfigError("channel taps are all zero");
  }
}

FirChannel FirChannel::proakis_a() {
  return FirChannel("proakis-a", {0.04, -0.05, 0.07, -0.21, -0.5, 0.72, 0.36, 0.0, 0.21, 0.03, 0.07});
}

FirChannel FirChannel::proakis_b() { return FirChannel("proakis-b", {0.407, 0.815, 0.407}); }

FirChannel FirChannel::proakis_c() { return FirChannel("proakis-c", {0.227, 0.460, 0.688, 0.460, 0.227}); }

FirChannel FirChannel::identity() { return FirChannel("identity", {1.0}); }

FirChannel FirChannel::by_name(std::string_view name) {
  if (name == "proakis-a") return proakis_a();
  if (name == "proakis-b") return proakis_b();
  if (name == "proakis-c") return proakis_c();
  if (name == "identity") return identity();
  throw ConfigError("unknown channel '" + std::string(name) + "'");
}

double FirChannel::energy() const {
  return std::accumulate(taps_.begin(), taps_.end(), 0.0, [](double acc, Complex t) { return acc + std::norm(t); });
}

double ebn0_to_sigma2(double ebn0_db, int bits_per_symbol) {
  const double eb = 1.0 / bits_per_symbol;
  return eb / std::pow(10.0, ebn0_db / 10.0);
}

NoiseSpec NoiseSpec::from_ebn0(double ebn0_db, int bits_per_symbol, std::uint64_t seed) {
  return NoiseSpec{ebn0_db, ebn0_to_sigma2(ebn0_db, bits_per_symbol), seed};
}

BitVector generate_bits(std::size_t count, Rng& rng) {
  BitVector bits(count);
  std::uint64_t word = 0;
  for (std::size_t k = 0; k < count; ++k) {
    if (k % 64 == 0) word = rng();
    bits[k] = static_cast<std::uint8_t>(word & 1U);
    word >>= 1;
  }
  return bits;
}

BitVector generate_bits(std::size_t count, std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::Data);
  return generate_bits(count, rng);
}

IndexVector bits_to_indices(std::span<const std::uint8_t> bits, const Constellation& c) {
  const auto bps = static_cast<std::size_t>(c.bits_per_symbol());
  if (bits.size() % bps != 0) {
    throw ShapeError("bit count " + std::to_string(bits.size()) + " is not a multiple of " + std::to_string(bps));
  }
  IndexVector idx(bits.size() / bps);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    int v = 0;
    for (std::size_t b = 0; b < bps; ++b) v = (v << 1) | (bits[k * bps + b] & 1);
    idx[k] = v;
  }
  return idx;
}

ComplexVector indices_to_symbols(std::span<const int> indices, const Constellation& c) {
  ComplexVector x(indices.size());
  std::transform(indices.begin(), indices.end(), x.begin(), [&](int i) { return c.point(i); });
  return x;
}

ComplexVector gray_map(std::span<const std::uint8_t> bits, const Constellation& c) {
  return indices_to_symbols(bits_to_indices(bits, c), c);
}

BitVector indices_to_bits(std::span<const int> indices, const Constellation& c) {
  const int bps = c.bits_per_symbol();
  BitVector bits(indices.size() * static_cast<std::size_t>(bps));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    for (int b = 0; b < bps; ++b) {
      bits[k * static_cast<std::size_t>(bps) + static_cast<std::size_t>(b)] =
          static_cast<std::uint8_t>((indices[k] >> (bps - 1 - b)) & 1);
    }
  }
  return bits;
}

BitVector gray_demap(std::span<const Complex> symbols, const Constellation& c) {
  IndexVector idx(symbols.size());
  std::transform(symbols.begin(), symbols.end(), idx.begin(), [&](Complex y) { return c.slice(y); });
  return indices_to_bits(idx, c);
}

ComplexVector apply_channel(std::span<const Complex> x, const FirChannel& ch) {
  const auto& h = ch.taps();
  ComplexVector y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    Complex acc{};
    const std::size_t lmax = std::min(h.size(), k + 1);
    for (std::size_t l = 0; l < lmax; ++l) acc += h[l] * x[k - l];
    y[k] = acc;
  }
  return y;
}

ComplexVector add_awgn(std::span<const Complex> y, double sigma2, Rng& rng) {
  ComplexVector out(y.begin(), y.end());
  if (sigma2 <= 0.0) return out;
  std::normal_distribution<double> n01(0.0, 1.0);
  const double s = std::sqrt(sigma2 / 2.0);
  for (auto& v : out) {
    const double re = n01(rng);
    const double im = n01(rng);
    v += Complex(s * re, s * im);
  }
  return out;
}

ComplexVector add_awgn(std::span<const Complex> y, const NoiseSpec& ns) {
  auto rng = make_rng(ns.rng_seed, Stream::Noise);
  return add_awgn(y, ns.sigma2, rng);
}

}  // namespace spikeq
