#include "spikeq/eq/architecture.hpp"

#include <bit>
#include <string>

namespace spikeq::eq {

void DfeArchitecture::validate() const {
  if (n_ff < 1) throw ConfigError("n_ff must be at least 1");
  if (m_fb < 0) throw ConfigError("m_fb must be non-negative");
  if (m_bits < 1 || m_bits > 24) throw ConfigError("m_bits must lie in [1, 24]");
  if (alphabet_size < 2) throw ConfigError("alphabet_size must be at least 2");
  if (n_hidden < 1) throw ConfigError("n_hidden must be at least 1");
  if (kappa_max < 1) throw ConfigError("kappa_max must be at least 1");
}

DfeArchitecture DfeArchitecture::preset(std::string_view channel) {
  if (channel == "proakis-a") return {20, 11, 8, 16, 640, 10};
  if (channel == "proakis-b") return {28, 3, 8, 4, 320, 10};
  if (channel == "proakis-c") return {20, 11, 8, 4, 320, 10};
  throw ConfigError("no architecture preset for channel '" + std::string(channel) + "'");
}

std::string_view preset_constellation(std::string_view channel) {
  if (channel == "proakis-a") return "16qam";
  if (channel == "proakis-b" || channel == "proakis-c") return "qpsk";
  throw ConfigError("no constellation preset for channel '" + std::string(channel) + "'");
}

EqualizerOutput make_output(IndexVector indices, const Constellation& c, int decision_delay) {
  EqualizerOutput out;
  out.bits = indices_to_bits(indices, c);
  out.symbol_indices = std::move(indices);
  out.decision_delay = decision_delay;
  return out;
}

ErrorCount& ErrorCount::operator+=(const ErrorCount& o) {
  bit_errors += o.bit_errors;
  bits += o.bits;
  symbol_errors += o.symbol_errors;
  symbols += o.symbols;
  return *this;
}

ErrorCount count_errors(const EqualizerOutput& out, std::span<const int> sent, std::size_t count,
                        const Constellation& c) {
  const auto d = static_cast<std::size_t>(out.decision_delay);
  if (count > sent.size() || d + count > out.symbol_indices.size()) {
    throw ShapeError("equalizer output does not cover " + std::to_string(count) + " symbols at delay " +
                     std::to_string(d));
  }
  ErrorCount e;
  for (std::size_t j = 0; j < count; ++j) {
    const int diff = sent[j] ^ out.symbol_indices[j + d];
    e.symbol_errors += diff != 0;
    e.bit_errors += static_cast<std::uint64_t>(std::popcount(static_cast<unsigned>(diff)));
  }
  e.symbols = count;
  e.bits = count * static_cast<std::size_t>(c.bits_per_symbol());
  return e;
}

}  // namespace spikeq::eq
