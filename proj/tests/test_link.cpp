#include <cmath>
#include <numeric>

#include "doctest.h"
#include "spikeq/link.hpp"

using namespace spikeq;

TEST_CASE("generate_bits") {
  CHECK(generate_bits(0, 7).empty());

  const auto bits = generate_bits(1'000'000, 42);
  const double ones = std::accumulate(bits.begin(), bits.end(), 0.0) / static_cast<double>(bits.size());
  CHECK(ones >= 0.497);
  CHECK(ones <= 0.503);

  CHECK(generate_bits(1000, 5) == generate_bits(1000, 5));
  CHECK(generate_bits(1000, 5) != generate_bits(1000, 6));
}

TEST_CASE("constellations are unit energy with unique labels") {
  for (const auto& c : {Constellation::qpsk(), Constellation::qam16()}) {
    double e = 0.0;
    for (const auto& p : c.points()) e += std::norm(p);
    CHECK(std::abs(e / c.size() - 1.0) < 1e-12);
    CHECK((1 << c.bits_per_symbol()) == c.size());
    for (int a = 0; a < c.size(); ++a)
      for (int b = a + 1; b < c.size(); ++b) CHECK(c.bit_label(a) != c.bit_label(b));
  }
}

TEST_CASE("Gray adjacency: nearest neighbours differ in exactly one bit") {
  for (const auto& c : {Constellation::qpsk(), Constellation::qam16()}) {
    double dmin = 1e9;
    for (int a = 0; a < c.size(); ++a)
      for (int b = a + 1; b < c.size(); ++b) dmin = std::min(dmin, std::abs(c.point(a) - c.point(b)));
    int pairs = 0;
    for (int a = 0; a < c.size(); ++a) {
      for (int b = a + 1; b < c.size(); ++b) {
        if (std::abs(std::abs(c.point(a) - c.point(b)) - dmin) > 1e-9) continue;
        ++pairs;
        const auto la = c.bit_label(a), lb = c.bit_label(b);
        int diff = 0;
        for (std::size_t k = 0; k < la.size(); ++k) diff += la[k] != lb[k];
        CHECK(diff == 1);
      }
    }
    // lattice edges: 4 for the 2x2 grid, 24 for the 4x4 grid
    CHECK(pairs == (c.size() == 4 ? 4 : 24));
  }
}

TEST_CASE("gray_map") {
  const auto q = Constellation::qpsk();
  const std::uint8_t b00[] = {0, 0};
  const auto x = gray_map(b00, q);
  REQUIRE(x.size() == 1);
  CHECK(x[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(x[0].imag() == doctest::Approx(1.0 / std::sqrt(2.0)));

  const std::uint8_t odd[] = {0, 1, 1};
  CHECK_THROWS_AS(gray_map(odd, q), ShapeError);

  for (const auto& c : {Constellation::qpsk(), Constellation::qam16()}) {
    const auto bits = generate_bits(4000, 3);
    CHECK(gray_demap(gray_map(bits, c), c) == bits);
  }

  const auto c16 = Constellation::qam16();
  const auto sym = gray_map(generate_bits(400'000, 9), c16);
  double p = 0.0;
  for (const auto& s : sym) p += std::norm(s);
  CHECK(std::abs(p / static_cast<double>(sym.size()) - 1.0) < 0.02);
}

TEST_CASE("apply_channel") {
  const ComplexVector x = {Complex(0.3, -1), Complex(2, 0.5), Complex(-1, 1)};
  CHECK(apply_channel(x, FirChannel::identity()) == x);

  const ComplexVector impulse = {1.0, 0.0, 0.0, 0.0};
  const auto y = apply_channel(impulse, FirChannel::proakis_b());
  REQUIRE(y.size() == 4);
  CHECK(y[0].real() == doctest::Approx(0.407));
  CHECK(y[1].real() == doctest::Approx(0.815));
  CHECK(y[2].real() == doctest::Approx(0.407));
  CHECK(y[3] == Complex{});

  CHECK(std::abs(FirChannel::proakis_c().energy() - 0.999602) <= 1e-12);
  CHECK(FirChannel::proakis_a().length() == 11);

  CHECK_THROWS_AS(FirChannel("zero", {0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(FirChannel("empty", {}), ConfigError);
}

TEST_CASE("apply_channel is linear") {
  auto rng = make_rng(11, Stream::Data);
  ComplexVector x1(257), x2(257);
  for (auto& v : x1) v = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
  for (auto& v : x2) v = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
  const Complex a(0.7, -0.2), b(-1.3, 0.4);
  ComplexVector mix(x1.size());
  for (std::size_t k = 0; k < mix.size(); ++k) mix[k] = a * x1[k] + b * x2[k];
  for (const auto& ch : {FirChannel::proakis_a(), FirChannel::proakis_c()}) {
    const auto lhs = apply_channel(mix, ch);
    const auto y1 = apply_channel(x1, ch), y2 = apply_channel(x2, ch);
    for (std::size_t k = 0; k < lhs.size(); ++k) CHECK(std::abs(lhs[k] - (a * y1[k] + b * y2[k])) < 1e-12);
  }
}

TEST_CASE("channel output energy approaches tap energy") {
  const auto c = Constellation::qpsk();
  const auto x = gray_map(generate_bits(200'000, 21), c);
  for (const auto& ch : {FirChannel::proakis_a(), FirChannel::proakis_b(), FirChannel::proakis_c()}) {
    const auto y = apply_channel(x, ch);
    double e = 0.0;
    for (const auto& v : y) e += std::norm(v);
    e /= static_cast<double>(y.size());
    CHECK(std::abs(e - ch.energy()) / ch.energy() < 0.01);
  }
}

TEST_CASE("add_awgn") {
  const ComplexVector y(1000, Complex(0.5, -0.5));
  CHECK(add_awgn(y, NoiseSpec{0.0, 0.0, 1}) == y);

  CHECK(ebn0_to_sigma2(10.0, 2) == doctest::Approx(0.05));
  CHECK(NoiseSpec::from_ebn0(10.0, 2, 0).sigma2 == doctest::Approx(0.05));

  const ComplexVector zeros(1'000'000);
  const auto n = add_awgn(zeros, NoiseSpec{0.0, 0.05, 77});
  double var = 0.0, re = 0.0;
  for (const auto& v : n) {
    var += std::norm(v);
    re += v.real() * v.real();
  }
  var /= static_cast<double>(n.size());
  re /= static_cast<double>(n.size());
  CHECK(std::abs(var - 0.05) < 0.001);
  CHECK(std::abs(re - 0.025) < 0.001);

  CHECK(add_awgn(y, NoiseSpec{0.0, 0.1, 4}) == add_awgn(y, NoiseSpec{0.0, 0.1, 4}));
}

TEST_CASE("by_name lookups") {
  CHECK(FirChannel::by_name("proakis-b").length() == 3);
  CHECK(Constellation::by_name("16qam").size() == 16);
  CHECK_THROWS_AS(FirChannel::by_name("proakis-z"), ConfigError);
  CHECK_THROWS_AS(Constellation::by_name("8psk"), ConfigError);
}
