#include <cmath>

#include "doctest.h"
#include "spikeq/eq/classical.hpp"
#include "spikeq/eq/train.hpp"

using namespace spikeq;
using namespace spikeq::eq;

namespace {

struct Trial {
  IndexVector sent;
  ComplexVector y;
  std::size_t count = 0;
};

// count symbols to score plus a tail long enough for any delay used here.
Trial trial(const Constellation& c, const FirChannel& h, double ebn0_db, std::size_t count, std::uint64_t seed) {
  Rng data = make_rng(seed, Stream::Data);
  Rng noise = make_rng(seed, Stream::Noise);
  const double s2 = std::isfinite(ebn0_db) ? ebn0_to_sigma2(ebn0_db, c.bits_per_symbol()) : 0.0;
  Burst b = draw_burst(c, h, s2, count + 64, data, noise);
  return {std::move(b.sent), std::move(b.received), count};
}

ErrorCount score(const Trial& t, const EqualizerOutput& out, const Constellation& c) {
  return count_errors(out, t.sent, t.count, c);
}

double empirical_mse(const Trial& t, const LinearEqualizer& eq, const Constellation& c) {
  double acc = 0.0;
  for (std::size_t j = 0; j < t.count; ++j) {
    const std::size_t k = j + static_cast<std::size_t>(eq.delay);
    Complex z = 0.0;
    for (Eigen::Index i = 0; i < eq.taps.size() && i <= static_cast<Eigen::Index>(k); ++i) {
      z += eq.taps(i) * t.y[k - static_cast<std::size_t>(i)];
    }
    acc += std::norm(z - c.point(t.sent[j]));
  }
  return acc / static_cast<double>(t.count);
}

}  // namespace

TEST_CASE("architecture presets") {
  const auto a = DfeArchitecture::preset("proakis-a");
  const auto b = DfeArchitecture::preset("proakis-b");
  const auto c = DfeArchitecture::preset("proakis-c");
  CHECK(a.n_in() == 496);
  CHECK(b.n_in() == 460);
  CHECK(c.n_in() == 364);
  CHECK(a.n_out() == 16);
  CHECK(b.n_out() == 4);
  CHECK(a.n_hidden == 640);
  CHECK(c.n_hidden == 320);
  for (const auto& p : {a, b, c}) {
    CHECK(p.total_taps() == 31);
    CHECK(p.raw_width() == 62);
    CHECK(p.kappa_max == 10);
    CHECK(p.m_bits == 8);
  }
  CHECK(preset_constellation("proakis-a") == "16qam");
  CHECK(preset_constellation("proakis-c") == "qpsk");
  CHECK_THROWS_AS(DfeArchitecture::preset("proakis-d"), ConfigError);
}

TEST_CASE("count_errors aligns by the decision delay") {
  const auto c = Constellation::qpsk();
  const IndexVector sent{0, 1, 2, 3};
  auto out = make_output({0, 0, 1, 2, 0}, c, 1);
  CHECK(out.bits.size() == 10);
  auto e = count_errors(out, sent, 4, c);
  CHECK(e.symbol_errors == 1);
  CHECK(e.bit_errors == 2);  // 3 (11) decided as 0 (00)
  CHECK(e.bits == 8);
  CHECK(e.ber() == doctest::Approx(0.25));
  CHECK_THROWS_AS(count_errors(out, sent, 5, c), ShapeError);
}

TEST_CASE("convolution matrix") {
  const auto m = convolution_matrix(FirChannel::proakis_b(), 4);
  CHECK(m.rows() == 6);
  CHECK(m.cols() == 4);
  CHECK(m(0, 0).real() == 0.407);
  CHECK(m(1, 0).real() == 0.815);
  CHECK(m(3, 1).real() == 0.407);
  CHECK(m(0, 1) == Complex(0.0));
  CHECK_THROWS_AS(convolution_matrix(FirChannel::proakis_b(), 0), ConfigError);
}

TEST_CASE("zero forcing") {
  SUBCASE("identity channel gives a unit impulse at delay 0") {
    const auto zf = zf_equalizer(FirChannel::identity(), 31);
    CHECK(zf.delay == 0);
    CHECK(std::abs(zf.taps(0) - 1.0) < 1e-12);
    CHECK(zf.taps.tail(30).norm() < 1e-12);
    CHECK(zf.cost < 1e-20);
  }
  SUBCASE("Proakis B") {
    // Least-squares optimum from an independent solver. Its residual ISI
    // (0.0236) stays above 1e-2: a 31-tap filter cannot invert the double
    // spectral null at half the symbol rate.
    const auto zf = zf_equalizer(FirChannel::proakis_b(), 31);
    CHECK(zf.taps.size() == 31);
    CHECK(zf.delay == 16);
    CHECK(zf.cost == doctest::Approx(0.0241572).epsilon(1e-5));
    const Eigen::VectorXcd c = combined_response(FirChannel::proakis_b(), zf.taps);
    CHECK(c(zf.delay).real() == doctest::Approx(0.975843).epsilon(1e-5));
    Eigen::Index peak = 0;
    c.cwiseAbs().maxCoeff(&peak);
    CHECK(peak == zf.delay);
    const double isi = c.squaredNorm() - std::norm(c(zf.delay));
    CHECK(isi == doctest::Approx(0.0235737).epsilon(1e-5));
  }
  SUBCASE("Proakis C is markedly worse than B") {
    const auto b = zf_equalizer(FirChannel::proakis_b(), 31);
    const auto c = zf_equalizer(FirChannel::proakis_c(), 31);
    CHECK(c.delay == 18);
    CHECK(c.cost == doctest::Approx(0.0491878).epsilon(1e-5));
    CHECK(c.cost > 1.5 * b.cost);
  }
}

TEST_CASE("LMMSE") {
  const auto h = FirChannel::proakis_b();
  const double s2 = ebn0_to_sigma2(11.0, 2);
  const auto lm = lmmse_equalizer(h, 31, s2);
  CHECK(lm.delay == 15);
  CHECK(lm.cost == doctest::Approx(0.260358).epsilon(1e-5));

  const auto zf = zf_equalizer(h, 31);
  const auto lim = lmmse_equalizer(h, 31, 1e-12);
  CHECK(lim.delay == zf.delay);
  CHECK((lim.taps - zf.taps).cwiseAbs().maxCoeff() < 1e-6);

  CHECK(lmmse_equalizer(h, 31, 1e12).taps.norm() < 1e-9);
  CHECK_THROWS_AS(lmmse_equalizer(h, 31, -1.0), ConfigError);
}

TEST_CASE("LMMSE has lower empirical MSE than ZF") {
  const auto c = Constellation::qpsk();
  const auto h = FirChannel::proakis_b();
  for (double ebn0 : {6.0, 11.0, 16.0}) {
    const auto t = trial(c, h, ebn0, 100000, 11);
    const double s2 = ebn0_to_sigma2(ebn0, 2);
    const double m_zf = empirical_mse(t, zf_equalizer(h, 31), c);
    const double m_lm = empirical_mse(t, lmmse_equalizer(h, 31, s2), c);
    CHECK(m_lm <= m_zf);
    CHECK(m_lm == doctest::Approx(lmmse_equalizer(h, 31, s2).cost).epsilon(0.03));
  }
}

TEST_CASE("MMSE-DFE design") {
  const double s2 = ebn0_to_sigma2(11.0, 2);
  SUBCASE("ISI-free channel needs no feedback") {
    const auto f = classical_dfe(FirChannel::identity(), 28, 3, s2);
    CHECK(f.delay == 0);
    CHECK(f.fb.norm() < 1e-12);
    CHECK(f.mse == doctest::Approx(0.0381993).epsilon(1e-5));
  }
  SUBCASE("Proakis B matches the independent solver") {
    const auto f = classical_dfe(FirChannel::proakis_b(), 28, 3, s2);
    CHECK(f.ff.size() == 28);
    CHECK(f.fb.size() == 3);
    CHECK(f.delay == 27);
    CHECK(f.mse == doctest::Approx(0.0872451).epsilon(1e-5));
    CHECK(f.fb(0).real() == doctest::Approx(1.06850492).epsilon(1e-6));
    CHECK(f.fb(1).real() == doctest::Approx(0.36388149).epsilon(1e-6));
    CHECK(std::abs(f.fb(2)) == 0.0);
    CHECK(f.mse < lmmse_equalizer(FirChannel::proakis_b(), 31, s2).cost);
  }
}

TEST_CASE("noiseless ISI-free runs are error free for every classical receiver") {
  const auto c = Constellation::qam16();
  const auto h = FirChannel::identity();
  const auto t = trial(c, h, INFINITY, 2000, 3);
  CHECK(score(t, equalize_linear(t.y, zf_equalizer(h, 31), c), c).symbol_errors == 0);
  CHECK(score(t, equalize_linear(t.y, lmmse_equalizer(h, 31, 1e-3), c), c).symbol_errors == 0);
  CHECK(score(t, equalize_dfe(t.y, classical_dfe(h, 20, 11, 1e-3), c), c).symbol_errors == 0);
  CHECK(score(t, map_detector(t.y, h, c, 0.0), c).symbol_errors == 0);
}

TEST_CASE("BER ordering on Proakis B at 11 dB") {
  const auto c = Constellation::qpsk();
  const auto h = FirChannel::proakis_b();
  const double s2 = ebn0_to_sigma2(11.0, 2);
  const auto t = trial(c, h, 11.0, 500000, 5);  // 10^6 bits
  const auto zf = score(t, equalize_linear(t.y, zf_equalizer(h, 31), c), c);
  const auto lm = score(t, equalize_linear(t.y, lmmse_equalizer(h, 31, s2), c), c);
  const auto f = classical_dfe(h, 28, 3, s2);
  const auto dfe = score(t, equalize_dfe(t.y, f, c), c);
  const auto genie = score(t, equalize_dfe(t.y, f, c, t.sent), c);
  CHECK(zf.bits == 1000000);
  CHECK(dfe.bit_errors < lm.bit_errors);
  CHECK(lm.bit_errors < zf.bit_errors);
  CHECK(genie.bit_errors <= dfe.bit_errors);
}

TEST_CASE("MAP detector") {
  const auto qpsk = Constellation::qpsk();
  SUBCASE("trellis sizes and the state budget") {
    CHECK(trellis_states(FirChannel::proakis_b(), qpsk) == 16);
    CHECK(trellis_states(FirChannel::proakis_c(), qpsk) == 256);
    CHECK(trellis_states(FirChannel::proakis_a(), Constellation::qam16()) == (std::size_t{1} << 40));
    const ComplexVector y(8, Complex(0.0));
    CHECK_THROWS_AS(map_detector(y, FirChannel::proakis_a(), Constellation::qam16(), 0.1), InfeasibleError);
    CHECK_THROWS_AS(map_detector(y, FirChannel::proakis_a(), qpsk, 0.1), InfeasibleError);
    CHECK_THROWS_AS(map_detector(y, FirChannel::proakis_c(), qpsk, 0.1, 255), InfeasibleError);
    CHECK_NOTHROW(map_detector(y, FirChannel::proakis_c(), qpsk, 0.1, 256));
  }
  SUBCASE("noiseless input is recovered exactly") {
    for (const auto& h : {FirChannel::proakis_b(), FirChannel::proakis_c()}) {
      const auto t = trial(qpsk, h, INFINITY, 3000, 8);
      const auto out = map_detector(t.y, h, qpsk, 0.0);
      CHECK(out.decision_delay == 0);
      CHECK(score(t, out, qpsk).symbol_errors == 0);
    }
  }
  SUBCASE("a single tap reduces to minimum-distance demapping") {
    const auto c16 = Constellation::qam16();
    const FirChannel h("gain", {Complex(0.8, 0.1)});
    const auto t = trial(c16, h, 6.0, 5000, 9);
    const auto out = map_detector(t.y, h, c16, ebn0_to_sigma2(6.0, 4));
    std::size_t differ = 0;
    for (std::size_t k = 0; k < t.y.size(); ++k) {
      int best = 0;
      for (int a = 1; a < c16.size(); ++a) {
        if (std::norm(t.y[k] - h.taps()[0] * c16.point(a)) < std::norm(t.y[k] - h.taps()[0] * c16.point(best))) best = a;
      }
      differ += best != out.symbol_indices[k];
    }
    CHECK(differ == 0);
  }
}

TEST_CASE("MAP <= DFE <= LMMSE on Proakis B and C") {
  const auto c = Constellation::qpsk();
  for (const auto& h : {FirChannel::proakis_b(), FirChannel::proakis_c()}) {
    const auto arch = DfeArchitecture::preset(h.name());
    for (double ebn0 : {6.0, 10.0}) {
      CAPTURE(h.name());
      CAPTURE(ebn0);
      const double s2 = ebn0_to_sigma2(ebn0, 2);
      const auto t = trial(c, h, ebn0, 100000, 21);
      const auto map = score(t, map_detector(t.y, h, c, s2), c);
      const auto dfe = score(t, equalize_dfe(t.y, classical_dfe(h, arch.n_ff, arch.m_fb, s2), c), c);
      const auto lm = score(t, equalize_linear(t.y, lmmse_equalizer(h, 31, s2), c), c);
      CHECK(map.bit_errors <= dfe.bit_errors);
      CHECK(dfe.bit_errors <= lm.bit_errors);
    }
  }
}
