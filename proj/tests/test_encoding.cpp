#include <cmath>
#include <vector>

#include "doctest.h"
#include "spikeq/encoding.hpp"
#include "spikeq/rng.hpp"

using namespace spikeq;

namespace {

std::vector<int> as_vec(const BipolarVector& v) {
  std::vector<int> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) out[static_cast<std::size_t>(k)] = v(k);
  return out;
}

}  // namespace

TEST_CASE("ternary_encode reproduces the worked examples") {
  const TernaryEncoderConfig cfg{4, 2.0};
  CHECK(as_vec(ternary_encode(2.0, cfg)) == std::vector<int>{1, 1, 1, 1});
  CHECK(as_vec(ternary_encode(-1.1, cfg)) == std::vector<int>{-1, 0, 0, -1});
  for (int m : {1, 4, 8, 12}) {
    CHECK((ternary_encode(0.0, TernaryEncoderConfig{m, 1.5}).array() == 0).all());
  }
}

TEST_CASE("encoder counts clipped inputs per instance") {
  TernaryEncoder enc({4, 2.0});
  enc.encode(2.0);    // level 16 saturates
  enc.encode(-5.0);
  enc.encode(0.3);
  CHECK(enc.clip_count() == 2);
  CHECK(enc.encode_count() == 3);
  TernaryEncoder other({4, 2.0});
  CHECK(other.clip_count() == 0);
  CHECK(as_vec(enc.encode(-5.0)) == std::vector<int>{-1, -1, -1, -1});
}

TEST_CASE("ternary_decode") {
  const TernaryEncoderConfig c4{4, 2.0};
  BipolarVector ones(4);
  ones << 1, 1, 1, 1;
  CHECK(ternary_decode(ones, c4) == doctest::Approx(1.875));
  CHECK(ternary_decode(BipolarVector::Zero(4), c4) == 0.0);

  BipolarVector mixed(4);
  mixed << 1, 0, -1, 0;
  CHECK_THROWS_AS(ternary_decode(mixed, c4), ShapeError);

  const TernaryEncoderConfig c8{8, 2.0};
  CHECK(std::abs(ternary_decode(ternary_encode(0.5, c8), c8) - 0.5) <= 2.0 / 512);
}

TEST_CASE("encoder properties over random inputs") {
  const TernaryEncoderConfig cfg{8, 2.0};
  const double delta = cfg.delta();
  auto rng = make_rng(99, Stream::Data);
  TernaryEncoder enc(cfg);
  for (int k = 0; k < 10'000; ++k) {
    const double y = uniform(rng, -(cfg.y_max - delta / 2), cfg.y_max - delta / 2);
    const auto e = enc.encode(y);
    CHECK(std::abs(ternary_decode(e, cfg) - y) <= delta / 2 + 1e-15);
    const BipolarVector neg = enc.encode(-y);
    CHECK(neg == BipolarVector(-e));
  }
  CHECK(enc.clip_count() == 0);

  double prev = -1.0;
  for (int k = 0; k <= 4000; ++k) {
    const double y = cfg.y_max * k / 4000.0;
    const double d = ternary_decode(enc.encode(y), cfg);
    CHECK(d >= prev);
    prev = d;
  }
}

TEST_CASE("encode_complex places the real lane first") {
  const TernaryEncoderConfig cfg{4, 2.0};
  CHECK(as_vec(encode_complex(Complex(2.0, 0.0), cfg)) == std::vector<int>{1, 1, 1, 1, 0, 0, 0, 0});
  CHECK(as_vec(encode_complex(Complex(0.0, -1.1), cfg)) == std::vector<int>{0, 0, 0, 0, -1, 0, 0, -1});
  CHECK((encode_complex(Complex{}, cfg).array() == 0).all());
  CHECK(encode_complex(Complex{}, cfg).size() == 8);
}

TEST_CASE("one_hot") {
  CHECK(one_hot(2, 4) == Eigen::Vector4i(0, 0, 1, 0));
  const auto e0 = one_hot(0, 16);
  CHECK(e0.size() == 16);
  CHECK(e0(0) == 1);
  for (int size = 1; size <= 16; ++size)
    for (int i = 0; i < size; ++i) CHECK(one_hot(i, size).sum() == 1);
  CHECK_THROWS_AS(one_hot(4, 4), ShapeError);
  CHECK_THROWS_AS(one_hot(-1, 4), ShapeError);
}

TEST_CASE("frame widths match the equalizer architectures") {
  CHECK(FrameLayout{8, 28, 3, 4}.width() == 460);
  CHECK(FrameLayout{8, 20, 11, 16}.width() == 496);
  CHECK(FrameLayout{8, 20, 11, 4}.width() == 364);
}

TEST_CASE("build_frame") {
  const FrameLayout layout{4, 2, 2, 4};
  TernaryEncoder enc({4, 2.0, DriveMode::Constant});
  const ComplexVector window = {Complex(2.0, 0.0), Complex(0.0, -1.1)};
  const std::vector<int> fb = {2, 0};
  const auto frame = build_frame(enc, layout, window, fb, 10);
  REQUIRE(frame.rows() == 10);
  REQUIRE(frame.cols() == layout.width());
  const std::vector<int> expected = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, -1, 0, 0, -1, 0, 0, 1, 0, 1, 0, 0, 0};
  for (int t = 0; t < 10; ++t)
    for (int c = 0; c < layout.width(); ++c) CHECK(frame(t, c) == expected[static_cast<std::size_t>(c)]);

  TernaryEncoder imp({4, 2.0, DriveMode::Impulse});
  const auto f2 = build_frame(imp, layout, window, fb, 10);
  CHECK(f2.row(0) == frame.row(0));
  CHECK((f2.bottomRows(9).array() == 0).all());

  const std::vector<int> short_fb = {1};
  CHECK_THROWS_AS(build_frame(enc, layout, window, short_fb, 10), ShapeError);
  const std::vector<int> bad_fb = {1, 4};
  CHECK_THROWS_AS(build_frame(enc, layout, window, bad_fb, 10), ShapeError);
}
