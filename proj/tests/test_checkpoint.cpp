#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "spikeq/snn/checkpoint.hpp"
#include "spikeq/snn/loss.hpp"

#include <unistd.h>
#include <zlib.h>

using namespace spikeq;
using namespace spikeq::snn;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() : path(std::filesystem::temp_directory_path() / ("spikeq_ckpt_" + std::to_string(::getpid()))) {
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

Network<double> small_net(std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::Init);
  return Network<double>::dfe(24, 16, 4, NeuronParams::lif_defaults(), NeuronParams::li_defaults(), true, false, rng);
}

}  // namespace

TEST_CASE("checkpoint round trip is bit-identical") {
  TempDir dir;
  auto net = small_net(1);
  AdamState<double> opt;
  // one optimizer step so the moments are populated
  {
    Drive<double> d = Drive<double>::constant(Eigen::MatrixXd::Ones(24, 3), 10);
    Tape<double> tape;
    const auto out = forward(net, d, {}, &tape);
    const int targets[] = {0, 1, 2};
    const auto loss = softmax_cross_entropy<double>(out, targets);
    const auto g = backward(net, tape, loss.grad);
    std::vector<const Eigen::MatrixXd*> gp = {&g.w_in[0], &g.w_rec[0], &g.w_in[1]};
    adam_update(net.parameters(), gp, opt, 1e-3);
  }
  const auto path = dir.path / "net.ckpt";
  save_checkpoint(to_checkpoint(net, SurrogateSpec{}, opt, "seed: 1\n"), path);
  const auto cp = load_checkpoint(path);
  CHECK(cp.metadata == "seed: 1\n");
  CHECK(cp.optimizer.step == 1);
  CHECK(cp.optimizer.m.size() == 3);
  const auto loaded = network_from_checkpoint(cp);

  SpikeFrame f = SpikeFrame::Zero(10, 24);
  for (int c = 0; c < 24; c += 3) f.col(c).setConstant(1);
  const auto a = forward(net, f);
  const auto b = forward(loaded, f);
  CHECK(a == b);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    CHECK(net.layer(l).w_in == loaded.layer(l).w_in);
    CHECK(net.layer(l).w_rec == loaded.layer(l).w_rec);
  }
  CHECK(serialize(cp) == serialize(to_checkpoint(net, SurrogateSpec{}, opt, "seed: 1\n")));

  CHECK_NOTHROW(require_layer_sizes(cp, {24, 16, 4}));
  CHECK_THROWS_AS(require_layer_sizes(cp, {460, 320, 4}), ShapeError);
}

TEST_CASE("checkpoint corruption and version errors") {
  auto bytes = serialize(to_checkpoint(small_net(2), SurrogateSpec{}, {}, ""));
  SUBCASE("flipped byte") {
    bytes[bytes.size() / 2] ^= 0x01;
    CHECK_THROWS_AS(deserialize(bytes), CorruptFileError);
  }
  SUBCASE("truncated") {
    bytes.resize(bytes.size() - 9);
    CHECK_THROWS_AS(deserialize(bytes), CorruptFileError);
  }
  SUBCASE("bad magic") {
    bytes[0] = 'X';
    CHECK_THROWS_AS(deserialize(bytes), CorruptFileError);
  }
}

TEST_CASE("checkpoint with inconsistent layer shapes") {
  auto cp = to_checkpoint(small_net(3), SurrogateSpec{}, {}, "");
  // readout claims a fan_in that does not match the hidden layer
  cp.layers[1].fan_in = 15;
  cp.layers[1].w_in.resize(4, 15);
  cp.layers[1].w_in.setZero();
  const auto bytes = serialize(cp);
  CHECK_THROWS_AS(deserialize(bytes), ShapeError);
}

TEST_CASE("checkpoint version mismatch") {
  auto bytes = serialize(to_checkpoint(small_net(4), SurrogateSpec{}, {}, ""));
  bytes[4] = 7;  // format_version low byte
  // recompute the trailing CRC so only the version differs
  const auto body = bytes.size() - 4;
  std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + static_cast<long>(body));
  Checkpoint dummy;
  (void)dummy;
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, head.data(), static_cast<uInt>(head.size()));
  for (int k = 0; k < 4; ++k) bytes[body + static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(crc >> (8 * k));
  CHECK_THROWS_AS(deserialize(bytes), VersionError);
}
