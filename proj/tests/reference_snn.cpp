#include "reference_snn.hpp"

#include <algorithm>

#include "spikeq/snn/loss.hpp"

namespace spikeq::testing {

GradCheckResult gradient_check(snn::Network<double> net, const std::vector<std::vector<double>>& patterns,
                               const std::vector<int>& targets, const std::vector<double>& gain,
                               const snn::SurrogateSpec& sg, double eps, double floor) {
  const auto batch = static_cast<Eigen::Index>(patterns.size());
  snn::Drive<double> drive;
  drive.pattern.resize(net.input_width(), batch);
  for (Eigen::Index b = 0; b < batch; ++b)
    for (Eigen::Index j = 0; j < net.input_width(); ++j)
      drive.pattern(j, b) = patterns[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
  drive.gain = gain;

  snn::Tape<double> tape;
  const snn::ForwardOptions opt{snn::GateMode::Smoothed, sg};
  const auto out = snn::forward(net, drive, opt, &tape);
  const auto loss = snn::softmax_cross_entropy<double>(out, targets);
  const auto grads = snn::backward(net, tape, loss.grad);

  GradCheckResult res;
  auto probe = [&](Eigen::MatrixXd& w, const Eigen::MatrixXd& g, bool skip_diagonal) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        if (skip_diagonal && r == c) continue;
        const double keep = w(r, c);
        w(r, c) = keep + eps;
        const double up = reference_loss(net, patterns, targets, gain, sg);
        w(r, c) = keep - eps;
        const double down = reference_loss(net, patterns, targets, gain, sg);
        w(r, c) = keep;
        const double fd = (up - down) / (2 * eps);
        const double an = g(r, c);
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), floor});
        res.max_rel_error = std::max(res.max_rel_error, rel);
        ++res.checked;
      }
    }
  };
  for (std::size_t l = 0; l < net.depth(); ++l) {
    auto& layer = net.mutable_layer(l);
    probe(layer.w_in, grads.w_in[l], false);
    if (layer.recurrent()) probe(layer.w_rec, grads.w_rec[l], !layer.self_connections);
  }
  return res;
}

ToyProblem make_toy_problem(std::uint64_t seed, int steps, snn::ResetMode reset, snn::MembraneForm form) {
  auto rng = make_rng(seed, Stream::Init);
  auto hidden = snn::NeuronParams::lif_defaults();
  hidden.reset = reset;
  hidden.form = form;
  auto readout = snn::NeuronParams::li_defaults();
  readout.form = form;
  ToyProblem t{snn::Network<double>::dfe(4, 3, 2, hidden, readout, true, false, rng), {}, {}, {}};
  // Scale weights up so hidden potentials sweep through the threshold region.
  for (auto* p : t.net.parameters()) *p *= 3.0;
  for (int b = 0; b < 3; ++b) {
    std::vector<double> pat(4);
    for (auto& x : pat) x = std::floor(uniform(rng, -1.0, 2.0));  // {-1, 0, 1}
    t.patterns.push_back(pat);
    t.targets.push_back(static_cast<int>(rng() % 2));
  }
  for (int k = 0; k < steps; ++k) t.gain.push_back(uniform(rng, 0.5, 1.5));
  return t;
}

}  // namespace spikeq::testing
