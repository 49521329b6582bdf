#include "spikeq/eq/neural.hpp"

#include <algorithm>
#include <string>

#include "spikeq/rng.hpp"
#include "spikeq/snn/loss.hpp"

namespace spikeq::eq {

NeuralKind neural_kind_from_string(std::string_view s) {
  if (s == "snn_dfe") return NeuralKind::Snn;
  if (s == "ann_dfe_encoded") return NeuralKind::AnnEncoded;
  if (s == "ann_dfe_raw") return NeuralKind::AnnRaw;
  throw ConfigError("unknown neural equalizer '" + std::string(s) + "'");
}

std::string_view to_string(NeuralKind k) {
  switch (k) {
    case NeuralKind::Snn:
      return "snn_dfe";
    case NeuralKind::AnnEncoded:
      return "ann_dfe_encoded";
    case NeuralKind::AnnRaw:
      return "ann_dfe_raw";
  }
  return "?";
}

namespace {

void check_input(const Eigen::MatrixXd& inputs, Eigen::Index width) {
  if (inputs.rows() != width) {
    throw ShapeError("equalizer input has " + std::to_string(inputs.rows()) + " rows, expected " +
                     std::to_string(width));
  }
}

}  // namespace

// --- SNN --------------------------------------------------------------------

SnnDfe::SnnDfe(DfeArchitecture arch, TernaryEncoderConfig enc, const SnnOptions& opt, std::uint64_t seed)
    : arch_(arch), encoder_(enc), surrogate_(opt.surrogate) {
  arch_.validate();
  if (enc.m_bits != arch_.m_bits) throw ConfigError("encoder bit width does not match the architecture");
  Rng rng = make_rng(seed, Stream::Init);
  net_ = snn::Network<double>::dfe(arch_.n_in(), arch_.n_hidden, arch_.n_out(), opt.hidden, opt.readout,
                                   opt.recurrent, opt.self_connections, rng);
}

SnnDfe::SnnDfe(DfeArchitecture arch, TernaryEncoderConfig enc, const snn::Checkpoint& cp)
    : arch_(arch), encoder_(enc) {
  arch_.validate();
  if (enc.m_bits != arch_.m_bits) throw ConfigError("encoder bit width does not match the architecture");
  snn::require_layer_sizes(cp, {static_cast<std::uint32_t>(arch_.n_in()), static_cast<std::uint32_t>(arch_.n_hidden),
                                static_cast<std::uint32_t>(arch_.n_out())});
  net_ = snn::network_from_checkpoint(cp);
  surrogate_.slope = cp.surrogate_slope;
  adam_ = cp.optimizer;
}

void SnnDfe::fill_input(std::span<const Complex> window, std::span<const int> feedback,
                        Eigen::Ref<Eigen::VectorXd> column) {
  fill_frame_column(encoder_, arch_.layout(), window, feedback, column);
}

snn::Drive<double> SnnDfe::drive(const Eigen::MatrixXd& inputs) const {
  check_input(inputs, input_width());
  return snn::Drive<double>::with_mode(inputs, arch_.kappa_max, encoder_.config().drive);
}

Eigen::MatrixXd SnnDfe::scores(const Eigen::MatrixXd& inputs) const { return snn::forward(net_, drive(inputs)); }

double SnnDfe::train_step(const Eigen::MatrixXd& inputs, std::span<const int> targets, double lr) {
  snn::Tape<double> tape;
  snn::ForwardOptions opt;
  opt.surrogate = surrogate_;
  const Eigen::MatrixXd out = snn::forward(net_, drive(inputs), opt, &tape);
  const auto ce = snn::softmax_cross_entropy<double>(out, targets);
  if (!std::isfinite(ce.loss)) return ce.loss;
  const auto g = snn::backward(net_, tape, ce.grad);
  std::vector<const Eigen::MatrixXd*> grads;
  for (std::size_t l = 0; l < net_.depth(); ++l) {
    grads.push_back(&g.w_in[l]);
    if (net_.layer(l).recurrent()) grads.push_back(&g.w_rec[l]);
  }
  snn::adam_update(net_.parameters(), grads, adam_, lr);
  return ce.loss;
}

snn::Checkpoint SnnDfe::checkpoint(std::string metadata) const {
  return snn::to_checkpoint(net_, surrogate_, adam_, std::move(metadata));
}

// --- ANN --------------------------------------------------------------------

AnnDfe::AnnDfe(NeuralKind variant, DfeArchitecture arch, TernaryEncoderConfig enc, Constellation c,
               std::uint64_t seed)
    : variant_(variant), arch_(arch), encoder_(enc), constellation_(std::move(c)) {
  if (variant_ == NeuralKind::Snn) throw ConfigError("AnnDfe needs an ANN variant");
  arch_.validate();
  Rng rng = make_rng(seed, Stream::Init);
  mlp_ = Mlp<double>::init(input_width(), arch_.n_hidden, arch_.n_out(), rng);
}

AnnDfe::AnnDfe(NeuralKind variant, DfeArchitecture arch, TernaryEncoderConfig enc, Constellation c,
               const snn::Checkpoint& cp)
    : variant_(variant), arch_(arch), encoder_(enc), constellation_(std::move(c)) {
  if (variant_ == NeuralKind::Snn) throw ConfigError("AnnDfe needs an ANN variant");
  arch_.validate();
  if (cp.model != snn::ModelKind::Ann || cp.layers.size() != 2 || !cp.layers[0].has_bias || !cp.layers[1].has_bias) {
    throw ShapeError("checkpoint does not hold a two-layer ANN");
  }
  snn::require_layer_sizes(cp, {static_cast<std::uint32_t>(input_width()), static_cast<std::uint32_t>(arch_.n_hidden),
                                static_cast<std::uint32_t>(arch_.n_out())});
  mlp_.w1 = cp.layers[0].w_in;
  mlp_.b1 = cp.layers[0].bias;
  mlp_.w2 = cp.layers[1].w_in;
  mlp_.b2 = cp.layers[1].bias;
  mlp_.validate();
  adam_ = cp.optimizer;
}

Eigen::Index AnnDfe::input_width() const {
  return variant_ == NeuralKind::AnnRaw ? arch_.raw_width() : arch_.n_in();
}

void AnnDfe::fill_input(std::span<const Complex> window, std::span<const int> feedback,
                        Eigen::Ref<Eigen::VectorXd> column) {
  if (variant_ == NeuralKind::AnnEncoded) {
    fill_frame_column(encoder_, arch_.layout(), window, feedback, column);
    return;
  }
  if (static_cast<int>(window.size()) != arch_.n_ff || static_cast<int>(feedback.size()) != arch_.m_fb ||
      column.size() != input_width()) {
    throw ShapeError("raw input layout mismatch");
  }
  Eigen::Index pos = 0;
  for (const Complex& y : window) {
    column(pos++) = y.real();
    column(pos++) = y.imag();
  }
  for (int idx : feedback) {
    if (idx < 0 || idx >= constellation_.size()) throw ShapeError("feedback index out of range");
    column(pos++) = constellation_.point(idx).real();
    column(pos++) = constellation_.point(idx).imag();
  }
}

Eigen::MatrixXd AnnDfe::scores(const Eigen::MatrixXd& inputs) const {
  check_input(inputs, input_width());
  return mlp_forward(mlp_, inputs);
}

double AnnDfe::train_step(const Eigen::MatrixXd& inputs, std::span<const int> targets, double lr) {
  check_input(inputs, input_width());
  MlpCache<double> cache;
  const Eigen::MatrixXd out = mlp_forward(mlp_, inputs, &cache);
  const auto ce = snn::softmax_cross_entropy<double>(out, targets);
  if (!std::isfinite(ce.loss)) return ce.loss;
  const auto g = mlp_backward(mlp_, cache, ce.grad);
  snn::adam_update(mlp_.parameters(), {&g.w1, &g.b1, &g.w2, &g.b2}, adam_, lr);
  return ce.loss;
}

snn::Checkpoint AnnDfe::checkpoint(std::string metadata) const {
  snn::Checkpoint cp;
  cp.model = snn::ModelKind::Ann;
  cp.optimizer = adam_;
  cp.metadata = std::move(metadata);
  auto dense = [](const Eigen::MatrixXd& w, const Eigen::MatrixXd& b, snn::LayerTag tag) {
    snn::CheckpointLayer l;
    l.fan_in = static_cast<std::uint32_t>(w.cols());
    l.n_neurons = static_cast<std::uint32_t>(w.rows());
    l.tag = tag;
    l.has_bias = true;
    l.w_in = w;
    l.bias = b;
    return l;
  };
  cp.layers.push_back(dense(mlp_.w1, mlp_.b1, snn::LayerTag::ReLU));
  cp.layers.push_back(dense(mlp_.w2, mlp_.b2, snn::LayerTag::Linear));
  return cp;
}

// --- factories and streaming ------------------------------------------------

std::unique_ptr<NeuralEqualizer> make_neural(const NeuralSetup& setup, const Constellation& c, std::uint64_t seed) {
  if (setup.arch.alphabet_size != c.size()) throw ConfigError("architecture alphabet does not match constellation");
  if (setup.kind == NeuralKind::Snn) return std::make_unique<SnnDfe>(setup.arch, setup.encoder, setup.snn, seed);
  return std::make_unique<AnnDfe>(setup.kind, setup.arch, setup.encoder, c, seed);
}

std::unique_ptr<NeuralEqualizer> load_neural(const NeuralSetup& setup, const Constellation& c,
                                             const snn::Checkpoint& cp) {
  if (setup.arch.alphabet_size != c.size()) throw ConfigError("architecture alphabet does not match constellation");
  if (setup.kind == NeuralKind::Snn) return std::make_unique<SnnDfe>(setup.arch, setup.encoder, cp);
  return std::make_unique<AnnDfe>(setup.kind, setup.arch, setup.encoder, c, cp);
}

int neural_decide(NeuralEqualizer& eq, std::span<const Complex> window, std::span<const int> feedback) {
  Eigen::MatrixXd in(eq.input_width(), 1);
  eq.fill_input(window, feedback, in.col(0));
  return snn::decide(eq.scores(in).col(0));
}

std::vector<EqualizerOutput> run_neural(NeuralEqualizer& eq, const Constellation& c,
                                        std::span<const ComplexVector> streams, FeedbackMode mode,
                                        std::span<const IndexVector> truth) {
  const auto& a = eq.architecture();
  const std::size_t lanes = streams.size();
  if (lanes == 0) return {};
  const std::size_t K = streams.front().size();
  for (const auto& s : streams)
    if (s.size() != K) throw ShapeError("lockstep streams must share one length");
  if (mode == FeedbackMode::Teacher) {
    if (truth.size() != lanes) throw ConfigError("teacher feedback needs the transmitted symbols of every stream");
    for (const auto& t : truth)
      if (t.size() < K) throw ShapeError("transmitted sequence shorter than the received one");
  }

  const auto n = static_cast<std::size_t>(a.n_ff);
  const auto m = static_cast<std::size_t>(a.m_fb);
  std::vector<IndexVector> out(lanes, IndexVector(K, 0));
  Eigen::MatrixXd inputs(eq.input_width(), static_cast<Eigen::Index>(lanes));
  ComplexVector window(n);
  std::vector<int> feedback(m);
  for (std::size_t k = n - 1; k < K; ++k) {
    const std::size_t kd = k + 1 - n;  // transmit time being decided
    for (std::size_t b = 0; b < lanes; ++b) {
      for (std::size_t j = 0; j < n; ++j) window[j] = streams[b][k - j];
      for (std::size_t i = 1; i <= m; ++i) {
        if (i > kd) {
          feedback[i - 1] = 0;
        } else {
          feedback[i - 1] = mode == FeedbackMode::Teacher ? truth[b][kd - i] : out[b][kd - i + n - 1];
        }
      }
      eq.fill_input(window, feedback, inputs.col(static_cast<Eigen::Index>(b)));
    }
    const Eigen::MatrixXd s = eq.scores(inputs);
    for (std::size_t b = 0; b < lanes; ++b) out[b][k] = snn::decide(s.col(static_cast<Eigen::Index>(b)));
  }

  std::vector<EqualizerOutput> result;
  result.reserve(lanes);
  for (auto& o : out) result.push_back(make_output(std::move(o), c, a.decision_delay()));
  return result;
}

EqualizerOutput run_neural(NeuralEqualizer& eq, const Constellation& c, std::span<const Complex> y,
                           FeedbackMode mode, std::span<const int> truth) {
  const std::vector<ComplexVector> streams{ComplexVector(y.begin(), y.end())};
  std::vector<IndexVector> t;
  if (mode == FeedbackMode::Teacher && !truth.empty()) t.emplace_back(truth.begin(), truth.end());
  return std::move(run_neural(eq, c, streams, mode, t).front());
}

void teacher_batch(NeuralEqualizer& eq, std::span<const Complex> y, std::span<const int> sent, std::size_t count,
                   Eigen::MatrixXd& inputs, std::vector<int>& targets) {
  const auto& a = eq.architecture();
  const auto n = static_cast<std::size_t>(a.n_ff);
  const auto m = static_cast<std::size_t>(a.m_fb);
  if (y.size() + 1 < count + n || sent.size() < count) throw ShapeError("burst too short for the requested decisions");
  inputs.resize(eq.input_width(), static_cast<Eigen::Index>(count));
  targets.resize(count);
  ComplexVector window(n);
  std::vector<int> feedback(m);
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t t = 0; t < n; ++t) window[t] = y[j + n - 1 - t];
    for (std::size_t i = 1; i <= m; ++i) feedback[i - 1] = i > j ? 0 : sent[j - i];
    eq.fill_input(window, feedback, inputs.col(static_cast<Eigen::Index>(j)));
    targets[j] = sent[j];
  }
}

}  // namespace spikeq::eq
