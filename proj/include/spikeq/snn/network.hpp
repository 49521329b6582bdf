#ifndef SPIKEQ_SNN_NETWORK_HPP
#define SPIKEQ_SNN_NETWORK_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "spikeq/common.hpp"
#include "spikeq/encoding.hpp"
#include "spikeq/rng.hpp"
#include "spikeq/snn/neuron.hpp"

namespace spikeq::snn {

/// One population of neurons and the synapses that feed it.
///
/// Weight matrices are stored as (n_neurons x fan_in) so that the synaptic
/// drive of a batch is a single product w_in * x. Column-major storage of this
/// shape is the same byte order as a row-major (fan_in x n_neurons) matrix.
template <typename Scalar>
struct Layer {
  CellKind kind = CellKind::LIF;
  NeuronParams neuron;
  MatrixX<Scalar> w_in;
  MatrixX<Scalar> w_rec;  // empty unless recurrent
  bool self_connections = false;

  Eigen::Index fan_in() const { return w_in.cols(); }
  Eigen::Index size() const { return w_in.rows(); }
  bool recurrent() const { return w_rec.size() != 0; }
  bool spiking() const { return kind == CellKind::LIF && std::isfinite(neuron.v_th); }
};

/// Per-neuron state for a batch of independent samples (one per column).
template <typename Scalar>
struct LayerState {
  MatrixX<Scalar> v;
  MatrixX<Scalar> i;
  MatrixX<Scalar> s;

  static LayerState zeros(Eigen::Index n, Eigen::Index batch) {
    return {MatrixX<Scalar>::Zero(n, batch), MatrixX<Scalar>::Zero(n, batch), MatrixX<Scalar>::Zero(n, batch)};
  }
};

/// Input to the first layer: a fixed pattern scaled per time step.
/// Constant drive has all gains 1; impulse drive has gain 1 at step 0 only.
template <typename Scalar>
struct Drive {
  MatrixX<Scalar> pattern;  // fan_in x batch
  std::vector<Scalar> gain;

  int steps() const { return static_cast<int>(gain.size()); }
  Eigen::Index batch() const { return pattern.cols(); }

  static Drive constant(MatrixX<Scalar> pattern, int steps) {
    return Drive{std::move(pattern), std::vector<Scalar>(static_cast<std::size_t>(steps), Scalar(1))};
  }
  static Drive impulse(MatrixX<Scalar> pattern, int steps) {
    std::vector<Scalar> g(static_cast<std::size_t>(steps), Scalar(0));
    if (steps > 0) g[0] = Scalar(1);
    return Drive{std::move(pattern), std::move(g)};
  }
  static Drive with_mode(MatrixX<Scalar> pattern, int steps, DriveMode mode) {
    return mode == DriveMode::Constant ? constant(std::move(pattern), steps) : impulse(std::move(pattern), steps);
  }
};

/// Converts a time-by-neuron frame into a drive. Frames must be a single
/// pattern scaled by a 0/1 gain per row (every frame build_frame produces is).
template <typename Scalar>
Drive<Scalar> drive_from_frame(const SpikeFrame& frame) {
  Drive<Scalar> d;
  d.pattern = MatrixX<Scalar>::Zero(frame.cols(), 1);
  d.gain.assign(static_cast<std::size_t>(frame.rows()), Scalar(0));
  Eigen::Index ref = -1;
  for (Eigen::Index t = 0; t < frame.rows(); ++t) {
    if ((frame.row(t).array() == 0).all()) continue;
    if (ref < 0) {
      ref = t;
      d.pattern.col(0) = frame.row(t).transpose().template cast<Scalar>();
    } else if (frame.row(t) != frame.row(ref)) {
      throw ShapeError("frame rows are not copies of one pattern");
    }
    d.gain[static_cast<std::size_t>(t)] = Scalar(1);
  }
  return d;
}

/// Everything the reverse pass needs, recorded at every step before the update.
template <typename Scalar>
struct LayerTrace {
  std::vector<MatrixX<Scalar>> v;
  std::vector<MatrixX<Scalar>> i;
  std::vector<MatrixX<Scalar>> s;
};

template <typename Scalar>
struct Tape {
  std::uint64_t version = 0;
  GateMode gate = GateMode::Heaviside;
  SurrogateSpec surrogate;
  Drive<Scalar> drive;
  std::vector<LayerTrace<Scalar>> layers;
  MatrixX<Scalar> output;

  int steps() const { return drive.steps(); }
};

template <typename Scalar>
struct Gradients {
  std::vector<MatrixX<Scalar>> w_in;
  std::vector<MatrixX<Scalar>> w_rec;  // empty entries for non-recurrent layers
};

struct ForwardOptions {
  GateMode gate = GateMode::Heaviside;
  SurrogateSpec surrogate{};
};

/// Feedforward stack of LIF layers with an optional non-spiking LI readout.
/// Any layer may carry recurrent weights. The version counter changes on every
/// mutable access so stale tapes are detectable.
template <typename Scalar>
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer<Scalar>> layers) : layers_(std::move(layers)) { validate(); }

  /// Input -> recurrent LIF hidden layer -> LI readout, uniform(+-1/sqrt(fan_in)) init.
  static Network dfe(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out, const NeuronParams& hidden,
                     const NeuronParams& readout, bool recurrent, bool self_connections, Rng& rng) {
    Layer<Scalar> h;
    h.kind = CellKind::LIF;
    h.neuron = hidden;
    h.w_in = init_uniform(n_hidden, n_in, rng);
    if (recurrent) {
      h.w_rec = init_uniform(n_hidden, n_hidden, rng);
      h.self_connections = self_connections;
      if (!self_connections) h.w_rec.diagonal().setZero();
    }
    Layer<Scalar> o;
    o.kind = CellKind::LI;
    o.neuron = readout;
    o.w_in = init_uniform(n_out, n_hidden, rng);
    return Network({std::move(h), std::move(o)});
  }

  static MatrixX<Scalar> init_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    MatrixX<Scalar> m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = static_cast<Scalar>(uniform(rng, -bound, bound));
    return m;
  }

  const std::vector<Layer<Scalar>>& layers() const { return layers_; }
  const Layer<Scalar>& layer(std::size_t k) const { return layers_.at(k); }
  Layer<Scalar>& mutable_layer(std::size_t k) {
    ++version_;
    return layers_.at(k);
  }
  std::size_t depth() const { return layers_.size(); }
  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }

  Eigen::Index input_width() const { return layers_.empty() ? 0 : layers_.front().fan_in(); }
  Eigen::Index output_width() const { return layers_.empty() ? 0 : layers_.back().size(); }

  /// Pointers to all trainable matrices in a fixed order (w_in, then w_rec, per layer).
  std::vector<MatrixX<Scalar>*> parameters() {
    ++version_;
    std::vector<MatrixX<Scalar>*> p;
    for (auto& l : layers_) {
      p.push_back(&l.w_in);
      if (l.recurrent()) p.push_back(&l.w_rec);
    }
    return p;
  }

  void validate() const {
    if (layers_.empty()) throw ShapeError("network has no layers");
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const auto& l = layers_[k];
      l.neuron.validate();
      if (l.w_in.size() == 0) throw ShapeError("layer " + std::to_string(k) + " has no input weights");
      if (k > 0 && l.fan_in() != layers_[k - 1].size()) {
        throw ShapeError("layer " + std::to_string(k) + " fan_in " + std::to_string(l.fan_in()) +
                         " does not match previous layer size " + std::to_string(layers_[k - 1].size()));
      }
      if (l.recurrent() && (l.w_rec.rows() != l.size() || l.w_rec.cols() != l.size())) {
        throw ShapeError("layer " + std::to_string(k) + " recurrent matrix is not n x n");
      }
      if (l.kind == CellKind::LI) {
        if (l.recurrent()) throw ShapeError("LI layers cannot be recurrent");
        if (k + 1 != layers_.size()) throw ShapeError("an LI layer may only be the last layer");
      }
    }
  }

 private:
  std::vector<Layer<Scalar>> layers_;
  std::uint64_t version_ = 0;
};

namespace detail {

template <typename Scalar>
MatrixX<Scalar> gate(const MatrixX<Scalar>& v, double v_th, GateMode mode, const SurrogateSpec& sg) {
  const Scalar th = static_cast<Scalar>(v_th);
  if (mode == GateMode::Heaviside) {
    return v.unaryExpr([th](Scalar x) { return x > th ? Scalar(1) : Scalar(0); });
  }
  return v.unaryExpr([th, sg](Scalar x) { return static_cast<Scalar>(sg.soft_gate(static_cast<double>(x - th))); });
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace detail

/// Advances a layer by one step given its external synaptic drive (w_in * x).
/// Spikes are decided from the current v, then v and i are updated, then
/// spiking neurons are reset. On return st.s holds s[k] and st.v, st.i hold
/// the k+1 values.
template <typename Scalar>
void advance(const Layer<Scalar>& layer, LayerState<Scalar>& st, const MatrixX<Scalar>& synaptic_drive,
             const ForwardOptions& opt = {}) {
  const auto& p = layer.neuron;
  const Scalar av = static_cast<Scalar>(p.v_coeff());
  const Scalar ai = static_cast<Scalar>(p.i_coeff());
  const Scalar off = static_cast<Scalar>(p.v_offset());
  const Scalar beta = static_cast<Scalar>(p.beta());

  if (layer.spiking()) {
    st.s = detail::gate(st.v, p.v_th, opt.gate, opt.surrogate);
  } else {
    st.s.setZero(st.v.rows(), st.v.cols());
  }

  MatrixX<Scalar> u = (av * st.v + ai * st.i).array() + off;
  if (layer.spiking()) {
    if (p.reset == ResetMode::ToRest) {
      const Scalar rest = static_cast<Scalar>(p.v_rest);
      st.v = ((Scalar(1) - st.s.array()) * u.array() + st.s.array() * rest).matrix();
    } else {
      st.v = u - static_cast<Scalar>(p.v_th) * st.s;
    }
  } else {
    st.v = std::move(u);
  }

  st.i = beta * st.i + synaptic_drive;
  if (layer.recurrent()) st.i.noalias() += layer.w_rec * st.s;
}

/// One LIF step on an explicit input x (fan_in x batch). Returns the spikes s[k].
template <typename Scalar>
MatrixX<Scalar> lif_step(LayerState<Scalar>& st, const std::type_identity_t<MatrixX<Scalar>>& x, const Layer<Scalar>& layer,
                         const ForwardOptions& opt = {}) {
  if (layer.kind != CellKind::LIF) throw ShapeError("lif_step called on a non-LIF layer");
  if (x.rows() != layer.fan_in() || st.v.rows() != layer.size()) throw ShapeError("lif_step shape mismatch");
  if (!detail::all_finite(x) || !detail::all_finite(st.v) || !detail::all_finite(st.i)) {
    throw ShapeError("lif_step received non-finite values");
  }
  MatrixX<Scalar> drive = layer.w_in * x;
  advance(layer, st, drive, opt);
  return st.s;
}

/// One LI step: same update as lif_step without threshold, spike or reset.
template <typename Scalar>
void li_step(LayerState<Scalar>& st, const std::type_identity_t<MatrixX<Scalar>>& x, const Layer<Scalar>& layer) {
  if (layer.kind != CellKind::LI) throw ShapeError("li_step called on a non-LI layer");
  if (x.rows() != layer.fan_in() || st.v.rows() != layer.size()) throw ShapeError("li_step shape mismatch");
  if (!detail::all_finite(x) || !detail::all_finite(st.v) || !detail::all_finite(st.i)) {
    throw ShapeError("li_step received non-finite values");
  }
  MatrixX<Scalar> drive = layer.w_in * x;
  advance(layer, st, drive);
}

/// Runs the network for drive.steps() steps from the zero state and returns
/// the last layer's membrane potentials at the final step (n_out x batch).
/// When tape is non-null every pre-update state is recorded into it.
template <typename Scalar>
MatrixX<Scalar> forward(const Network<Scalar>& net, const Drive<Scalar>& drive, const ForwardOptions& opt = {},
                        Tape<Scalar>* tape = nullptr) {
  if (drive.pattern.rows() != net.input_width()) {
    throw ShapeError("drive width " + std::to_string(drive.pattern.rows()) + " does not match network input " +
                     std::to_string(net.input_width()));
  }
  if (drive.steps() < 1) throw ShapeError("simulation needs at least one step");
  if (!detail::all_finite(drive.pattern)) throw ShapeError("non-finite network input");

  const auto& layers = net.layers();
  const std::size_t depth = layers.size();
  const Eigen::Index batch = drive.batch();
  const int steps = drive.steps();

  std::vector<LayerState<Scalar>> state;
  state.reserve(depth);
  for (const auto& l : layers) state.push_back(LayerState<Scalar>::zeros(l.size(), batch));

  if (tape) {
    tape->version = net.version();
    tape->gate = opt.gate;
    tape->surrogate = opt.surrogate;
    tape->drive = drive;
    tape->layers.assign(depth, {});
    for (auto& tr : tape->layers) {
      tr.v.reserve(static_cast<std::size_t>(steps));
      tr.i.reserve(static_cast<std::size_t>(steps));
      tr.s.reserve(static_cast<std::size_t>(steps));
    }
  }

  const MatrixX<Scalar> base_drive = layers.front().w_in * drive.pattern;
  MatrixX<Scalar> syn;
  for (int k = 0; k < steps; ++k) {
    for (std::size_t l = 0; l < depth; ++l) {
      if (tape) {
        tape->layers[l].v.push_back(state[l].v);
        tape->layers[l].i.push_back(state[l].i);
      }
      if (l == 0) {
        syn = drive.gain[static_cast<std::size_t>(k)] * base_drive;
      } else {
        // state[l - 1].s already holds s[k] of the layer below
        syn.noalias() = layers[l].w_in * state[l - 1].s;
      }
      advance(layers[l], state[l], syn, opt);
      if (tape) tape->layers[l].s.push_back(state[l].s);
    }
  }
  MatrixX<Scalar> out = state.back().v;
  if (tape) tape->output = out;
  return out;
}

/// Single-frame convenience wrapper; returns v_out as a vector.
template <typename Scalar>
VectorX<Scalar> forward(const Network<Scalar>& net, const SpikeFrame& frame, const ForwardOptions& opt = {},
                        Tape<Scalar>* tape = nullptr) {
  return forward(net, drive_from_frame<Scalar>(frame), opt, tape).col(0);
}

/// Reverse-mode gradients of the recorded computation with respect to every
/// weight matrix, given dLoss/dv_out at the final step. The derivative of the
/// spike gate is replaced by the surrogate wherever it appears, including the
/// reset path.
template <typename Scalar>
Gradients<Scalar> backward(const Network<Scalar>& net, const Tape<Scalar>& tape,
                           const std::type_identity_t<MatrixX<Scalar>>& grad_out) {
  if (tape.version != net.version()) {
    throw StaleTapeError("tape was recorded with parameter version " + std::to_string(tape.version) +
                         " but the network is at version " + std::to_string(net.version()));
  }
  const auto& layers = net.layers();
  const std::size_t depth = layers.size();
  if (tape.layers.size() != depth) throw ShapeError("tape depth does not match network");
  const Eigen::Index batch = tape.drive.batch();
  if (grad_out.rows() != net.output_width() || grad_out.cols() != batch) {
    throw ShapeError("output gradient has the wrong shape");
  }
  const int steps = tape.steps();
  const SurrogateSpec sg = tape.surrogate;

  Gradients<Scalar> g;
  for (const auto& l : layers) {
    g.w_in.push_back(MatrixX<Scalar>::Zero(l.w_in.rows(), l.w_in.cols()));
    g.w_rec.push_back(l.recurrent() ? MatrixX<Scalar>::Zero(l.size(), l.size()) : MatrixX<Scalar>());
  }

  // Adjoints of v and i at step k+1, and their values at step k being built.
  std::vector<MatrixX<Scalar>> lam_v(depth), lam_i(depth), next_v(depth), next_i(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    lam_v[l] = MatrixX<Scalar>::Zero(layers[l].size(), batch);
    lam_i[l] = MatrixX<Scalar>::Zero(layers[l].size(), batch);
  }
  lam_v.back() = grad_out;
  MatrixX<Scalar> drive_adjoint = MatrixX<Scalar>::Zero(layers.front().size(), batch);
  MatrixX<Scalar> lam_s, lam_u, u;

  for (int k = steps - 1; k >= 0; --k) {
    const auto kk = static_cast<std::size_t>(k);
    for (std::size_t l = 0; l < depth; ++l) {
      const auto& layer = layers[l];
      const auto& p = layer.neuron;
      const auto& tr = tape.layers[l];
      const Scalar av = static_cast<Scalar>(p.v_coeff());
      const Scalar ai = static_cast<Scalar>(p.i_coeff());
      const Scalar beta = static_cast<Scalar>(p.beta());

      // i[k+1] = beta i[k] + w_in x[k] + w_rec s[k]
      if (l == 0) {
        drive_adjoint += tape.drive.gain[kk] * lam_i[0];
      } else {
        g.w_in[l].noalias() += lam_i[l] * tape.layers[l - 1].s[kk].transpose();
      }
      if (layer.recurrent()) g.w_rec[l].noalias() += lam_i[l] * tr.s[kk].transpose();

      if (layer.spiking()) {
        lam_s.setZero(layer.size(), batch);
        if (layer.recurrent()) lam_s.noalias() += layer.w_rec.transpose() * lam_i[l];
        if (l + 1 < depth) lam_s.noalias() += layers[l + 1].w_in.transpose() * lam_i[l + 1];

        const auto& s = tr.s[kk];
        if (p.reset == ResetMode::ToRest) {
          u = (av * tr.v[kk] + ai * tr.i[kk]).array() + static_cast<Scalar>(p.v_offset());
          lam_s.array() += (static_cast<Scalar>(p.v_rest) - u.array()) * lam_v[l].array();
          lam_u = ((Scalar(1) - s.array()) * lam_v[l].array()).matrix();
        } else {
          lam_s.array() -= static_cast<Scalar>(p.v_th) * lam_v[l].array();
          lam_u = lam_v[l];
        }
        const Scalar th = static_cast<Scalar>(p.v_th);
        const auto surrogate =
            tr.v[kk].unaryExpr([th, sg](Scalar x) { return static_cast<Scalar>(sg.derivative(x - th)); });
        next_v[l] = av * lam_u;
        next_v[l].array() += surrogate.array() * lam_s.array();
        next_i[l] = ai * lam_u + beta * lam_i[l];
      } else {
        next_v[l] = av * lam_v[l];
        next_i[l] = ai * lam_v[l] + beta * lam_i[l];
      }
    }
    std::swap(lam_v, next_v);
    std::swap(lam_i, next_i);
  }

  g.w_in[0].noalias() = drive_adjoint * tape.drive.pattern.transpose();
  for (std::size_t l = 0; l < depth; ++l) {
    if (layers[l].recurrent() && !layers[l].self_connections) g.w_rec[l].diagonal().setZero();
  }
  return g;
}

/// Index of the largest entry, ties to the lowest index.
template <typename Derived>
int decide(const Eigen::MatrixBase<Derived>& v_out) {
  if (v_out.size() == 0) throw ShapeError("decide on an empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < v_out.size(); ++k) {
    if (v_out(k) > v_out(best)) best = k;
  }
  return static_cast<int>(best);
}

}  // namespace spikeq::snn

#endif  // SPIKEQ_SNN_NETWORK_HPP
