#include "spikeq/snn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace spikeq::snn {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'K', 'Q'};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  // Column-major (n x fan_in) storage equals row-major (fan_in x n).
  void matrix(const Eigen::MatrixXd& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) f64(m.data()[k]);
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }
  const std::vector<std::uint8_t>& buffer() const { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int k = 0; k < n; ++k) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& b, std::size_t end) : buf_(b), end_(end) {}
  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  void matrix(Eigen::MatrixXd& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = f64();
  }
  std::string string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return end_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw CorruptFileError("checkpoint truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int k = 0; k < n; ++k) v |= static_cast<std::uint64_t>(buf_[pos_++]) << (8 * k);
    return v;
  }
  const std::vector<std::uint8_t>& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1U << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<const Eigen::MatrixXd*> Checkpoint::tensors() const {
  std::vector<const Eigen::MatrixXd*> t;
  for (const auto& l : layers) {
    t.push_back(&l.w_in);
    if (l.has_recurrence) t.push_back(&l.w_rec);
    if (l.has_bias) t.push_back(&l.bias);
  }
  return t;
}

std::vector<std::uint8_t> serialize(const Checkpoint& cp) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(cp.model));
  w.u32(static_cast<std::uint32_t>(cp.layers.size()));
  for (const auto& l : cp.layers) {
    w.u32(l.fan_in);
    w.u32(l.n_neurons);
    w.u8(static_cast<std::uint8_t>(l.tag));
    w.u8(l.has_recurrence);
    w.u8(l.has_bias);
    w.u8(l.self_connections);
  }
  for (const auto& l : cp.layers) {
    w.f64(l.neuron.tau_m);
    w.f64(l.neuron.tau_s);
    w.f64(l.neuron.v_th);
    w.f64(l.neuron.v_rest);
    w.f64(l.neuron.dt);
    w.u8(static_cast<std::uint8_t>(l.neuron.reset));
    w.u8(static_cast<std::uint8_t>(l.neuron.form));
  }
  w.f64(cp.surrogate_slope);

  const auto tensors = cp.tensors();
  w.u64(cp.optimizer.step);
  w.f64(cp.optimizer.config.beta1);
  w.f64(cp.optimizer.config.beta2);
  w.f64(cp.optimizer.config.eps);
  const bool moments = cp.optimizer.initialized();
  w.u8(moments);
  if (moments) {
    if (cp.optimizer.m.size() != tensors.size() || cp.optimizer.v.size() != tensors.size()) {
      throw ShapeError("optimizer state does not match the model tensors");
    }
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      if (cp.optimizer.m[k].size() != tensors[k]->size() || cp.optimizer.v[k].size() != tensors[k]->size()) {
        throw ShapeError("optimizer moment " + std::to_string(k) + " has the wrong size");
      }
      w.matrix(cp.optimizer.m[k]);
      w.matrix(cp.optimizer.v[k]);
    }
  }

  for (const auto& l : cp.layers) {
    if (l.w_in.rows() != l.n_neurons || l.w_in.cols() != l.fan_in) throw ShapeError("w_in does not match header");
    w.matrix(l.w_in);
    if (l.has_recurrence) {
      if (l.w_rec.rows() != l.n_neurons || l.w_rec.cols() != l.n_neurons) throw ShapeError("w_rec is not n x n");
      w.matrix(l.w_rec);
    }
    if (l.has_bias) {
      if (l.bias.rows() != l.n_neurons || l.bias.cols() != 1) throw ShapeError("bias does not match header");
      w.matrix(l.bias);
    }
  }
  w.u32(static_cast<std::uint32_t>(cp.metadata.size()));
  w.bytes(cp.metadata.data(), cp.metadata.size());
  const auto crc = crc_of(w.buffer().data(), w.buffer().size());
  w.u32(crc);
  return w.take();
}

Checkpoint deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CorruptFileError("not a checkpoint file (bad magic)");
  }
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int k = 0; k < 4; ++k) stored |= static_cast<std::uint32_t>(bytes[body + static_cast<std::size_t>(k)]) << (8 * k);
  if (stored != crc_of(bytes.data(), body)) throw CorruptFileError("checkpoint checksum mismatch");

  Reader r(bytes, body);
  r.string(4);
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint cp;
  const auto model = r.u8();
  if (model > 1) throw CorruptFileError("unknown model kind");
  cp.model = static_cast<ModelKind>(model);
  const auto count = r.u32();
  if (count == 0 || count > 64) throw CorruptFileError("implausible layer count");
  cp.layers.resize(count);
  for (auto& l : cp.layers) {
    l.fan_in = r.u32();
    l.n_neurons = r.u32();
    const auto tag = r.u8();
    if (tag > 3) throw CorruptFileError("unknown layer kind");
    l.tag = static_cast<LayerTag>(tag);
    l.has_recurrence = r.u8() != 0;
    l.has_bias = r.u8() != 0;
    l.self_connections = r.u8() != 0;
    if (l.fan_in == 0 || l.n_neurons == 0) throw ShapeError("checkpoint layer with zero size");
  }
  for (std::size_t k = 1; k < cp.layers.size(); ++k) {
    if (cp.layers[k].fan_in != cp.layers[k - 1].n_neurons) {
      throw ShapeError("checkpoint layer " + std::to_string(k) + " fan_in " + std::to_string(cp.layers[k].fan_in) +
                       " does not match previous layer size " + std::to_string(cp.layers[k - 1].n_neurons));
    }
  }
  for (auto& l : cp.layers) {
    l.neuron.tau_m = r.f64();
    l.neuron.tau_s = r.f64();
    l.neuron.v_th = r.f64();
    l.neuron.v_rest = r.f64();
    l.neuron.dt = r.f64();
    const auto reset = r.u8();
    const auto form = r.u8();
    if (reset > 1 || form > 1) throw CorruptFileError("unknown neuron mode");
    l.neuron.reset = static_cast<ResetMode>(reset);
    l.neuron.form = static_cast<MembraneForm>(form);
  }
  cp.surrogate_slope = r.f64();

  for (auto& l : cp.layers) {
    l.w_in.resize(l.n_neurons, l.fan_in);
    if (l.has_recurrence) l.w_rec.resize(l.n_neurons, l.n_neurons);
    if (l.has_bias) l.bias.resize(l.n_neurons, 1);
  }
  cp.optimizer.step = r.u64();
  cp.optimizer.config.beta1 = r.f64();
  cp.optimizer.config.beta2 = r.f64();
  cp.optimizer.config.eps = r.f64();
  if (r.u8() != 0) {
    for (const auto* t : cp.tensors()) {
      cp.optimizer.m.emplace_back(t->rows(), t->cols());
      r.matrix(cp.optimizer.m.back());
      cp.optimizer.v.emplace_back(t->rows(), t->cols());
      r.matrix(cp.optimizer.v.back());
    }
  }
  for (auto& l : cp.layers) {
    r.matrix(l.w_in);
    if (l.has_recurrence) r.matrix(l.w_rec);
    if (l.has_bias) r.matrix(l.bias);
  }
  const auto meta = r.u32();
  cp.metadata = r.string(meta);
  if (r.remaining() != 0) throw CorruptFileError("trailing bytes in checkpoint");
  return cp;
}

void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path) {
  const auto bytes = serialize(cp);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

Checkpoint to_checkpoint(const Network<double>& net, const SurrogateSpec& sg, const AdamState<double>& opt,
                         std::string metadata) {
  Checkpoint cp;
  cp.model = ModelKind::Snn;
  cp.surrogate_slope = sg.slope;
  cp.optimizer = opt;
  cp.metadata = std::move(metadata);
  for (const auto& l : net.layers()) {
    CheckpointLayer c;
    c.fan_in = static_cast<std::uint32_t>(l.fan_in());
    c.n_neurons = static_cast<std::uint32_t>(l.size());
    c.tag = l.kind == CellKind::LIF ? LayerTag::LIF : LayerTag::LI;
    c.has_recurrence = l.recurrent();
    c.self_connections = l.self_connections;
    c.neuron = l.neuron;
    c.w_in = l.w_in;
    c.w_rec = l.w_rec;
    cp.layers.push_back(std::move(c));
  }
  return cp;
}

Network<double> network_from_checkpoint(const Checkpoint& cp) {
  if (cp.model != ModelKind::Snn) throw ShapeError("checkpoint does not hold a spiking network");
  std::vector<Layer<double>> layers;
  for (const auto& c : cp.layers) {
    if (c.tag != LayerTag::LIF && c.tag != LayerTag::LI) throw ShapeError("non-spiking layer in SNN checkpoint");
    Layer<double> l;
    l.kind = c.tag == LayerTag::LIF ? CellKind::LIF : CellKind::LI;
    l.neuron = c.neuron;
    l.w_in = c.w_in;
    l.w_rec = c.w_rec;
    l.self_connections = c.self_connections;
    layers.push_back(std::move(l));
  }
  return Network<double>(std::move(layers));
}

void require_layer_sizes(const Checkpoint& cp, const std::vector<std::uint32_t>& sizes) {
  auto describe = [](const std::vector<std::uint32_t>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "->" : "") + std::to_string(v[k]);
    return s;
  };
  std::vector<std::uint32_t> got;
  if (!cp.layers.empty()) got.push_back(cp.layers.front().fan_in);
  for (const auto& l : cp.layers) got.push_back(l.n_neurons);
  if (got != sizes) {
    throw ShapeError("checkpoint architecture " + describe(got) + " does not match expected " + describe(sizes));
  }
}

}  // namespace spikeq::snn
