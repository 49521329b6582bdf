#include "spikeq/exp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>
#include <zlib.h>

namespace spikeq::exp {

Profile profile_from_string(std::string_view s) {
  if (s == "smoke") return Profile::Smoke;
  if (s == "full") return Profile::Full;
  throw ConfigError("unknown profile '" + std::string(s) + "' (expected smoke or full)");
}

std::string_view to_string(Profile p) { return p == Profile::Smoke ? "smoke" : "full"; }

bool is_neural(std::string_view equalizer) {
  return equalizer == "snn_dfe" || equalizer == "ann_dfe_encoded" || equalizer == "ann_dfe_raw";
}

namespace {

std::vector<double> grid(double start, double stop, double step) {
  std::vector<double> g;
  const int n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
  for (int k = 0; k <= n; ++k) g.push_back(start + step * k);
  return g;
}

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? ".inf" : "-.inf";
  if (std::isnan(x)) return ".nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, r.ptr);
  // keep integral values recognisably floating point
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string where(const std::string& source, const YAML::Mark& m) {
  if (m.is_null()) return source;
  return source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

/// Reads one mapping, rejecting keys it was not asked about.
class MapReader {
 public:
  MapReader(const YAML::Node& node, std::string path, const std::string& source)
      : node_(node), path_(std::move(path)), source_(source) {
    if (!node_.IsMap()) fail(node_, "'" + path_ + "' must be a mapping");
  }

  bool has(const std::string& key) {
    known_.insert(key);
    return static_cast<bool>(node_[key]);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    const YAML::Node v = node_[key];
    if (!v.IsScalar()) fail(v, "'" + qualified(key) + "' must be a scalar");
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, "'" + qualified(key) + "' has an invalid value '" + v.Scalar() + "'");
    }
  }

  YAML::Node child(const std::string& key) {
    known_.insert(key);
    return node_[key];
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.Scalar();
      if (!known_.count(key)) fail(kv.first, "unknown key '" + qualified(key) + "'");
    }
  }

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
    throw ConfigError(where(source_, n.Mark()) + ": " + msg);
  }

  const std::string& source() const { return source_; }

 private:
  YAML::Node node_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> known_;
};

void read_neuron(MapReader& parent, const std::string& key, snn::NeuronParams& p) {
  if (!parent.has(key)) return;
  MapReader r(parent.child(key), parent.qualified(key), parent.source());
  r.get("tau_m", p.tau_m);
  r.get("tau_s", p.tau_s);
  r.get("v_th", p.v_th);
  r.get("v_rest", p.v_rest);
  r.get("dt", p.dt);
  r.finish();
}

template <typename F>
void with_string(MapReader& r, const std::string& key, F&& apply) {
  std::string s;
  if (!r.has(key)) return;
  r.get(key, s);
  try {
    apply(s);
  } catch (const ConfigError& e) {
    r.fail(r.child(key), e.what());
  }
}

void write_neuron(std::ostringstream& o, const char* name, const snn::NeuronParams& p) {
  o << "  " << name << ":\n"
    << "    tau_m: " << num(p.tau_m) << "\n"
    << "    tau_s: " << num(p.tau_s) << "\n"
    << "    v_th: " << num(p.v_th) << "\n"
    << "    v_rest: " << num(p.v_rest) << "\n"
    << "    dt: " << num(p.dt) << "\n";
}

}  // namespace

ExperimentConfig preset_config(std::string_view channel) {
  ExperimentConfig c;
  c.channel = std::string(channel);
  const std::string_view receiver = channel == "identity" ? "proakis-b" : channel;
  c.arch = eq::DfeArchitecture::preset(receiver);
  c.constellation = std::string(eq::preset_constellation(receiver));
  c.sweep.ebn0_db = channel == "proakis-a" ? grid(6.0, 22.0, 2.0) : grid(0.0, 16.0, 2.0);
  return c;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(where(source, e.mark) + ": " + e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  MapReader top(root, "", source);

  std::string channel = "proakis-b";
  top.get("channel", channel);
  ExperimentConfig cfg;
  try {
    cfg = preset_config(channel);
  } catch (const ConfigError& e) {
    top.fail(top.child("channel"), e.what());
  }

  top.get("seed", cfg.seed);
  with_string(top, "profile", [&](const std::string& s) { cfg.profile = profile_from_string(s); });
  with_string(top, "constellation", [&](const std::string& s) {
    cfg.constellation = Constellation::by_name(s).name();
  });
  with_string(top, "equalizer", [&](const std::string& s) {
    if (std::find(std::begin(kEqualizers), std::end(kEqualizers), s) == std::end(kEqualizers)) {
      throw ConfigError("unknown equalizer '" + s + "'");
    }
    cfg.equalizer = s;
  });
  top.get("linear_taps", cfg.linear_taps);
  top.get("map_state_budget", cfg.map_state_budget);

  if (top.has("architecture")) {
    MapReader r(top.child("architecture"), "architecture", source);
    r.get("n_ff", cfg.arch.n_ff);
    r.get("m_fb", cfg.arch.m_fb);
    r.get("m_bits", cfg.arch.m_bits);
    r.get("n_hidden", cfg.arch.n_hidden);
    r.get("kappa_max", cfg.arch.kappa_max);
    r.finish();
  }
  cfg.arch.alphabet_size = Constellation::by_name(cfg.constellation).size();

  if (top.has("neuron")) {
    MapReader r(top.child("neuron"), "neuron", source);
    read_neuron(r, "hidden", cfg.hidden);
    read_neuron(r, "readout", cfg.readout);
    with_string(r, "reset", [&](const std::string& s) {
      cfg.hidden.reset = cfg.readout.reset = snn::reset_mode_from_string(s);
    });
    with_string(r, "membrane", [&](const std::string& s) {
      cfg.hidden.form = cfg.readout.form = snn::membrane_form_from_string(s);
    });
    r.get("surrogate_slope", cfg.surrogate_slope);
    r.get("recurrent", cfg.recurrent);
    r.get("self_connections", cfg.self_connections);
    r.finish();
  }

  if (top.has("encoder")) {
    MapReader r(top.child("encoder"), "encoder", source);
    with_string(r, "kind", [&](const std::string& s) {
      if (s == "log_scale") throw ConfigError("encoder kind 'log_scale' is reserved but not implemented");
      if (s != "ternary") throw ConfigError("unknown encoder kind '" + s + "'");
      cfg.encoder_kind = s;
    });
    r.get("y_max", cfg.y_max);
    with_string(r, "drive", [&](const std::string& s) { cfg.drive = drive_mode_from_string(s); });
    r.finish();
  }

  if (top.has("training")) {
    MapReader r(top.child("training"), "training", source);
    r.get("epochs", cfg.training.epochs);
    r.get("burst_len", cfg.training.burst_len);
    r.get("lr0", cfg.training.lr0);
    r.get("decay_per_epoch", cfg.training.decay_per_epoch);
    r.get("ebn0_db", cfg.train_ebn0_db);
    r.get("validate_every", cfg.training.validate_every);
    r.get("validation_streams", cfg.training.validation_streams);
    r.get("validation_len", cfg.training.validation_len);
    r.finish();
  }

  if (top.has("sweep")) {
    MapReader r(top.child("sweep"), "sweep", source);
    if (r.has("ebn0_db")) {
      const YAML::Node g = r.child("ebn0_db");
      if (g.IsSequence()) {
        cfg.sweep.ebn0_db.clear();
        for (const auto& x : g) {
          try {
            cfg.sweep.ebn0_db.push_back(x.as<double>());
          } catch (const YAML::Exception&) {
            r.fail(x, "'sweep.ebn0_db' entries must be numbers");
          }
        }
      } else if (g.IsMap()) {
        MapReader gr(g, "sweep.ebn0_db", source);
        double start = 0.0, stop = 0.0, step = 1.0;
        gr.get("start", start);
        gr.get("stop", stop);
        gr.get("step", step);
        gr.finish();
        if (!(step > 0.0) || stop < start) gr.fail(g, "'sweep.ebn0_db' needs start <= stop and step > 0");
        cfg.sweep.ebn0_db = grid(start, stop, step);
      } else {
        r.fail(g, "'sweep.ebn0_db' must be a list or {start, stop, step}");
      }
    }
    r.get("min_bit_errors", cfg.sweep.min_bit_errors);
    r.get("max_bits", cfg.sweep.max_bits);
    r.get("burst_symbols", cfg.sweep.burst_symbols);
    r.get("lanes", cfg.sweep.lanes);
    r.get("workers", cfg.sweep.workers);
    r.finish();
  }

  if (top.has("validation")) {
    MapReader r(top.child("validation"), "validation", source);
    r.get("symbols", cfg.validation.symbols);
    r.get("lanes", cfg.validation.lanes);
    r.finish();
  }
  top.finish();

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void ExperimentConfig::validate() const {
  make_channel();
  const auto c = make_constellation();
  if (std::find(std::begin(kEqualizers), std::end(kEqualizers), equalizer) == std::end(kEqualizers)) {
    throw ConfigError("unknown equalizer '" + equalizer + "'");
  }
  arch.validate();
  if (arch.alphabet_size != c.size()) throw ConfigError("architecture alphabet does not match the constellation");
  if (linear_taps < 1) throw ConfigError("linear_taps must be at least 1");
  if (map_state_budget < 1) throw ConfigError("map_state_budget must be at least 1");
  hidden.validate();
  readout.validate();
  if (!(surrogate_slope > 0.0)) throw ConfigError("neuron.surrogate_slope must be positive");
  if (encoder_kind != "ternary") throw ConfigError("unknown encoder kind '" + encoder_kind + "'");
  encoder().validate();
  training.validate();
  if (std::isnan(train_ebn0_db)) throw ConfigError("training.ebn0_db must be a number");
  if (sweep.ebn0_db.empty()) throw ConfigError("sweep.ebn0_db must not be empty");
  for (double x : sweep.ebn0_db)
    if (!std::isfinite(x)) throw ConfigError("sweep.ebn0_db entries must be finite");
  if (sweep.min_bit_errors < 1 || sweep.max_bits < 1) throw ConfigError("sweep stopping rule needs positive limits");
  if (sweep.burst_symbols < 1 || sweep.lanes < 1 || sweep.workers < 1) {
    throw ConfigError("sweep.burst_symbols, lanes and workers must be at least 1");
  }
  if (validation.symbols < 1 || validation.lanes < 1) throw ConfigError("validation needs symbols and lanes >= 1");
}

std::string ExperimentConfig::to_yaml() const {
  std::ostringstream o;
  o << "seed: " << seed << "\n"
    << "profile: " << to_string(profile) << "\n"
    << "channel: " << channel << "\n"
    << "constellation: " << constellation << "\n"
    << "equalizer: " << equalizer << "\n"
    << "architecture:\n"
    << "  n_ff: " << arch.n_ff << "\n"
    << "  m_fb: " << arch.m_fb << "\n"
    << "  m_bits: " << arch.m_bits << "\n"
    << "  n_hidden: " << arch.n_hidden << "\n"
    << "  kappa_max: " << arch.kappa_max << "\n"
    << "linear_taps: " << linear_taps << "\n"
    << "map_state_budget: " << map_state_budget << "\n"
    << "neuron:\n";
  write_neuron(o, "hidden", hidden);
  write_neuron(o, "readout", readout);
  o << "  reset: " << snn::to_string(hidden.reset) << "\n"
    << "  membrane: " << snn::to_string(hidden.form) << "\n"
    << "  surrogate_slope: " << num(surrogate_slope) << "\n"
    << "  recurrent: " << (recurrent ? "true" : "false") << "\n"
    << "  self_connections: " << (self_connections ? "true" : "false") << "\n"
    << "encoder:\n"
    << "  kind: " << encoder_kind << "\n"
    << "  y_max: " << num(y_max) << "\n"
    << "  drive: " << spikeq::to_string(drive) << "\n"
    << "training:\n"
    << "  epochs: " << training.epochs << "\n"
    << "  burst_len: " << training.burst_len << "\n"
    << "  lr0: " << num(training.lr0) << "\n"
    << "  decay_per_epoch: " << num(training.decay_per_epoch) << "\n"
    << "  ebn0_db: " << num(train_ebn0_db) << "\n"
    << "  validate_every: " << training.validate_every << "\n"
    << "  validation_streams: " << training.validation_streams << "\n"
    << "  validation_len: " << training.validation_len << "\n"
    << "sweep:\n"
    << "  ebn0_db: [";
  for (std::size_t k = 0; k < sweep.ebn0_db.size(); ++k) o << (k ? ", " : "") << num(sweep.ebn0_db[k]);
  o << "]\n"
    << "  min_bit_errors: " << sweep.min_bit_errors << "\n"
    << "  max_bits: " << sweep.max_bits << "\n"
    << "  burst_symbols: " << sweep.burst_symbols << "\n"
    << "  lanes: " << sweep.lanes << "\n"
    << "  workers: " << sweep.workers << "\n"
    << "validation:\n"
    << "  symbols: " << validation.symbols << "\n"
    << "  lanes: " << validation.lanes << "\n";
  return o.str();
}

std::string ExperimentConfig::hash() const {
  const std::string text = to_yaml();
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(text.data()), static_cast<uInt>(text.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

Constellation ExperimentConfig::make_constellation() const { return Constellation::by_name(constellation); }

FirChannel ExperimentConfig::make_channel() const { return FirChannel::by_name(channel); }

TernaryEncoderConfig ExperimentConfig::encoder() const { return {arch.m_bits, y_max, drive}; }

eq::NeuralSetup ExperimentConfig::neural_setup() const {
  eq::NeuralSetup s;
  s.kind = eq::neural_kind_from_string(equalizer);
  s.arch = arch;
  s.encoder = encoder();
  s.snn.hidden = hidden;
  s.snn.readout = readout;
  s.snn.surrogate.slope = surrogate_slope;
  s.snn.recurrent = recurrent;
  s.snn.self_connections = self_connections;
  return s;
}

void apply_profile(ExperimentConfig& cfg, Profile p) {
  cfg.profile = p;
  if (p == Profile::Full) return;
  cfg.training.epochs = std::min(cfg.training.epochs, 200);
  auto& g = cfg.sweep.ebn0_db;
  if (g.size() > 3) g = {g.front(), g[(g.size() - 1) / 2], g.back()};
  cfg.sweep.max_bits = std::min<std::uint64_t>(cfg.sweep.max_bits, 200'000);
}

}  // namespace spikeq::exp
