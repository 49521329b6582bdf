#include "spikeq/exp/artifacts.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "json.hpp"

namespace spikeq::exp {

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out.flush()) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string file_crc(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, r.ptr};
}

std::string comment_block(const std::vector<std::pair<std::string, std::string>>& fields, const std::string& yaml) {
  std::ostringstream o;
  for (const auto& [k, v] : fields) o << "# " << k << ": " << v << "\n";
  if (yaml.empty()) return o.str();
  o << "# config:\n";
  std::istringstream in(yaml);
  for (std::string line; std::getline(in, line);) o << "#   " << line << "\n";
  return o.str();
}

std::string curve_file_stem(const BerCurve& c) { return "curve_" + c.equalizer + "_" + c.channel; }

namespace {

std::vector<std::pair<std::string, std::string>> curve_fields(const BerCurve& c) {
  return {{"equalizer", c.equalizer},   {"channel", c.channel},   {"constellation", c.constellation},
          {"seed", std::to_string(c.seed)}, {"config_hash", c.config_hash}, {"revision", c.revision}};
}

}  // namespace

std::string curve_csv(const BerCurve& c) {
  std::ostringstream o;
  o << comment_block(curve_fields(c), c.config_yaml);
  o << "ebn0_db,bit_errors,bits,ber\n";
  for (const auto& p : c.points) {
    o << format_double(p.ebn0_db) << "," << p.bit_errors << "," << p.bits << "," << format_double(p.ber) << "\n";
  }
  return o.str();
}

std::string curve_json(const BerCurve& c) {
  nlohmann::ordered_json j;
  j["equalizer"] = c.equalizer;
  j["channel"] = c.channel;
  j["constellation"] = c.constellation;
  j["seed"] = c.seed;
  j["config_hash"] = c.config_hash;
  j["revision"] = c.revision;
  j["config"] = c.config_yaml;
  j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : c.points) {
    j["points"].push_back({{"ebn0_db", p.ebn0_db},
                           {"bit_errors", p.bit_errors},
                           {"bits", p.bits},
                           {"ber", p.ber},
                           {"stopped_by", std::string(to_string(p.stop))}});
  }
  return j.dump(2) + "\n";
}

BerCurve parse_curve_csv(const std::string& text, const std::string& source) {
  BerCurve c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header = false;
  bool in_config = false;
  auto fail = [&](const std::string& msg) { throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg); };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# config:", 0) == 0) {
        in_config = true;
      } else if (in_config && line.rfind("#   ", 0) == 0) {
        c.config_yaml += line.substr(4) + "\n";
      } else if (const auto colon = line.find(": "); colon != std::string::npos && line.size() > 2) {
        const std::string key = line.substr(2, colon - 2);
        const std::string value = line.substr(colon + 2);
        if (key == "equalizer") c.equalizer = value;
        else if (key == "channel") c.channel = value;
        else if (key == "constellation") c.constellation = value;
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "config_hash") c.config_hash = value;
        else if (key == "revision") c.revision = value;
      }
      continue;
    }
    if (!header) {
      if (line != "ebn0_db,bit_errors,bits,ber") fail("expected header 'ebn0_db,bit_errors,bits,ber'");
      header = true;
      continue;
    }
    CurvePoint p;
    std::istringstream row(line);
    std::string f[4];
    for (auto& s : f)
      if (!std::getline(row, s, ',')) fail("expected 4 fields");
    try {
      p.ebn0_db = std::stod(f[0]);
      p.bit_errors = std::stoull(f[1]);
      p.bits = std::stoull(f[2]);
      p.ber = std::stod(f[3]);
    } catch (const std::exception&) {
      fail("malformed row '" + line + "'");
    }
    c.points.push_back(p);
  }
  if (!header) throw ConfigError(source + ": no curve header found");
  if (c.equalizer.empty()) c.equalizer = std::filesystem::path(source).stem().string();
  return c;
}

std::string train_log_csv(const std::vector<eq::TrainLogRow>& rows, const ExperimentConfig& cfg,
                          const std::string& revision) {
  std::ostringstream o;
  o << comment_block({{"equalizer", cfg.equalizer},
                      {"channel", cfg.channel},
                      {"seed", std::to_string(cfg.seed)},
                      {"config_hash", cfg.hash()},
                      {"revision", revision}},
                     cfg.to_yaml());
  o << "epoch,loss,lr,val_ser\n";
  for (const auto& r : rows) {
    o << r.epoch << "," << format_double(r.loss) << "," << format_double(r.lr) << ",";
    if (r.val_ser >= 0.0) o << format_double(r.val_ser);
    o << "\n";
  }
  return o.str();
}

}  // namespace spikeq::exp
