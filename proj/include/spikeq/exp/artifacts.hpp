#ifndef SPIKEQ_EXP_ARTIFACTS_HPP
#define SPIKEQ_EXP_ARTIFACTS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "spikeq/eq/train.hpp"
#include "spikeq/exp/sweep.hpp"

namespace spikeq::exp {

/// Writes through a temporary sibling file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);
/// CRC-32 of a file's bytes as 8 hex digits.
std::string file_crc(const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_double(double x);

/// "# key: value" lines followed by the resolved config, each line commented.
std::string comment_block(const std::vector<std::pair<std::string, std::string>>& fields, const std::string& yaml);

std::string curve_file_stem(const BerCurve& c);
std::string curve_csv(const BerCurve& c);
std::string curve_json(const BerCurve& c);
/// Reads a curve CSV written by curve_csv (metadata from its comment lines).
BerCurve parse_curve_csv(const std::string& text, const std::string& source);

std::string train_log_csv(const std::vector<eq::TrainLogRow>& rows, const ExperimentConfig& cfg,
                          const std::string& revision);

}  // namespace spikeq::exp

#endif  // SPIKEQ_EXP_ARTIFACTS_HPP
