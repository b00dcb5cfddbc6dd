#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kuramoto/integrate.hpp"
#include "kuramoto/spectral.hpp"

namespace kuramoto {

inline constexpr const char* kVersion = "0.1.0";

/// Column-oriented numeric table; columns[0] is the abscissa.
struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;
  nlohmann::json meta = nlohmann::json::object();

  std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
};

/// Table with an "omega" column followed by one column per spectrum. All
/// spectra must share a grid; the exact grid (omega0, d_omega) goes into meta.
Table spectrum_table(std::string name, const std::vector<std::pair<std::string, Spectrum>>& spectra);

/// Delimited text with a structured header:
///   # kuramoto-imf <version>
///   # config: <one-line JSON of the generating run config>
///   # meta: <one-line JSON>
///   col0,col1,...
///   rows printed with 17 significant digits
void write_table(const std::filesystem::path& path, const Table& table, const nlohmann::json& config);

struct TableFile {
  nlohmann::json config;
  Table table;
};
TableFile read_table(const std::filesystem::path& path);

/// Rebuilds the spectrum in `column` bit-exactly from a spectrum table.
Spectrum spectrum_from_table(const TableFile& file, const std::string& column);

/// Run config from either a JSON config file or any emitted table (its
/// "# config:" header line).
nlohmann::json load_config(const std::filesystem::path& path);

/// Header line (JSON: layout, sizes, caller-supplied provenance) followed by
/// time-major little-endian doubles: per sample, the selected pointers as
/// (re, im) pairs, then the noise pairs if recorded, then r if recorded.
void write_trajectory(const std::filesystem::path& path, const TrajectoryRecording& rec,
                      const nlohmann::json& provenance);
TrajectoryRecording read_trajectory(const std::filesystem::path& path, nlohmann::json* header = nullptr);

}  // namespace kuramoto
