#include "kuramoto/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kuramoto {
namespace {

using nlohmann::json;

std::runtime_error io_error(const std::filesystem::path& path, const std::string& what) {
  return std::runtime_error(path.string() + ": " + what);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

Table spectrum_table(std::string name, const std::vector<std::pair<std::string, Spectrum>>& spectra) {
  if (spectra.empty()) throw std::invalid_argument("spectrum_table: no spectra");
  const Spectrum& ref = spectra.front().second;
  Table t;
  t.name = std::move(name);
  t.columns.push_back("omega");
  std::vector<double> omega(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) omega[i] = ref.omega(i);
  t.data.push_back(std::move(omega));
  for (const auto& [label, spec] : spectra) {
    require_same_grid(ref, spec);
    t.columns.push_back(label);
    t.data.push_back(spec.values);
  }
  t.meta["omega0"] = ref.omega0;
  t.meta["d_omega"] = ref.d_omega;
  return t;
}

void write_table(const std::filesystem::path& path, const Table& table, const nlohmann::json& config) {
  if (table.columns.size() != table.data.size()) throw std::invalid_argument("write_table: column count mismatch");
  for (const auto& col : table.data) {
    if (col.size() != table.rows()) throw std::invalid_argument("write_table: ragged columns");
  }
  std::ofstream out(path);
  if (!out) throw io_error(path, "cannot open for writing");
  out << "# kuramoto-imf " << kVersion << '\n';
  out << "# config: " << config.dump() << '\n';
  out << "# meta: " << table.meta.dump() << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.data.size(); ++c) out << (c ? "," : "") << format_double(table.data[c][r]);
    out << '\n';
  }
  if (!out) throw io_error(path, "write failed");
}

TableFile read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path, "cannot open");
  TableFile file;
  file.table.name = path.stem().string();
  std::string line;
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# config: ", 0) == 0) {
      file.config = json::parse(line.substr(10));
    } else if (line.rfind("# meta: ", 0) == 0) {
      file.table.meta = json::parse(line.substr(8));
    } else if (line[0] == '#') {
      continue;
    } else if (!have_columns) {
      file.table.columns = split_csv(line);
      file.table.data.assign(file.table.columns.size(), {});
      have_columns = true;
    } else {
      const auto cells = split_csv(line);
      if (cells.size() != file.table.columns.size()) throw io_error(path, "row with wrong number of columns");
      for (std::size_t c = 0; c < cells.size(); ++c) file.table.data[c].push_back(std::stod(cells[c]));
    }
  }
  if (!have_columns) throw io_error(path, "no column header");
  return file;
}

Spectrum spectrum_from_table(const TableFile& file, const std::string& column) {
  const auto& t = file.table;
  if (!t.meta.contains("omega0") || !t.meta.contains("d_omega")) {
    throw std::invalid_argument("table has no spectrum grid metadata");
  }
  for (std::size_t c = 1; c < t.columns.size(); ++c) {
    if (t.columns[c] == column) {
      Spectrum s;
      s.omega0 = t.meta["omega0"].get<double>();
      s.d_omega = t.meta["d_omega"].get<double>();
      s.values = t.data[c];
      return s;
    }
  }
  throw std::invalid_argument("table has no column '" + column + "'");
}

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path, "cannot open");
  const int first = in.peek();
  if (first == '#') {
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("# config: ", 0) == 0) return json::parse(line.substr(10));
      if (line.empty() || line[0] != '#') break;
    }
    throw io_error(path, "no '# config:' header line");
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw io_error(path, std::string("invalid JSON config: ") + e.what());
  }
}

void write_trajectory(const std::filesystem::path& path, const TrajectoryRecording& rec,
                      const nlohmann::json& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path, "cannot open for writing");
  json header;
  header["format"] = "kuramoto-trajectory";
  header["version"] = kVersion;
  header["layout"] = "time-major f64: pointers (re,im) x n_selected, noise (re,im) x n_selected if has_noise, r if has_order";
  header["start_time"] = rec.start_time;
  header["sample_dt"] = rec.sample_dt;
  header["n_samples"] = rec.n_samples;
  header["oscillators"] = rec.oscillators;
  header["has_noise"] = !rec.noise.empty();
  header["has_order"] = !rec.order.empty();
  header["provenance"] = provenance;
  out << header.dump() << '\n';
  const std::size_t n_sel = rec.n_selected();
  std::vector<double> row;
  for (std::size_t t = 0; t < rec.n_samples; ++t) {
    row.clear();
    for (std::size_t s = 0; s < n_sel; ++s) {
      const auto p = rec.pointers[t * n_sel + s];
      row.push_back(p.real());
      row.push_back(p.imag());
    }
    if (!rec.noise.empty()) {
      for (std::size_t s = 0; s < n_sel; ++s) {
        const auto z = rec.noise[t * n_sel + s];
        row.push_back(z.real());
        row.push_back(z.imag());
      }
    }
    if (!rec.order.empty()) row.push_back(rec.order[t]);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw io_error(path, "write failed");
}

TrajectoryRecording read_trajectory(const std::filesystem::path& path, nlohmann::json* header_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path, "cannot open");
  std::string line;
  std::getline(in, line);
  const json header = json::parse(line);
  if (header.value("format", "") != "kuramoto-trajectory") throw io_error(path, "not a trajectory file");
  TrajectoryRecording rec;
  rec.start_time = header["start_time"].get<double>();
  rec.sample_dt = header["sample_dt"].get<double>();
  rec.n_samples = header["n_samples"].get<std::size_t>();
  rec.oscillators = header["oscillators"].get<std::vector<std::size_t>>();
  const bool has_noise = header["has_noise"].get<bool>();
  const bool has_order = header["has_order"].get<bool>();
  const std::size_t n_sel = rec.n_selected();
  rec.pointers.resize(rec.n_samples * n_sel);
  if (has_noise) rec.noise.resize(rec.n_samples * n_sel);
  if (has_order) rec.order.resize(rec.n_samples);
  const std::size_t width = 2 * n_sel * (has_noise ? 2 : 1) + (has_order ? 1 : 0);
  std::vector<double> row(width);
  for (std::size_t t = 0; t < rec.n_samples; ++t) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(width * sizeof(double)));
    if (!in) throw io_error(path, "truncated trajectory data");
    std::size_t k = 0;
    for (std::size_t s = 0; s < n_sel; ++s, k += 2) rec.pointers[t * n_sel + s] = {row[k], row[k + 1]};
    if (has_noise) {
      for (std::size_t s = 0; s < n_sel; ++s, k += 2) rec.noise[t * n_sel + s] = {row[k], row[k + 1]};
    }
    if (has_order) rec.order[t] = row[k];
  }
  if (header_out) *header_out = header;
  return rec;
}

}  // namespace kuramoto
