#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kuramoto {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
  bool markers = false;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<PlotSeries> series;
  bool log_y = false;
  std::optional<std::pair<double, double>> x_range;
};

/// Minimal self-contained SVG line chart with axes, ticks and a legend.
std::string render_svg(const PlotSpec& spec);
void write_svg(const std::filesystem::path& path, const PlotSpec& spec);

}  // namespace kuramoto
