#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mblq {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Bars for `bars` (x = bin centers, y = densities) with `curves` overlaid as lines.
void write_histogram_svg(const std::filesystem::path& path, const std::string& title, const PlotSeries& bars,
                         const std::vector<PlotSeries>& curves);

/// Line chart; log_x plots log10 of x.
void write_line_svg(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series, bool log_x = false);

}  // namespace mblq
