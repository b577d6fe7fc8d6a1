#pragma once
#include <filesystem>
#include <string>
#include <vector>

namespace dlmc {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;  // dashed lines mark theory overlays
};

// Self-contained log-log line plot. Points with non-positive coordinates
// are dropped (they have no place on log axes).
void write_loglog_svg(const std::filesystem::path& file, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series);

}  // namespace dlmc
