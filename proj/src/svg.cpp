#include "dlmc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dlmc {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 520.0;
constexpr double kMarginL = 70.0;
constexpr double kMarginR = 20.0;
constexpr double kMarginT = 40.0;
constexpr double kMarginB = 55.0;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Decade ticks between bounds (log10 space).
std::vector<double> decade_ticks(double lo, double hi) {
  std::vector<double> ticks;
  for (int e = static_cast<int>(std::floor(lo)); e <= static_cast<int>(std::ceil(hi)); ++e)
    if (e >= lo - 1e-9 && e <= hi + 1e-9) ticks.push_back(static_cast<double>(e));
  return ticks;
}

}  // namespace

void write_loglog_svg(const std::filesystem::path& file, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
      xlo = std::min(xlo, std::log10(s.x[i]));
      xhi = std::max(xhi, std::log10(s.x[i]));
      ylo = std::min(ylo, std::log10(s.y[i]));
      yhi = std::max(yhi, std::log10(s.y[i]));
    }
  }
  if (!(xlo <= xhi)) {  // nothing plottable; emit an empty frame
    xlo = 0.0; xhi = 1.0; ylo = 0.0; yhi = 1.0;
  }
  if (xhi - xlo < 1e-9) { xlo -= 0.5; xhi += 0.5; }
  if (yhi - ylo < 1e-9) { ylo -= 0.5; yhi += 0.5; }

  const double plot_w = kWidth - kMarginL - kMarginR;
  const double plot_h = kHeight - kMarginT - kMarginB;
  auto px = [&](double lx) { return kMarginL + (lx - xlo) / (xhi - xlo) * plot_w; };
  auto py = [&](double ly) { return kMarginT + (yhi - ly) / (yhi - ylo) * plot_h; };

  std::ofstream out(file);
  if (!out) throw std::runtime_error("write_loglog_svg: cannot open " + file.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
      << "font-family=\"sans-serif\">" << title << "</text>\n";

  // frame
  out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n";

  for (double tx : decade_ticks(xlo, xhi)) {
    const double x = px(tx);
    out << "<line x1=\"" << x << "\" y1=\"" << kMarginT << "\" x2=\"" << x << "\" y2=\""
        << kMarginT + plot_h << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << kMarginT + plot_h + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">1e"
        << static_cast<int>(tx) << "</text>\n";
  }
  for (double ty : decade_ticks(ylo, yhi)) {
    const double y = py(ty);
    out << "<line x1=\"" << kMarginL << "\" y1=\"" << y << "\" x2=\"" << kMarginL + plot_w
        << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << kMarginL - 6 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">1e"
        << static_cast<int>(ty) << "</text>\n";
  }
  out << "<text x=\"" << kMarginL + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << x_label
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << kMarginT + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
      << "transform=\"rotate(-90 16 " << kMarginT + plot_h / 2 << ")\">" << y_label
      << "</text>\n";

  double legend_y = kMarginT + 14.0;
  for (const auto& s : series) {
    std::ostringstream pts;
    bool pen_down = false;
    std::string path;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) {
        pen_down = false;
        continue;
      }
      const double x = px(std::log10(s.x[i]));
      const double y = py(std::log10(s.y[i]));
      path += (pen_down ? " L " : " M ") + fmt(x) + " " + fmt(y);
      pen_down = true;
    }
    out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.6\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "")
        << "/>\n";
    out << "<line x1=\"" << kMarginL + plot_w - 180 << "\" y1=\"" << legend_y - 4 << "\" x2=\""
        << kMarginL + plot_w - 155 << "\" y2=\"" << legend_y - 4 << "\" stroke=\"" << s.color
        << "\" stroke-width=\"1.6\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    out << "<text x=\"" << kMarginL + plot_w - 150 << "\" y=\"" << legend_y
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.name << "</text>\n";
    legend_y += 16.0;
  }
  out << "</svg>\n";
}

}  // namespace dlmc
