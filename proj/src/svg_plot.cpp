#include "mblq/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mblq {

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame frame_for(const std::vector<const PlotSeries*>& all, bool log_x) {
  Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0,
          -std::numeric_limits<double>::infinity()};
  for (const auto* s : all) {
    for (std::size_t i = 0; i < s->x.size(); ++i) {
      if (log_x && s->x[i] <= 0.0) continue;
      const double x = log_x ? std::log10(s->x[i]) : s->x[i];
      if (!std::isfinite(x) || !std::isfinite(s->y[i])) continue;
      f.x0 = std::min(f.x0, x);
      f.x1 = std::max(f.x1, x);
      f.y0 = std::min(f.y0, s->y[i]);
      f.y1 = std::max(f.y1, s->y[i]);
    }
  }
  if (!(f.x1 > f.x0)) f = {0.0, 1.0, f.y0, f.y1};
  if (!(f.y1 > f.y0)) f.y1 = f.y0 + 1.0;
  f.y1 += 0.05 * (f.y1 - f.y0);
  return f;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

void header(std::ostream& out, const std::string& title, const Frame& f, const std::string& xl, const std::string& yl) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    out << "<text x=\"" << f.px(xv) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\" "
        << "font-size=\"11\">" << xv << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << yv
        << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << escape(xl) << "</text>\n";
  out << "<text x=\"14\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 14 " << kHeight / 2
      << ")\" text-anchor=\"middle\" font-size=\"12\">" << escape(yl) << "</text>\n";
}

void polyline(std::ostream& out, const Frame& f, const PlotSeries& s, const char* color, bool log_x) {
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (log_x && s.x[i] <= 0.0) continue;
    const double x = log_x ? std::log10(s.x[i]) : s.x[i];
    if (!std::isfinite(x) || !std::isfinite(s.y[i])) continue;
    out << f.px(x) << ',' << f.py(s.y[i]) << ' ';
  }
  out << "\"/>\n";
}

void legend(std::ostream& out, const std::vector<const PlotSeries*>& series) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 14.0 * static_cast<double>(i);
    out << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << y - 8 << "\" width=\"10\" height=\"10\" fill=\""
        << kColors[i % 6] << "\"/>\n";
    out << "<text x=\"" << kWidth - kRight - 136 << "\" y=\"" << y + 1 << "\" font-size=\"11\">"
        << escape(series[i]->label) << "</text>\n";
  }
}

void finish(std::ostringstream& body, const std::filesystem::path& path) {
  body << "</svg>\n";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << body.str();
}

}  // namespace

void write_histogram_svg(const std::filesystem::path& path, const std::string& title, const PlotSeries& bars,
                         const std::vector<PlotSeries>& curves) {
  std::vector<const PlotSeries*> all{&bars};
  for (const auto& c : curves) all.push_back(&c);
  const Frame f = frame_for(all, false);
  std::ostringstream out;
  header(out, title, f, "x", "density");
  const double half = bars.x.size() > 1 ? 0.5 * (bars.x[1] - bars.x[0]) : 0.5;
  for (std::size_t i = 0; i < bars.x.size(); ++i) {
    const double left = f.px(bars.x[i] - half), right = f.px(bars.x[i] + half);
    const double top = f.py(bars.y[i]), base = f.py(0.0);
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\""
        << base - top << "\" fill=\"" << kColors[0] << "\" fill-opacity=\"0.45\"/>\n";
  }
  for (std::size_t c = 0; c < curves.size(); ++c) polyline(out, f, curves[c], kColors[(c + 1) % 6], false);
  legend(out, all);
  finish(out, path);
}

void write_line_svg(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series, bool log_x) {
  std::vector<const PlotSeries*> all;
  for (const auto& s : series) all.push_back(&s);
  const Frame f = frame_for(all, log_x);
  std::ostringstream out;
  header(out, title, f, log_x ? "log10 " + x_label : x_label, y_label);
  for (std::size_t i = 0; i < series.size(); ++i) polyline(out, f, series[i], kColors[i % 6], log_x);
  legend(out, all);
  finish(out, path);
}

}  // namespace mblq
