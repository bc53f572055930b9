#include "superosc/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "superosc/manifest.hpp"

namespace superosc {

namespace {

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else if (c == '"') o += "&quot;";
    else o += c;
  }
  return o;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string render_svg(const Plot& plot, const std::string& config_hash) {
  const double ml = 70, mr = 20, mt = 40, mb = 60;
  const double pw = plot.width - ml - mr;
  const double ph = plot.height - mt - mb;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto ty = [&](double y) { return plot.log_y ? std::log10(std::max(y, 1e-300)) : y; };
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (plot.log_y && s.y[i] <= 0.0) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x1 > x0)) { x0 = 0; x1 = 1; }
  if (!(y1 > y0)) { y0 = std::isfinite(y0) ? y0 - 1 : 0; y1 = y0 + 2; }
  if (!plot.log_y) y0 = std::min(y0, 0.0);
  const double pad = 0.05 * (y1 - y0);
  y1 += pad;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return mt + ph - (ty(y) - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\"" << plot.height
     << "\" viewBox=\"0 0 " << plot.width << " " << plot.height << "\">\n";
  os << "<metadata>config_hash=" << esc(config_hash) << "</metadata>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& sp : plot.spans) {
    const double a = px(std::max(sp.x0, x0));
    const double b = px(std::min(sp.x1, x1));
    if (b > a)
      os << "<rect x=\"" << num(a) << "\" y=\"" << num(mt) << "\" width=\"" << num(b - a) << "\" height=\"" << num(ph)
         << "\" fill=\"" << sp.color << "\" opacity=\"0.5\"/>\n";
  }
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    os << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(mt + ph + 18) << "\" font-size=\"11\" text-anchor=\"middle\">"
       << tick(xv) << "</text>\n";
    const double ypix = mt + ph - (yv - y0) / (y1 - y0) * ph;
    os << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(ypix + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
       << (plot.log_y ? "1e" + tick(yv) : tick(yv)) << "</text>\n";
  }
  os << "<text x=\"" << num(ml + pw / 2) << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">" << esc(plot.title)
     << "</text>\n";
  os << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(plot.height - 22)
     << "\" font-size=\"12\" text-anchor=\"middle\">" << esc(plot.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << num(mt + ph / 2) << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << num(mt + ph / 2) << ")\">" << esc(plot.y_label) << "</text>\n";
  int legend = 0;
  for (const auto& s : plot.series) {
    // at most ~4000 vertices per series
    const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 4000);
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.3\""
       << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); i += stride) {
      if (!std::isfinite(s.y[i]) || (plot.log_y && s.y[i] <= 0.0)) continue;
      os << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
    }
    os << "\"/>\n";
    const double ly = mt + 14 + 16 * legend++;
    os << "<line x1=\"" << num(ml + pw - 150) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(ml + pw - 128)
       << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color << "\"" << (s.dashed ? " stroke-dasharray=\"5,3\"" : "")
       << "/>\n";
    os << "<text x=\"" << num(ml + pw - 124) << "\" y=\"" << num(ly) << "\" font-size=\"11\">" << esc(s.label)
       << "</text>\n";
  }
  os << "<text x=\"" << num(plot.width - 6) << "\" y=\"" << num(plot.height - 6)
     << "\" font-size=\"9\" text-anchor=\"end\" fill=\"#666\">config " << esc(config_hash) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_svg(const std::string& path, const Plot& plot, const std::string& config_hash) {
  write_file_atomic(path, render_svg(plot, config_hash));
}

}  // namespace superosc
