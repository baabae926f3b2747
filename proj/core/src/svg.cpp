#include "mtmv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mtmv {

namespace {

constexpr double kWidth = 960;
constexpr double kHeight = 600;
constexpr double kMarginLeft = 80;
constexpr double kMarginRight = 30;
constexpr double kMarginTop = 50;
constexpr double kMarginBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      const double m = 0.05 * (hi - lo);
      lo -= m;
      hi += m;
    }
  }
};

std::vector<double> ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    out.push_back(v);
  }
  return out;
}

}  // namespace

SvgChart::SvgChart(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgChart::add_line(std::string label, std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("svg: line needs matching nonempty x/y");
  }
  lines_.push_back({std::move(label), std::move(x), std::move(y)});
}

void SvgChart::add_band(std::string label, std::vector<double> x, std::vector<double> lo,
                        std::vector<double> hi) {
  if (x.size() != lo.size() || x.size() != hi.size() || x.empty()) {
    throw std::invalid_argument("svg: band needs matching nonempty x/lo/hi");
  }
  bands_.push_back({std::move(label), std::move(x), std::move(lo), std::move(hi)});
}

std::string SvgChart::to_string() const {
  Range xr, yr;
  for (const auto& l : lines_) {
    for (double v : l.x) xr.include(v);
    for (double v : l.y) yr.include(v);
  }
  for (const auto& b : bands_) {
    for (double v : b.x) xr.include(v);
    for (double v : b.lo) yr.include(v);
    for (double v : b.hi) yr.include(v);
  }
  if (lines_.empty() && bands_.empty()) {
    throw std::invalid_argument("svg: nothing to draw");
  }
  xr.pad();
  yr.pad();

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double v) { return kMarginLeft + (v - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto sy = [&](double v) { return kMarginTop + (yr.hi - v) / (yr.hi - yr.lo) * plot_h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << " "
     << kHeight << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">"
     << title_ << "</text>\n";

  for (double tx : ticks(xr.lo, xr.hi)) {
    const double px = sx(tx);
    os << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kMarginTop) << "\" x2=\"" << fmt(px)
       << "\" y2=\"" << fmt(kHeight - kMarginBottom) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(kHeight - kMarginBottom + 20)
       << "\" text-anchor=\"middle\" font-size=\"12\">" << fmt(tx) << "</text>\n";
  }
  for (double ty : ticks(yr.lo, yr.hi)) {
    const double py = sy(ty);
    os << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(py) << "\" x2=\""
       << fmt(kWidth - kMarginRight) << "\" y2=\"" << fmt(py) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << fmt(kMarginLeft - 8) << "\" y=\"" << fmt(py + 4)
       << "\" text-anchor=\"end\" font-size=\"12\">" << fmt(ty) << "</text>\n";
  }
  os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << plot_w
     << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15
     << "\" text-anchor=\"middle\" font-size=\"14\">" << x_label_ << "</text>\n";
  os << "<text x=\"20\" y=\"" << kHeight / 2
     << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
     << kHeight / 2 << ")\">" << y_label_ << "</text>\n";

  std::size_t color = 0;
  for (const auto& b : bands_) {
    os << "<polygon fill=\"" << kPalette[color % 8] << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < b.x.size(); ++i) {
      os << fmt(sx(b.x[i])) << "," << fmt(sy(b.hi[i])) << " ";
    }
    for (std::size_t i = b.x.size(); i-- > 0;) {
      os << fmt(sx(b.x[i])) << "," << fmt(sy(b.lo[i])) << " ";
    }
    os << "\"/>\n";
    ++color;
  }
  color = 0;
  double legend_y = kMarginTop + 16;
  for (const auto& b : bands_) {
    os << "<rect x=\"" << kMarginLeft + 12 << "\" y=\"" << legend_y - 10
       << "\" width=\"18\" height=\"10\" fill=\"" << kPalette[color % 8]
       << "\" fill-opacity=\"0.18\"/>\n";
    os << "<text x=\"" << kMarginLeft + 36 << "\" y=\"" << legend_y
       << "\" font-size=\"12\">" << b.label << "</text>\n";
    legend_y += 18;
    ++color;
  }
  for (const auto& l : lines_) {
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[color % 8]
       << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < l.x.size(); ++i) {
      os << fmt(sx(l.x[i])) << "," << fmt(sy(l.y[i])) << " ";
    }
    os << "\"/>\n";
    os << "<line x1=\"" << kMarginLeft + 12 << "\" y1=\"" << legend_y - 4 << "\" x2=\""
       << kMarginLeft + 30 << "\" y2=\"" << legend_y - 4 << "\" stroke=\""
       << kPalette[color % 8] << "\" stroke-width=\"1.8\"/>\n";
    os << "<text x=\"" << kMarginLeft + 36 << "\" y=\"" << legend_y
       << "\" font-size=\"12\">" << l.label << "</text>\n";
    legend_y += 18;
    ++color;
  }
  os << "</svg>\n";
  return os.str();
}

void SvgChart::write(const std::filesystem::path& file) const {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("svg: cannot open " + file.string() + " for writing");
  os << to_string();
}

}  // namespace mtmv
