#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mtmv {

/// Minimal static SVG line/band chart for experiment artifacts.
class SvgChart {
 public:
  SvgChart(std::string title, std::string x_label, std::string y_label);

  void add_line(std::string label, std::vector<double> x, std::vector<double> y);
  /// Shaded region between two curves (quantile fans).
  void add_band(std::string label, std::vector<double> x, std::vector<double> lo,
                std::vector<double> hi);

  std::string to_string() const;
  void write(const std::filesystem::path& file) const;

 private:
  struct Line {
    std::string label;
    std::vector<double> x, y;
  };
  struct Band {
    std::string label;
    std::vector<double> x, lo, hi;
  };

  std::string title_;
  std::string x_label_;
  std::string y_label_;
  std::vector<Line> lines_;
  std::vector<Band> bands_;
};

}  // namespace mtmv
