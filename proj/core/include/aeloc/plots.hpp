#ifndef AELOC_PLOTS_HPP
#define AELOC_PLOTS_HPP

#include <array>
#include <string>
#include <vector>

#include "aeloc/tensor.hpp"

namespace aeloc {

// Static SVG renderers. Output bytes are a pure function of the inputs
// (fixed number formatting, no timestamps), so plots are reproducible.

struct HistogramOptions {
  std::size_t bins = 50;
  std::string title;
  std::string x_label;
};

void write_histogram_svg(const std::vector<double>& values, const HistogramOptions& opt,
                         const std::string& path);

struct ScatterPoint {
  double true_x, true_y;
  double pred_x, pred_y;
};

// Predicted-vs-true scatter with the plate outline and one error segment
// per event.
void write_localization_svg(const std::vector<ScatterPoint>& points, double plate_w_mm,
                            double plate_h_mm, const std::string& title,
                            const std::string& path);

// Row-major heat map (rows bottom-up), linear grayscale-to-hot ramp.
void write_heatmap_svg(const TensorGrid& grid, const std::string& title,
                       const std::string& path);

}  // namespace aeloc

#endif  // AELOC_PLOTS_HPP
