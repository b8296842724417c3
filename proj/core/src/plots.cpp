#include "aeloc/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "aeloc/errors.hpp"

namespace aeloc {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

struct Svg {
  std::ofstream os;
  Svg(const std::string& path, double w, double h) {
    os.open(path, std::ios::binary);
    if (!os) throw InputError("cannot open svg for writing: " + path);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\""
       << num(h) << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& anchor = "start") {
    os << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\""
       << " font-size=\"" << size << "\" text-anchor=\"" << anchor << "\">" << s << "</text>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0) {
    os << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
       << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
       << num(width) << "\"/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& cls = "") {
    os << "<rect";
    if (!cls.empty()) os << " class=\"" << cls << "\"";
    os << " x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
       << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\"/>\n";
  }
  void circle(double x, double y, double r, const std::string& fill) {
    os << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r)
       << "\" fill=\"" << fill << "\"/>\n";
  }
  void finish() {
    os << "</svg>\n";
    os.close();
    if (os.fail()) throw InputError("failed writing svg");
  }
};

}  // namespace

void write_histogram_svg(const std::vector<double>& values, const HistogramOptions& opt,
                         const std::string& path) {
  if (values.empty()) throw InputError("histogram of zero values");
  const double w = 640, h = 420, ml = 60, mr = 20, mt = 40, mb = 50;

  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) hi = lo + 1.0;

  std::vector<std::size_t> counts(opt.bins, 0);
  for (double v : values) {
    std::size_t b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(opt.bins));
    if (b >= opt.bins) b = opt.bins - 1;
    ++counts[b];
  }
  const double cmax = static_cast<double>(*std::max_element(counts.begin(), counts.end()));

  Svg svg(path, w, h);
  svg.os << "<!-- bins=" << opt.bins << " n=" << values.size() << " -->\n";
  const double pw = w - ml - mr, ph = h - mt - mb;
  for (std::size_t b = 0; b < opt.bins; ++b) {
    const double bh = ph * static_cast<double>(counts[b]) / cmax;
    svg.rect(ml + pw * static_cast<double>(b) / static_cast<double>(opt.bins), mt + ph - bh,
             pw / static_cast<double>(opt.bins) - 0.5, bh, "#4878a8", "bin");
  }
  svg.line(ml, mt + ph, ml + pw, mt + ph, "black");
  svg.line(ml, mt, ml, mt + ph, "black");
  for (int i = 0; i <= 4; ++i) {
    const double x = lo + (hi - lo) * i / 4.0;
    svg.text(ml + pw * i / 4.0, h - mb + 18, num(x), 10, "middle");
  }
  svg.text(ml, mt - 12, opt.title, 14);
  svg.text(ml + pw / 2, h - 12, opt.x_label, 12, "middle");
  svg.finish();
}

void write_localization_svg(const std::vector<ScatterPoint>& points, double plate_w_mm,
                            double plate_h_mm, const std::string& title,
                            const std::string& path) {
  const double margin = 60;
  const double scale = 500.0 / std::max(plate_w_mm, plate_h_mm);
  const double w = plate_w_mm * scale + 2 * margin;
  const double h = plate_h_mm * scale + 2 * margin;
  auto X = [&](double mm) { return margin + mm * scale; };
  // Plate y axis points up; SVG y axis points down.
  auto Y = [&](double mm) { return h - margin - mm * scale; };

  Svg svg(path, w, h);
  svg.os << "<!-- points=" << points.size() << " -->\n";
  svg.os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\""
         << plate_w_mm * scale << "\" height=\"" << plate_h_mm * scale
         << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  for (const auto& p : points) {
    svg.line(X(p.true_x), Y(p.true_y), X(p.pred_x), Y(p.pred_y), "#c04040", 1.0);
    svg.circle(X(p.true_x), Y(p.true_y), 3.0, "#3060c0");
    svg.circle(X(p.pred_x), Y(p.pred_y), 2.2, "#c04040");
  }
  svg.text(margin, margin - 16, title, 14);
  svg.text(margin, h - 14, "blue: true, red: predicted (mm)", 11);
  svg.finish();
}

void write_heatmap_svg(const TensorGrid& grid, const std::string& title,
                       const std::string& path) {
  if (grid.rank() != 2) throw InputError("heatmap expects a rank-2 grid");
  const std::size_t M = grid.extent(0), N = grid.extent(1);
  double lo = grid[0], hi = grid[0];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    lo = std::min(lo, grid[i]);
    hi = std::max(hi, grid[i]);
  }
  const double range = std::max(hi - lo, 1.0e-300);

  const double cell = std::max(1.0, std::floor(560.0 / static_cast<double>(std::max(M, N))));
  const double ml = 50, mt = 40;
  const double w = ml + cell * static_cast<double>(N) + 20;
  const double h = mt + cell * static_cast<double>(M) + 30;

  Svg svg(path, w, h);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const double t = (grid.at2(i, j) - lo) / range;
      // Dark blue -> yellow ramp.
      const int r = static_cast<int>(255.0 * t);
      const int g = static_cast<int>(220.0 * t * t);
      const int b = static_cast<int>(90.0 + 120.0 * (1.0 - t));
      char color[10];
      std::snprintf(color, sizeof(color), "#%02x%02x%02x", r, g, b);
      // Row 0 is drawn at the bottom.
      svg.rect(ml + cell * static_cast<double>(j),
               mt + cell * static_cast<double>(M - 1 - i), cell, cell, color);
    }
  }
  svg.text(ml, mt - 12, title, 14);
  svg.finish();
}

}  // namespace aeloc
