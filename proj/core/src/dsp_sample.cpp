#include <algorithm>
#include <cmath>

#include "aeloc/dsp.hpp"
#include "aeloc/errors.hpp"

namespace aeloc {

TensorGrid scalogram_image(const Scalogram& s, std::size_t H, std::size_t W) {
  if (H < 2 || W < 2) throw ConfigError("image dimensions must be >= 2");
  const std::size_t M = s.num_scales();
  const std::size_t N = s.num_times();
  if (M < 1 || N < 1) throw InputError("empty scalogram");

  // Corner-aligned bilinear resize: same-size input reproduces itself.
  TensorGrid img({H, W});
  const double sy = M > 1 ? static_cast<double>(M - 1) / static_cast<double>(H - 1) : 0.0;
  const double sx = N > 1 ? static_cast<double>(N - 1) / static_cast<double>(W - 1) : 0.0;
  for (std::size_t i = 0; i < H; ++i) {
    const double y = static_cast<double>(i) * sy;
    const std::size_t y0 = std::min(static_cast<std::size_t>(y), M - 1);
    const std::size_t y1 = std::min(y0 + 1, M - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t j = 0; j < W; ++j) {
      const double x = static_cast<double>(j) * sx;
      const std::size_t x0 = std::min(static_cast<std::size_t>(x), N - 1);
      const std::size_t x1 = std::min(x0 + 1, N - 1);
      const double fx = x - static_cast<double>(x0);
      const double v00 = s.magnitudes.at2(y0, x0);
      const double v01 = s.magnitudes.at2(y0, x1);
      const double v10 = s.magnitudes.at2(y1, x0);
      const double v11 = s.magnitudes.at2(y1, x1);
      img.at2(i, j) = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) +
                      fy * ((1.0 - fx) * v10 + fx * v11);
    }
  }

  double lo = img[0], hi = img[0];
  for (std::size_t i = 0; i < img.size(); ++i) {
    lo = std::min(lo, img[i]);
    hi = std::max(hi, img[i]);
  }
  const double range = std::max(hi - lo, 1.0e-12);  // constant input -> all zeros
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = (img[i] - lo) / range;
  return img;
}

Sample build_sample(const std::array<Waveform, 4>& waveforms, double event_x_mm,
                    double event_y_mm, const PlateSpec& plate, const SampleConfig& cfg,
                    const std::string& event_id) {
  const std::size_t n = waveforms[0].samples.size();
  const double fs = waveforms[0].sample_rate_hz;
  for (const auto& w : waveforms) {
    if (w.samples.size() != n) throw InputError("waveform lengths differ across channels");
    if (w.sample_rate_hz != fs) throw InputError("waveform sample rates differ across channels");
  }
  if (n == 0) throw InputError("empty waveforms");

  const auto scales =
      log_scale_grid(cfg.num_scales, cfg.f_min_hz, cfg.f_max_hz, fs,
                     cfg.wavelet.morlet_center_frequency);

  Sample out;
  out.event_id = event_id;
  out.channels = TensorGrid({4, cfg.image_h, cfg.image_w});
  for (std::size_t c = 0; c < 4; ++c) {
    Waveform w = highpass(waveforms[c], cfg.highpass_cutoff_hz);
    w = dwt_denoise(w, cfg.wavelet);
    const Scalogram s = cwt(w, scales, cfg.wavelet);
    const TensorGrid img = scalogram_image(s, cfg.image_h, cfg.image_w);
    std::copy(img.data(), img.data() + img.size(),
              out.channels.data() + c * cfg.image_h * cfg.image_w);
  }
  out.label_x = event_x_mm / plate.width_mm;
  out.label_y = event_y_mm / plate.height_mm;
  if (out.label_x < 0.0 || out.label_x > 1.0 || out.label_y < 0.0 || out.label_y > 1.0)
    throw InputError("event position outside plate bounds");
  return out;
}

}  // namespace aeloc
