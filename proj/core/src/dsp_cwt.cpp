#include <cmath>
#include <complex>
#include <vector>

#include "aeloc/dsp.hpp"
#include "aeloc/errors.hpp"

namespace aeloc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInvQuartRootPi = 0.75112554446494251;  // pi^(-1/4)

// Kernel taps conj(psi(j/a))/sqrt(a) for j in [-L, L]. The Gaussian envelope
// is below 1.3e-14 outside |j/a| > 8, so the truncation is invisible at the
// oracle tolerance.
struct ScaleKernel {
  std::ptrdiff_t half;
  std::vector<double> re;
  std::vector<double> im;
};

ScaleKernel make_kernel(double a, double w0, std::size_t n) {
  ScaleKernel k;
  const std::ptrdiff_t lim = static_cast<std::ptrdiff_t>(std::ceil(8.0 * a));
  k.half = std::min<std::ptrdiff_t>(lim, static_cast<std::ptrdiff_t>(n) - 1);
  const std::size_t len = static_cast<std::size_t>(2 * k.half + 1);
  k.re.resize(len);
  k.im.resize(len);
  const double norm = kInvQuartRootPi / std::sqrt(a);
  for (std::ptrdiff_t j = -k.half; j <= k.half; ++j) {
    const double u = static_cast<double>(j) / a;
    const double env = norm * std::exp(-0.5 * u * u);
    k.re[static_cast<std::size_t>(j + k.half)] = env * std::cos(w0 * u);
    k.im[static_cast<std::size_t>(j + k.half)] = -env * std::sin(w0 * u);
  }
  return k;
}

}  // namespace

std::vector<std::vector<std::complex<double>>> cwt_complex(const std::vector<double>& samples,
                                                           const std::vector<double>& scales,
                                                           const WaveletSpec& spec) {
  if (scales.empty()) throw ConfigError("scale list must be nonempty");
  for (double a : scales)
    if (!(a > 0.0)) throw ConfigError("scales must be positive");

  const std::size_t n = samples.size();
  const double w0 = spec.morlet_center_frequency;
  std::vector<std::vector<std::complex<double>>> out(scales.size());

  for (std::size_t s = 0; s < scales.size(); ++s) {
    const ScaleKernel k = make_kernel(scales[s], w0, n);
    auto& row = out[s];
    row.assign(n, {0.0, 0.0});
    for (std::size_t b = 0; b < n; ++b) {
      // Zero padding: taps outside [0, n) contribute nothing.
      const std::ptrdiff_t jb = static_cast<std::ptrdiff_t>(b);
      const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(-k.half, -jb);
      const std::ptrdiff_t j_hi =
          std::min<std::ptrdiff_t>(k.half, static_cast<std::ptrdiff_t>(n) - 1 - jb);
      double acc_re = 0.0, acc_im = 0.0;
      const double* f = samples.data() + (jb + j_lo);
      const double* kr = k.re.data() + (j_lo + k.half);
      const double* ki = k.im.data() + (j_lo + k.half);
      const std::size_t len = static_cast<std::size_t>(j_hi - j_lo + 1);
      for (std::size_t t = 0; t < len; ++t) {
        acc_re += kr[t] * f[t];
        acc_im += ki[t] * f[t];
      }
      row[b] = {acc_re, acc_im};
    }
  }
  return out;
}

Scalogram cwt(const Waveform& w, const std::vector<double>& scales, const WaveletSpec& spec) {
  const auto coeff = cwt_complex(w.samples, scales, spec);
  Scalogram s;
  s.scales = scales;
  s.magnitudes = TensorGrid({scales.size(), w.samples.size()});
  for (std::size_t i = 0; i < coeff.size(); ++i)
    for (std::size_t b = 0; b < coeff[i].size(); ++b)
      s.magnitudes.at2(i, b) = std::abs(coeff[i][b]);
  return s;
}

std::vector<double> log_scale_grid(std::size_t count, double f_min_hz, double f_max_hz,
                                   double sample_rate_hz, double morlet_w0) {
  if (count < 1) throw ConfigError("scale grid needs at least one scale");
  if (!(f_min_hz > 0.0) || !(f_max_hz > f_min_hz))
    throw ConfigError("scale grid frequency band must satisfy 0 < f_min < f_max");
  const double a_min = morlet_w0 * sample_rate_hz / (2.0 * kPi * f_max_hz);
  const double a_max = morlet_w0 * sample_rate_hz / (2.0 * kPi * f_min_hz);
  std::vector<double> scales(count);
  if (count == 1) {
    scales[0] = a_min;
    return scales;
  }
  const double step = std::log(a_max / a_min) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    scales[i] = a_min * std::exp(step * static_cast<double>(i));
  return scales;
}

}  // namespace aeloc
