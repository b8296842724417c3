#ifndef AELOC_DSP_HPP
#define AELOC_DSP_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "aeloc/sim.hpp"
#include "aeloc/tensor.hpp"

namespace aeloc {

enum class WaveletFamily { morlet_cwt, daubechies4_dwt };

struct WaveletSpec {
  WaveletFamily family = WaveletFamily::morlet_cwt;
  // Morlet center frequency omega_0 in cycles (dimensionless).
  double morlet_center_frequency = 6.0;
  std::size_t dwt_levels = 4;
};

// Time-scale magnitude map of the CWT. Scales are dimensionless factors in
// sample units, strictly increasing (descending equivalent frequency);
// columns are the sample indices b.
struct Scalogram {
  std::vector<double> scales;
  TensorGrid magnitudes;  // (num_scales x num_times)

  std::size_t num_scales() const { return scales.size(); }
  std::size_t num_times() const {
    return magnitudes.rank() == 2 ? magnitudes.extent(1) : 0;
  }
};

// One unit of training data: four resized, per-channel min-max normalized
// scalogram images plus the normalized source coordinates.
struct Sample {
  TensorGrid channels;  // (4 x H x W), values in [0, 1]
  double label_x = 0.0;  // x / plate width, in [0, 1]
  double label_y = 0.0;
  std::string event_id;
};

// Zero-phase 4th-order Butterworth high-pass: two biquad sections applied
// forward then backward, each initialized to step steady state on its first
// sample so pulse-free leaders stay transient-free.
Waveform highpass(const Waveform& w, double cutoff_hz);

// Analysis/synthesis filter pair used by the denoiser (Daubechies-4,
// 8 coefficients). Exposed for the round-trip tests.
struct Dwt {
  // Multi-level forward transform with periodic boundary handling; odd
  // levels are padded to even length (pad value = last sample) and the pad
  // lengths recorded so the inverse is exact.
  struct Pyramid {
    std::vector<std::vector<double>> details;  // level 0 = finest
    std::vector<double> approx;
    std::vector<std::size_t> level_lengths;  // input length at each level
  };
  static Pyramid forward(const std::vector<double>& x, std::size_t levels);
  static std::vector<double> inverse(const Pyramid& p);
};

// Soft-threshold wavelet denoise. Universal threshold sigma*sqrt(2 ln N)
// per detail level with sigma = median(|d1|)/0.6745 estimated from the
// finest level. threshold_override >= 0 forces the threshold (0 gives the
// identity round trip).
Waveform dwt_denoise(const Waveform& w, const WaveletSpec& spec,
                     double threshold_override = -1.0);

// Complex CWT coefficients, Morlet mother wavelet
//   psi(t) = pi^(-1/4) exp(i w0 t) exp(-t^2 / 2),
// discretized as a direct sum over samples with 1/sqrt(a) normalization and
// zero padding beyond the signal. Row s, column b:
//   W[s][b] = (1/sqrt(a_s)) * sum_x conj(psi((x - b)/a_s)) f[x].
std::vector<std::vector<std::complex<double>>> cwt_complex(const std::vector<double>& samples,
                                                           const std::vector<double>& scales,
                                                           const WaveletSpec& spec);

// Magnitude scalogram of cwt_complex.
Scalogram cwt(const Waveform& w, const std::vector<double>& scales, const WaveletSpec& spec);

// Logarithmically spaced scale grid covering [f_min_hz, f_max_hz] equivalent
// frequency for the given sample rate, ascending scale (descending
// frequency): a = w0 * fs / (2 pi f).
std::vector<double> log_scale_grid(std::size_t count, double f_min_hz, double f_max_hz,
                                   double sample_rate_hz, double morlet_w0 = 6.0);

// Bilinear resize (corner-aligned) to H x W followed by min-max
// normalization to [0, 1]; constant input maps to all zeros.
TensorGrid scalogram_image(const Scalogram& s, std::size_t H, std::size_t W);

struct SampleConfig {
  double highpass_cutoff_hz = 1.0e3;
  WaveletSpec wavelet;
  std::size_t num_scales = 64;
  double f_min_hz = 10.0e3;
  double f_max_hz = 500.0e3;
  std::size_t image_h = 64;
  std::size_t image_w = 64;
};

// Full preprocessing chain for one event: per channel (fixed sensor order)
// highpass -> dwt_denoise -> cwt -> scalogram_image, label normalized by the
// plate dimensions.
Sample build_sample(const std::array<Waveform, 4>& waveforms, double event_x_mm,
                    double event_y_mm, const PlateSpec& plate, const SampleConfig& cfg,
                    const std::string& event_id = "");

}  // namespace aeloc

#endif  // AELOC_DSP_HPP
