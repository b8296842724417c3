// Independent reference implementations used as test oracles. These are
// deliberately written without reusing the production code paths: the CWT
// oracle evaluates the transform definition term by term, the convolution
// oracle is the plain six-loop form, and the EI oracle is a Monte Carlo
// estimate of the definition.
#ifndef AELOC_TESTS_ORACLES_HPP
#define AELOC_TESTS_ORACLES_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "aeloc/rng.hpp"
#include "aeloc/tensor.hpp"

namespace oracle {

// W(a, b) = (1/sqrt a) * sum_x conj(psi((x - b)/a)) f[x]
// psi(t) = pi^(-1/4) e^{i w0 t} e^{-t^2/2}; sum runs over every sample.
inline std::vector<std::vector<std::complex<double>>> cwt_brute_force(
    const std::vector<double>& f, const std::vector<double>& scales, double w0) {
  const std::size_t n = f.size();
  std::vector<std::vector<std::complex<double>>> out(scales.size());
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const double a = scales[s];
    out[s].resize(n);
    for (std::size_t b = 0; b < n; ++b) {
      std::complex<double> acc(0.0, 0.0);
      for (std::size_t x = 0; x < n; ++x) {
        const double u = (static_cast<double>(x) - static_cast<double>(b)) / a;
        const std::complex<double> psi =
            std::pow(3.14159265358979323846, -0.25) *
            std::exp(std::complex<double>(0.0, w0 * u)) * std::exp(-0.5 * u * u);
        acc += std::conj(psi) * f[x];
      }
      out[s][b] = acc / std::sqrt(a);
    }
  }
  return out;
}

// Plain six-loop cross-correlation with bias, zero padding.
inline aeloc::TensorGrid conv2d_naive(const aeloc::TensorGrid& x, const aeloc::TensorGrid& w,
                                      const aeloc::TensorGrid& bias, std::size_t stride,
                                      std::size_t pad) {
  const std::size_t B = x.extent(0), C = x.extent(1), H = x.extent(2), W = x.extent(3);
  const std::size_t CO = w.extent(0), K = w.extent(2);
  const std::size_t Ho = (H + 2 * pad - K) / stride + 1;
  const std::size_t Wo = (W + 2 * pad - K) / stride + 1;
  aeloc::TensorGrid y({B, CO, Ho, Wo});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t co = 0; co < CO; ++co)
      for (std::size_t oy = 0; oy < Ho; ++oy)
        for (std::size_t ox = 0; ox < Wo; ++ox) {
          double acc = bias[co];
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t ky = 0; ky < K; ++ky)
              for (std::size_t kx = 0; kx < K; ++kx) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                          static_cast<std::ptrdiff_t>(pad);
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                          static_cast<std::ptrdiff_t>(pad);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H) || ix < 0 ||
                    ix >= static_cast<std::ptrdiff_t>(W))
                  continue;
                acc += w[((co * C + c) * K + ky) * K + kx] *
                       x[((b * C + c) * H + static_cast<std::size_t>(iy)) * W +
                         static_cast<std::size_t>(ix)];
              }
          y[((b * CO + co) * Ho + oy) * Wo + ox] = acc;
        }
  return y;
}

// Monte Carlo estimate of E[max(f_best - N(mu, sigma^2) - xi, 0)].
inline double ei_monte_carlo(double mu, double sigma, double f_best, double xi,
                             std::size_t draws, std::uint64_t seed) {
  aeloc::Rng rng(seed);
  double acc = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double f = mu + sigma * rng.next_gaussian();
    acc += std::max(f_best - f - xi, 0.0);
  }
  return acc / static_cast<double>(draws);
}

// Largest |a-b| over the array divided by the largest |b|.
inline double rel_error_vs(const std::vector<std::vector<std::complex<double>>>& a,
                           const std::vector<std::vector<std::complex<double>>>& b) {
  double max_diff = 0.0, max_mag = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      max_diff = std::max(max_diff, std::abs(a[i][j] - b[i][j]));
      max_mag = std::max(max_mag, std::abs(b[i][j]));
    }
  return max_mag > 0.0 ? max_diff / max_mag : max_diff;
}

}  // namespace oracle

#endif  // AELOC_TESTS_ORACLES_HPP
