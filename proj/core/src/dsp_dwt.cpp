#include <algorithm>
#include <cmath>
#include <vector>

#include "aeloc/dsp.hpp"
#include "aeloc/errors.hpp"

namespace aeloc {

namespace {

// Daubechies-4 orthonormal decomposition low-pass (8 taps, sums to sqrt 2).
constexpr int kTaps = 8;
constexpr double kDecLo[kTaps] = {
    -0.010597401784997278, 0.032883011666982945,  0.030841381835986965,
    -0.18703481171888114,  -0.027983769416983850, 0.63088076792959040,
    0.71484657055254150,   0.23037781330885523};

struct FilterBank {
  double lo[kTaps];
  double hi[kTaps];
  FilterBank() {
    for (int k = 0; k < kTaps; ++k) {
      lo[k] = kDecLo[k];
      // Quadrature mirror: hi[k] = (-1)^k lo[L-1-k].
      hi[k] = ((k % 2) == 0 ? 1.0 : -1.0) * kDecLo[kTaps - 1 - k];
    }
  }
};

const FilterBank& bank() {
  static const FilterBank fb;
  return fb;
}

// One periodized analysis step on an even-length signal.
void analyze(const std::vector<double>& x, std::vector<double>& approx,
             std::vector<double>& detail) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  const FilterBank& fb = bank();
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (int m = 0; m < kTaps; ++m) {
      const double v = x[(2 * k + static_cast<std::size_t>(m)) % n];
      a += fb.lo[m] * v;
      d += fb.hi[m] * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

// Transpose of `analyze`; exact inverse for an orthonormal bank.
std::vector<double> synthesize(const std::vector<double>& approx,
                               const std::vector<double>& detail) {
  const std::size_t half = approx.size();
  const std::size_t n = 2 * half;
  const FilterBank& fb = bank();
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    for (int m = 0; m < kTaps; ++m) {
      const std::size_t i = (2 * k + static_cast<std::size_t>(m)) % n;
      x[i] += fb.lo[m] * approx[k] + fb.hi[m] * detail[k];
    }
  }
  return x;
}

double median_abs(const std::vector<double>& v) {
  std::vector<double> m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m[i] = std::fabs(v[i]);
  std::sort(m.begin(), m.end());
  const std::size_t n = m.size();
  if (n == 0) return 0.0;
  return (n % 2 == 1) ? m[n / 2] : 0.5 * (m[n / 2 - 1] + m[n / 2]);
}

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

Dwt::Pyramid Dwt::forward(const std::vector<double>& x, std::size_t levels) {
  if (levels < 1) throw ConfigError("dwt_levels must be >= 1");
  if (x.size() < (std::size_t{1} << levels))
    throw ConfigError("signal too short for requested dwt levels");

  Pyramid p;
  std::vector<double> cur = x;
  for (std::size_t l = 0; l < levels; ++l) {
    p.level_lengths.push_back(cur.size());
    if (cur.size() % 2 == 1) cur.push_back(cur.back());  // pad to even
    std::vector<double> a, d;
    analyze(cur, a, d);
    p.details.push_back(std::move(d));
    cur = std::move(a);
  }
  p.approx = std::move(cur);
  return p;
}

std::vector<double> Dwt::inverse(const Pyramid& p) {
  std::vector<double> cur = p.approx;
  for (std::size_t l = p.details.size(); l-- > 0;) {
    cur = synthesize(cur, p.details[l]);
    cur.resize(p.level_lengths[l]);  // drop the even-length pad
  }
  return cur;
}

Waveform dwt_denoise(const Waveform& w, const WaveletSpec& spec, double threshold_override) {
  const std::size_t n = w.samples.size();
  if (n == 0) return w;
  Dwt::Pyramid p = Dwt::forward(w.samples, spec.dwt_levels);

  double threshold;
  if (threshold_override >= 0.0) {
    threshold = threshold_override;
  } else {
    // Universal threshold with the noise scale estimated from the finest
    // detail level: sigma = median(|d1|) / 0.6745.
    const double sigma = median_abs(p.details.front()) / 0.6745;
    threshold = sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
  }

  for (auto& level : p.details)
    for (double& v : level) v = soft(v, threshold);

  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples = Dwt::inverse(p);
  return out;
}

}  // namespace aeloc
