#include <algorithm>
#include <cmath>
#include <vector>

#include "aeloc/dsp.hpp"
#include "aeloc/errors.hpp"

namespace aeloc {

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;  // a0 normalized to 1

  // Direct form II transposed, state initialized to step steady-state on the
  // first sample so a constant leader produces no startup transient.
  void filt(std::vector<double>& x) const {
    if (x.empty()) return;
    const double h1 = (b0 + b1 + b2) / (1.0 + a1 + a2);  // DC gain
    double z1 = (h1 - b0) * x.front();
    double z2 = (b2 - a2 * h1) * x.front();
    for (double& v : x) {
      const double in = v;
      const double out = b0 * in + z1;
      z1 = b1 * in - a1 * out + z2;
      z2 = b2 * in - a2 * out;
      v = out;
    }
  }

  void filtfilt(std::vector<double>& x) const {
    filt(x);
    std::reverse(x.begin(), x.end());
    filt(x);
    std::reverse(x.begin(), x.end());
  }
};

// RBJ-style high-pass biquad at normalized cutoff w0 with quality factor q.
Biquad design_highpass(double w0, double q) {
  const double c = std::cos(w0);
  const double s = std::sin(w0);
  const double alpha = s / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad bq;
  bq.b0 = (1.0 + c) / 2.0 / a0;
  bq.b1 = -(1.0 + c) / a0;
  bq.b2 = (1.0 + c) / 2.0 / a0;
  bq.a1 = -2.0 * c / a0;
  bq.a2 = (1.0 - alpha) / a0;
  return bq;
}

}  // namespace

Waveform highpass(const Waveform& w, double cutoff_hz) {
  if (!(cutoff_hz > 0.0) || cutoff_hz >= w.sample_rate_hz / 2.0)
    throw ConfigError("high-pass cutoff must lie in (0, sample_rate/2)");

  // 4th-order Butterworth = cascade of two 2nd-order sections with
  // Q = 1/(2 cos(pi/8)) and 1/(2 cos(3 pi/8)).
  const double w0 = 2.0 * 3.14159265358979323846 * cutoff_hz / w.sample_rate_hz;
  const Biquad s1 = design_highpass(w0, 0.54119610014619698);
  const Biquad s2 = design_highpass(w0, 1.30656296487637652);

  Waveform out = w;
  s1.filtfilt(out.samples);
  s2.filtfilt(out.samples);
  return out;
}

}  // namespace aeloc
