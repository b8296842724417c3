#include "aeloc/tdoa.hpp"

#include <algorithm>
#include <cmath>

#include "aeloc/errors.hpp"
#include "aeloc/io.hpp"

namespace aeloc {

ArrivalPick pick_arrival(const Waveform& w, double k_sigma, std::size_t sensor_index) {
  if (w.samples.empty()) throw InputError("no arrival detected: empty waveform");
  if (!(k_sigma > 0.0)) throw ConfigError("k_sigma must be positive");

  const std::size_t n = w.samples.size();
  const std::size_t lead = std::max<std::size_t>(1, n / 20);

  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < lead; ++i) {
    sum += w.samples[i];
    sum2 += w.samples[i] * w.samples[i];
  }
  const double mean = sum / static_cast<double>(lead);
  const double var = std::max(0.0, sum2 / static_cast<double>(lead) - mean * mean);
  const double noise_std = std::sqrt(var);

  double peak = 0.0;
  for (double v : w.samples) peak = std::max(peak, std::fabs(v));

  const double threshold = k_sigma * std::max(noise_std, 0.01 * peak);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(w.samples[i]) > threshold) {
      ArrivalPick p;
      p.sensor_index = sensor_index;
      p.time_s = static_cast<double>(i) / w.sample_rate_hz;
      return p;
    }
  }
  throw InputError("no arrival detected");
}

double pairwise_speed(double l_i_mm, double l_j_mm, double t_i_s, double t_j_s) {
  if (t_i_s == t_j_s) throw InputError("degenerate pair");
  return (l_i_mm - l_j_mm) * 1.0e-3 / (t_i_s - t_j_s);
}

SpeedEnumeration enumerate_speeds(const DatasetManifest& manifest, double k_sigma) {
  SpeedEnumeration out;
  for (const ManifestEvent* ev : manifest.split("train")) {
    std::array<double, 4> dist_mm;
    std::array<double, 4> t;
    bool picked = true;
    for (std::size_t s = 0; s < 4; ++s) {
      dist_mm[s] = std::hypot(manifest.layout.positions_mm[s][0] - ev->x_mm,
                              manifest.layout.positions_mm[s][1] - ev->y_mm);
      try {
        const Waveform w = read_waveform(ev->waveform_paths[s]);
        t[s] = pick_arrival(w, k_sigma, s).time_s;
      } catch (const InputError&) {
        picked = false;
        break;
      }
    }
    if (!picked) {
      ++out.pick_failures;
      continue;
    }
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i + 1; j < 4; ++j) {
        if (t[i] == t[j]) {
          ++out.degenerate_pairs;
          continue;
        }
        SpeedRecord r;
        r.event_id = ev->id;
        r.i = i;
        r.j = j;
        r.l_i_mm = dist_mm[i];
        r.l_j_mm = dist_mm[j];
        r.t_i_s = t[i];
        r.t_j_s = t[j];
        r.v_ms = pairwise_speed(dist_mm[i], dist_mm[j], t[i], t[j]);
        out.records.push_back(std::move(r));
      }
    }
  }
  return out;
}

SpeedStats scalar_stats(const std::vector<double>& values) {
  if (values.size() < 2) throw InputError("insufficient data: need n >= 2");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  SpeedStats s;
  s.n = values.size();
  s.mean_ms = mean;
  s.std_dev_ms = std::sqrt(ss / (n - 1.0));
  s.std_error_ms = s.std_dev_ms / std::sqrt(n);
  s.ci95_half_width_ms = 1.96 * s.std_error_ms;
  return s;
}

SpeedStats speed_stats(const std::vector<SpeedRecord>& records) {
  std::vector<double> v(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].v_ms;
  return scalar_stats(v);
}

}  // namespace aeloc
