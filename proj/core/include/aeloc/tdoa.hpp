#ifndef AELOC_TDOA_HPP
#define AELOC_TDOA_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "aeloc/sim.hpp"

namespace aeloc {

struct ArrivalPick {
  std::size_t sensor_index = 0;
  double time_s = 0.0;
};

// One pairwise propagation-speed estimate, v = (l_i - l_j) / (t_i - t_j)
// with distances in mm and times in seconds, reported in m/s.
struct SpeedRecord {
  std::string event_id;
  std::size_t i = 0, j = 0;  // sensor indices, i < j
  double l_i_mm = 0.0, l_j_mm = 0.0;
  double t_i_s = 0.0, t_j_s = 0.0;
  double v_ms = 0.0;
};

struct SpeedStats {
  std::size_t n = 0;
  double mean_ms = 0.0;
  double std_dev_ms = 0.0;
  double std_error_ms = 0.0;
  double ci95_half_width_ms = 0.0;
};

struct SpeedEnumeration {
  std::vector<SpeedRecord> records;
  std::size_t degenerate_pairs = 0;  // t_i == t_j, excluded
  std::size_t pick_failures = 0;     // events skipped because a pick failed
};

// First sample whose magnitude exceeds k_sigma times the noise scale
// estimated from the leading 5% of samples. The estimate is floored at 1%
// of the waveform peak so the threshold stays meaningful on noiseless data;
// both terms scale with the waveform, so the pick is amplitude-invariant.
// Throws InputError when no sample crosses ("no arrival detected").
ArrivalPick pick_arrival(const Waveform& w, double k_sigma = 5.0, std::size_t sensor_index = 0);

// Eq. baseline speed in m/s from mm distances and second times.
// Throws InputError("degenerate pair") when t_i == t_j.
double pairwise_speed(double l_i_mm, double l_j_mm, double t_i_s, double t_j_s);

// All C(4,2)=6 sensor pairs for every train event in the manifest.
SpeedEnumeration enumerate_speeds(const DatasetManifest& manifest, double k_sigma = 5.0);

// Sample mean / std-dev (n-1), standard error and 1.96*SE half-width.
// Throws InputError when fewer than two records are given.
SpeedStats speed_stats(const std::vector<SpeedRecord>& records);
SpeedStats scalar_stats(const std::vector<double>& values);

}  // namespace aeloc

#endif  // AELOC_TDOA_HPP
