#ifndef AELOC_SIM_HPP
#define AELOC_SIM_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace aeloc {

// Plate geometry and the wave model used by the synthetic source. Group
// speed follows an elliptical law: fast along the principal axis, slowed by
// anisotropy_ratio perpendicular to it. attenuation_exponent controls the
// 1/r^p amplitude decay with distance.
struct PlateSpec {
  double width_mm = 300.0;
  double height_mm = 300.0;
  double base_speed_ms = 1000.0;
  double anisotropy_ratio = 0.4;
  double principal_angle_rad = 0.5235987755982988;  // 30 deg
  double attenuation_exponent = 1.0;
  double sample_rate_hz = 1.0e6;
  double duration_s = 1.0e-3;

  void validate() const;
  std::size_t sample_count() const;
};

// Sensor positions in plate coordinates (mm). Exactly four sensors.
struct SensorLayout {
  std::array<std::array<double, 2>, 4> positions_mm;

  // Sensors at the four plate corners, the default placement.
  static SensorLayout corners(const PlateSpec& plate);
  void validate(const PlateSpec& plate) const;
};

// One simulated emission: a Gabor pulse (Gaussian-windowed cosine) released
// at (x, y). pulse_width_s is the full effective envelope duration; the
// Gaussian sigma is pulse_width_s / 6.
struct SourceEvent {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double amplitude = 1.0;
  double center_frequency_hz = 100.0e3;
  double pulse_width_s = 60.0e-6;
  std::uint64_t seed = 0;
};

// One sensor channel: sample rate plus ordered real samples.
struct Waveform {
  double sample_rate_hz = 0.0;
  std::vector<double> samples;

  double duration_s() const {
    return sample_rate_hz > 0.0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

struct ManifestEvent {
  std::string id;
  double x_mm = 0.0;
  double y_mm = 0.0;
  std::string split;  // "train" | "validation"
  std::array<std::string, 4> waveform_paths;
};

struct DatasetManifest {
  PlateSpec plate;
  SensorLayout layout;
  double noise_rms = 0.0;
  std::uint64_t master_seed = 0;
  double grid_spacing_mm = 20.0;
  std::vector<ManifestEvent> events;

  std::vector<const ManifestEvent*> split(const std::string& tag) const;
};

// Direction-dependent group speed, m/s. Elliptical law
//   v(theta) = base_speed * sqrt(1 - ratio * sin^2(theta - principal_angle)),
// periodic in pi, equal to base_speed on the principal axis.
double group_velocity(double theta_rad, const PlateSpec& plate);

// Synthesize the four sensor waveforms for one event. Arrival at sensor i is
// dist_i / group_velocity(theta_i); the pulse is scaled by
// amplitude / max(dist_i, 1 mm)^attenuation_exponent and white Gaussian
// noise of RMS noise_rms is added. Deterministic given event.seed.
// Throws ConfigError if an arrival falls beyond the capture window.
std::array<Waveform, 4> synth_event(const PlateSpec& plate, const SensorLayout& layout,
                                    const SourceEvent& event, double noise_rms);

struct GridDatasetConfig {
  std::size_t grid_nx = 9;
  std::size_t grid_ny = 7;
  std::size_t repeats = 3;
  double grid_spacing_mm = 20.0;
  std::size_t validation_count = 15;
  double amplitude = 1.0;
  double center_frequency_hz = 100.0e3;
  double pulse_width_s = 60.0e-6;
  // Negative means "use the default": 2% of the weakest noiseless peak over
  // all (grid point, sensor) pairs.
  double noise_rms = -1.0;
};

// Noiseless peak amplitude observed at the worst (grid point, sensor) pair;
// the reference for the default noise level.
double weakest_grid_peak(const PlateSpec& plate, const SensorLayout& layout,
                         const GridDatasetConfig& cfg);

// Generate the full grid dataset: grid_nx x grid_ny points at
// grid_spacing_mm pitch centered on the plate, `repeats` events per point
// (split "train"), plus validation_count off-grid events inside the grid
// bounding box (split "validation"). Waveforms are written under
// out_dir/wf/, the manifest is returned (not yet written to disk).
// Deterministic given master_seed, independent of generation order.
DatasetManifest generate_grid_dataset(const PlateSpec& plate, const SensorLayout& layout,
                                      const GridDatasetConfig& cfg, std::uint64_t master_seed,
                                      const std::string& out_dir, std::size_t threads = 1);

// Grid node coordinates for a centered nx x ny grid; throws ConfigError when
// the grid does not fit strictly inside the plate.
std::vector<std::array<double, 2>> grid_points(const PlateSpec& plate, std::size_t nx,
                                               std::size_t ny, double spacing_mm);

void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

}  // namespace aeloc

#endif  // AELOC_SIM_HPP
