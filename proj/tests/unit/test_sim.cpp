#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "aeloc/errors.hpp"
#include "aeloc/io.hpp"
#include "aeloc/rng.hpp"
#include "aeloc/sim.hpp"
#include "support/tmpdir.hpp"

using namespace aeloc;

namespace {

PlateSpec isotropic_plate() {
  PlateSpec p;
  p.anisotropy_ratio = 0.0;
  p.principal_angle_rad = 0.0;
  return p;
}

std::size_t peak_index(const Waveform& w) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < w.samples.size(); ++i)
    if (std::fabs(w.samples[i]) > std::fabs(w.samples[best])) best = i;
  return best;
}

}  // namespace

TEST_CASE("group velocity on the principal axis is the base speed") {
  PlateSpec p = isotropic_plate();
  p.anisotropy_ratio = 0.7;
  p.principal_angle_rad = 0.3;
  CHECK(group_velocity(0.3, p) == doctest::Approx(p.base_speed_ms).epsilon(1e-12));
}

TEST_CASE("isotropic limit ignores direction") {
  PlateSpec p = isotropic_plate();
  for (double theta : {0.0, 0.4, 1.0, 2.2, 3.0})
    CHECK(group_velocity(theta, p) == doctest::Approx(p.base_speed_ms).epsilon(1e-12));
}

TEST_CASE("perpendicular slow axis: 1000 * sqrt(1 - 0.36) = 800") {
  PlateSpec p = isotropic_plate();
  p.base_speed_ms = 1000.0;
  p.anisotropy_ratio = 0.36;
  p.principal_angle_rad = 0.5;
  CHECK(group_velocity(0.5 + 1.5707963267948966, p) == doctest::Approx(800.0).epsilon(1e-12));
}

TEST_CASE("group velocity is pi periodic and positive") {
  PlateSpec p = isotropic_plate();
  p.anisotropy_ratio = 0.6;
  p.principal_angle_rad = 0.9;
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double theta = rng.next_uniform(-10.0, 10.0);
    const double v = group_velocity(theta, p);
    CHECK(v > 0.0);
    CHECK(v <= p.base_speed_ms + 1e-12);
    CHECK(v == doctest::Approx(group_velocity(theta + 3.14159265358979323846, p)).epsilon(1e-9));
  }
}

TEST_CASE("centered event on an isotropic plate arrives simultaneously") {
  PlateSpec p = isotropic_plate();
  SensorLayout layout = SensorLayout::corners(p);
  SourceEvent ev;
  ev.x_mm = 150.0;
  ev.y_mm = 150.0;
  ev.seed = 5;
  const auto wf = synth_event(p, layout, ev, 0.0);
  const std::size_t k0 = peak_index(wf[0]);
  for (std::size_t s = 1; s < 4; ++s) CHECK(peak_index(wf[s]) == k0);
}

TEST_CASE("arrival times follow distance / speed on an isotropic plate") {
  PlateSpec p = isotropic_plate();
  SensorLayout layout = SensorLayout::corners(p);
  SourceEvent ev;
  ev.x_mm = 75.0;
  ev.y_mm = 150.0;
  ev.seed = 1;
  const auto wf = synth_event(p, layout, ev, 0.0);

  const double d0 = std::hypot(75.0, 150.0);    // sensor (0,0)
  const double d1 = std::hypot(225.0, 150.0);   // sensor (300,0)
  CHECK(d0 < d1);
  const double dt = 1.0 / p.sample_rate_hz;
  const double t0 = static_cast<double>(peak_index(wf[0])) * dt;
  const double t1 = static_cast<double>(peak_index(wf[1])) * dt;
  CHECK(t0 < t1);
  CHECK(std::fabs(t0 - d0 * 1e-3 / p.base_speed_ms) <= dt + 1e-12);
  CHECK(std::fabs(t1 - d1 * 1e-3 / p.base_speed_ms) <= dt + 1e-12);
  // Peak-time ratio tracks the distance ratio within the sample quantum.
  CHECK(t1 / t0 == doctest::Approx(d1 / d0).epsilon(2.0 * dt / (d0 * 1e-3 / p.base_speed_ms)));
}

TEST_CASE("same event and seed reproduce bit-identical waveforms") {
  PlateSpec p;  // anisotropic default
  SensorLayout layout = SensorLayout::corners(p);
  SourceEvent ev;
  ev.x_mm = 101.0;
  ev.y_mm = 77.0;
  ev.seed = 1234;
  const auto a = synth_event(p, layout, ev, 0.01);
  const auto b = synth_event(p, layout, ev, 0.01);
  for (std::size_t s = 0; s < 4; ++s) {
    REQUIRE(a[s].samples.size() == b[s].samples.size());
    for (std::size_t i = 0; i < a[s].samples.size(); ++i)
      CHECK(a[s].samples[i] == b[s].samples[i]);
  }
}

TEST_CASE("waveform energy decreases with distance") {
  PlateSpec p = isotropic_plate();
  SensorLayout layout = SensorLayout::corners(p);
  SourceEvent ev;
  ev.x_mm = 60.0;
  ev.y_mm = 55.0;
  ev.seed = 3;
  const auto wf = synth_event(p, layout, ev, 0.0);

  std::vector<std::pair<double, double>> dist_energy;
  for (std::size_t s = 0; s < 4; ++s) {
    const double d = std::hypot(layout.positions_mm[s][0] - ev.x_mm,
                                layout.positions_mm[s][1] - ev.y_mm);
    double e = 0.0;
    for (double v : wf[s].samples) e += v * v;
    dist_energy.emplace_back(d, e);
  }
  std::sort(dist_energy.begin(), dist_energy.end());
  for (std::size_t i = 1; i < dist_energy.size(); ++i)
    CHECK(dist_energy[i].second < dist_energy[i - 1].second);
}

TEST_CASE("arrival beyond the capture window is an error") {
  PlateSpec p = isotropic_plate();
  p.duration_s = 50.0e-6;  // max corner distance needs ~424 us at 1000 m/s
  SensorLayout layout = SensorLayout::corners(p);
  SourceEvent ev;
  ev.x_mm = 10.0;
  ev.y_mm = 10.0;
  CHECK_THROWS_AS(synth_event(p, layout, ev, 0.0), ConfigError);
}

TEST_CASE("event outside the plate is rejected") {
  PlateSpec p = isotropic_plate();
  SensorLayout layout = SensorLayout::corners(p);
  SourceEvent ev;
  ev.x_mm = -5.0;
  ev.y_mm = 10.0;
  CHECK_THROWS_AS(synth_event(p, layout, ev, 0.0), ConfigError);
}

TEST_CASE("grid is 9x7 at 20 mm pitch centered on the plate") {
  PlateSpec p;
  const auto pts = grid_points(p, 9, 7, 20.0);
  REQUIRE(pts.size() == 63);
  CHECK(pts.front()[0] == doctest::Approx(70.0));
  CHECK(pts.front()[1] == doctest::Approx(90.0));
  CHECK(pts.back()[0] == doctest::Approx(230.0));
  CHECK(pts.back()[1] == doctest::Approx(210.0));
}

TEST_CASE("grid exceeding the plate is a configuration error") {
  PlateSpec p;
  CHECK_THROWS_AS(grid_points(p, 9, 7, 40.0), ConfigError);
}

TEST_CASE("default dataset has 189 train and 15 validation events") {
  testutil::TmpDir tmp("sim");
  PlateSpec p;
  SensorLayout layout = SensorLayout::corners(p);
  GridDatasetConfig cfg;
  const DatasetManifest m = generate_grid_dataset(p, layout, cfg, 7, tmp.str(), 2);

  CHECK(m.split("train").size() == 189);
  CHECK(m.split("validation").size() == 15);
  CHECK(m.events.size() == 204);
  std::size_t files = 0;
  for (const auto& e : m.events)
    for (const auto& path : e.waveform_paths)
      if (std::filesystem::exists(std::filesystem::path(tmp.str()) / path)) ++files;
  CHECK(files == 204 * 4);
  // Validation points are inside the grid bounding box and off grid.
  for (const ManifestEvent* e : m.split("validation")) {
    CHECK(e->x_mm >= 70.0);
    CHECK(e->x_mm <= 230.0);
    CHECK(e->y_mm >= 90.0);
    CHECK(e->y_mm <= 210.0);
    double nearest = 1e30;
    for (const auto& gp : grid_points(p, 9, 7, 20.0))
      nearest = std::min(nearest, std::hypot(gp[0] - e->x_mm, gp[1] - e->y_mm));
    CHECK(nearest >= 2.0);
  }
}

TEST_CASE("single repeat gives 63 train events") {
  testutil::TmpDir tmp("sim");
  PlateSpec p;
  GridDatasetConfig cfg;
  cfg.repeats = 1;
  cfg.validation_count = 2;
  const auto m = generate_grid_dataset(p, SensorLayout::corners(p), cfg, 9, tmp.str());
  CHECK(m.split("train").size() == 63);
}

TEST_CASE("regeneration with one master seed is bit identical") {
  testutil::TmpDir ta("simA"), tb("simB");
  PlateSpec p;
  GridDatasetConfig cfg;
  cfg.grid_nx = 3;
  cfg.grid_ny = 3;
  cfg.repeats = 2;
  cfg.validation_count = 4;
  const auto ma = generate_grid_dataset(p, SensorLayout::corners(p), cfg, 21, ta.str(), 2);
  const auto mb = generate_grid_dataset(p, SensorLayout::corners(p), cfg, 21, tb.str(), 1);

  REQUIRE(ma.events.size() == mb.events.size());
  for (std::size_t i = 0; i < ma.events.size(); ++i) {
    CHECK(ma.events[i].id == mb.events[i].id);
    CHECK(ma.events[i].x_mm == mb.events[i].x_mm);
    CHECK(ma.events[i].y_mm == mb.events[i].y_mm);
    CHECK(ma.events[i].split == mb.events[i].split);
  }
  // Waveform files agree byte for byte.
  for (const auto& e : ma.events) {
    for (const auto& rel : e.waveform_paths) {
      std::ifstream fa(ta.str(rel), std::ios::binary);
      std::ifstream fb(tb.str(rel), std::ios::binary);
      const std::string ba((std::istreambuf_iterator<char>(fa)), {});
      const std::string bb((std::istreambuf_iterator<char>(fb)), {});
      CHECK(ba == bb);
    }
  }
}

TEST_CASE("manifest survives a write and read round trip") {
  testutil::TmpDir tmp("sim");
  PlateSpec p;
  GridDatasetConfig cfg;
  cfg.grid_nx = 3;
  cfg.grid_ny = 2;
  cfg.repeats = 1;
  cfg.validation_count = 2;
  const auto m = generate_grid_dataset(p, SensorLayout::corners(p), cfg, 5, tmp.str());
  write_manifest(m, tmp.str("manifest.txt"));
  const auto r = read_manifest(tmp.str("manifest.txt"));

  CHECK(r.plate.width_mm == m.plate.width_mm);
  CHECK(r.plate.anisotropy_ratio == m.plate.anisotropy_ratio);
  CHECK(r.noise_rms == m.noise_rms);
  CHECK(r.master_seed == m.master_seed);
  REQUIRE(r.events.size() == m.events.size());
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    CHECK(r.events[i].id == m.events[i].id);
    CHECK(r.events[i].x_mm == m.events[i].x_mm);
    CHECK(r.events[i].split == m.events[i].split);
    CHECK(std::filesystem::exists(r.events[i].waveform_paths[0]));
  }
}

TEST_CASE("manifest referencing a missing waveform is rejected") {
  testutil::TmpDir tmp("sim");
  std::ofstream os(tmp.str("bad.txt"));
  os << "plate.width_mm = 300\nplate.height_mm = 300\nplate.base_speed_ms = 1000\n"
     << "plate.anisotropy_ratio = 0\nplate.principal_angle_rad = 0\n"
     << "plate.attenuation_exponent = 1\nplate.sample_rate_hz = 1000000\n"
     << "plate.duration_s = 0.001\nnoise_rms = 0\nmaster_seed = 1\ngrid_spacing_mm = 20\n"
     << "sensor.0 = 0 0\nsensor.1 = 300 0\nsensor.2 = 0 300\nsensor.3 = 300 300\n"
     << "[events]\n"
     << "t0001 70 90 train wf/a.aewf wf/b.aewf wf/c.aewf wf/d.aewf\n";
  os.close();
  CHECK_THROWS_AS(read_manifest(tmp.str("bad.txt")), InputError);
}
