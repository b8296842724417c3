#include "aeloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "aeloc/errors.hpp"
#include "aeloc/io.hpp"
#include "aeloc/rng.hpp"

namespace fs = std::filesystem;

namespace aeloc {

namespace {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

void PlateSpec::validate() const {
  if (!(width_mm > 0.0) || !(height_mm > 0.0))
    throw ConfigError("plate dimensions must be positive");
  if (!(base_speed_ms > 0.0)) throw ConfigError("base_speed must be positive");
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate must be positive");
  if (!(duration_s > 0.0)) throw ConfigError("duration must be positive");
  if (anisotropy_ratio < 0.0 || anisotropy_ratio >= 1.0)
    throw ConfigError("anisotropy_ratio must lie in [0, 1)");
  if (attenuation_exponent < 0.0)
    throw ConfigError("attenuation_exponent must be >= 0");
}

std::size_t PlateSpec::sample_count() const {
  return static_cast<std::size_t>(std::llround(sample_rate_hz * duration_s));
}

SensorLayout SensorLayout::corners(const PlateSpec& plate) {
  SensorLayout l;
  l.positions_mm = {{{0.0, 0.0},
                     {plate.width_mm, 0.0},
                     {0.0, plate.height_mm},
                     {plate.width_mm, plate.height_mm}}};
  return l;
}

void SensorLayout::validate(const PlateSpec& plate) const {
  for (const auto& p : positions_mm) {
    if (p[0] < 0.0 || p[0] > plate.width_mm || p[1] < 0.0 || p[1] > plate.height_mm)
      throw ConfigError("sensor position outside plate bounds");
  }
}

std::vector<const ManifestEvent*> DatasetManifest::split(const std::string& tag) const {
  std::vector<const ManifestEvent*> out;
  for (const auto& e : events)
    if (e.split == tag) out.push_back(&e);
  return out;
}

double group_velocity(double theta_rad, const PlateSpec& plate) {
  const double s = std::sin(theta_rad - plate.principal_angle_rad);
  return plate.base_speed_ms * std::sqrt(1.0 - plate.anisotropy_ratio * s * s);
}

std::array<Waveform, 4> synth_event(const PlateSpec& plate, const SensorLayout& layout,
                                    const SourceEvent& event, double noise_rms) {
  plate.validate();
  layout.validate(plate);
  if (noise_rms < 0.0) throw ConfigError("noise_rms must be >= 0");
  if (event.x_mm <= 0.0 || event.x_mm >= plate.width_mm || event.y_mm <= 0.0 ||
      event.y_mm >= plate.height_mm)
    throw ConfigError("source event must lie strictly inside the plate");
  if (!(event.amplitude > 0.0)) throw ConfigError("event amplitude must be positive");
  if (!(event.pulse_width_s > 0.0)) throw ConfigError("pulse width must be positive");

  const std::size_t n = plate.sample_count();
  const double sigma = event.pulse_width_s / 6.0;

  std::array<Waveform, 4> out;
  for (std::size_t s_idx = 0; s_idx < 4; ++s_idx) {
    const double dx = layout.positions_mm[s_idx][0] - event.x_mm;
    const double dy = layout.positions_mm[s_idx][1] - event.y_mm;
    const double dist_mm = std::hypot(dx, dy);
    const double theta = std::atan2(dy, dx);
    const double v = group_velocity(theta, plate);
    const double t_arr = dist_mm * 1.0e-3 / v;
    if (t_arr >= plate.duration_s)
      throw ConfigError("event arrives after capture window");

    const double amp = event.amplitude / std::pow(std::max(dist_mm, 1.0),
                                                  plate.attenuation_exponent);

    Waveform& w = out[s_idx];
    w.sample_rate_hz = plate.sample_rate_hz;
    w.samples.assign(n, 0.0);

    // Pulse support clipped to +-8 sigma around the arrival.
    const double dt = 1.0 / plate.sample_rate_hz;
    const std::ptrdiff_t k_lo =
        std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor((t_arr - 8.0 * sigma) / dt)));
    const std::ptrdiff_t k_hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1,
                                 static_cast<std::ptrdiff_t>(std::ceil((t_arr + 8.0 * sigma) / dt)));
    for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) {
      const double d = static_cast<double>(k) * dt - t_arr;
      w.samples[static_cast<std::size_t>(k)] =
          amp * std::exp(-d * d / (2.0 * sigma * sigma)) * std::cos(kTwoPi * event.center_frequency_hz * d);
    }

    if (noise_rms > 0.0) {
      Rng rng(mix_seed(event.seed, s_idx));
      for (std::size_t k = 0; k < n; ++k)
        w.samples[k] += noise_rms * rng.next_gaussian();
    }
  }
  return out;
}

std::vector<std::array<double, 2>> grid_points(const PlateSpec& plate, std::size_t nx,
                                               std::size_t ny, double spacing_mm) {
  if (nx < 1 || ny < 1) throw ConfigError("grid must have at least one point per axis");
  const double span_x = static_cast<double>(nx - 1) * spacing_mm;
  const double span_y = static_cast<double>(ny - 1) * spacing_mm;
  const double x0 = (plate.width_mm - span_x) / 2.0;
  const double y0 = (plate.height_mm - span_y) / 2.0;
  if (x0 <= 0.0 || y0 <= 0.0 || x0 + span_x >= plate.width_mm || y0 + span_y >= plate.height_mm)
    throw ConfigError("configuration error: grid exceeds plate bounds");

  std::vector<std::array<double, 2>> pts;
  pts.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      pts.push_back({x0 + static_cast<double>(i) * spacing_mm,
                     y0 + static_cast<double>(j) * spacing_mm});
  return pts;
}

double weakest_grid_peak(const PlateSpec& plate, const SensorLayout& layout,
                         const GridDatasetConfig& cfg) {
  const auto pts = grid_points(plate, cfg.grid_nx, cfg.grid_ny, cfg.grid_spacing_mm);
  double d_max = 0.0;
  for (const auto& p : pts)
    for (const auto& s : layout.positions_mm)
      d_max = std::max(d_max, std::hypot(s[0] - p[0], s[1] - p[1]));
  return cfg.amplitude / std::pow(std::max(d_max, 1.0), plate.attenuation_exponent);
}

DatasetManifest generate_grid_dataset(const PlateSpec& plate, const SensorLayout& layout,
                                      const GridDatasetConfig& cfg, std::uint64_t master_seed,
                                      const std::string& out_dir, std::size_t threads) {
  plate.validate();
  layout.validate(plate);
  const auto pts = grid_points(plate, cfg.grid_nx, cfg.grid_ny, cfg.grid_spacing_mm);

  const double noise_rms =
      cfg.noise_rms >= 0.0 ? cfg.noise_rms : 0.02 * weakest_grid_peak(plate, layout, cfg);

  DatasetManifest manifest;
  manifest.plate = plate;
  manifest.layout = layout;
  manifest.noise_rms = noise_rms;
  manifest.master_seed = master_seed;
  manifest.grid_spacing_mm = cfg.grid_spacing_mm;

  std::size_t ordinal = 0;
  for (const auto& p : pts) {
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      ManifestEvent ev;
      char id[16];
      std::snprintf(id, sizeof(id), "t%04zu", ++ordinal);
      ev.id = id;
      ev.x_mm = p[0];
      ev.y_mm = p[1];
      ev.split = "train";
      manifest.events.push_back(ev);
    }
  }

  // Validation events: uniform in the grid bounding box, kept at least 2 mm
  // away from every grid node so they are genuinely off-grid.
  {
    const double x_lo = pts.front()[0], y_lo = pts.front()[1];
    const double x_hi = pts.back()[0], y_hi = pts.back()[1];
    Rng rng(mix_seed(master_seed, hash_string("validation-positions")));
    std::size_t v_ordinal = 0;
    while (v_ordinal < cfg.validation_count) {
      const double x = rng.next_uniform(x_lo, x_hi);
      const double y = rng.next_uniform(y_lo, y_hi);
      double nearest = 1.0e30;
      for (const auto& p : pts) nearest = std::min(nearest, std::hypot(p[0] - x, p[1] - y));
      if (nearest < 2.0) continue;
      ManifestEvent ev;
      char id[16];
      std::snprintf(id, sizeof(id), "v%04zu", ++v_ordinal);
      ev.id = id;
      ev.x_mm = x;
      ev.y_mm = y;
      ev.split = "validation";
      manifest.events.push_back(ev);
    }
  }

  fs::create_directories(fs::path(out_dir) / "wf");
  for (auto& ev : manifest.events)
    for (std::size_t s = 0; s < 4; ++s)
      ev.waveform_paths[s] = "wf/" + ev.id + "_s" + std::to_string(s) + ".aewf";

  // Per-event seeds derive from the master seed and the event id, so the
  // result does not depend on which thread synthesizes which event.
  auto synth_one = [&](const ManifestEvent& ev) {
    SourceEvent src;
    src.x_mm = ev.x_mm;
    src.y_mm = ev.y_mm;
    src.amplitude = cfg.amplitude;
    src.center_frequency_hz = cfg.center_frequency_hz;
    src.pulse_width_s = cfg.pulse_width_s;
    src.seed = mix_seed(master_seed, hash_string(ev.id.c_str()));
    const auto waveforms = synth_event(plate, layout, src, noise_rms);
    for (std::size_t s = 0; s < 4; ++s)
      write_waveform(waveforms[s], (fs::path(out_dir) / ev.waveform_paths[s]).string());
  };

  const std::size_t n_threads = std::max<std::size_t>(1, threads);
  if (n_threads == 1) {
    for (const auto& ev : manifest.events) synth_one(ev);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= manifest.events.size()) return;
          synth_one(manifest.events[i]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  return manifest;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open manifest for writing: " + path);
  os << "# aeloc dataset manifest v1\n";
  os << "plate.width_mm = " << fmt_g17(m.plate.width_mm) << "\n";
  os << "plate.height_mm = " << fmt_g17(m.plate.height_mm) << "\n";
  os << "plate.base_speed_ms = " << fmt_g17(m.plate.base_speed_ms) << "\n";
  os << "plate.anisotropy_ratio = " << fmt_g17(m.plate.anisotropy_ratio) << "\n";
  os << "plate.principal_angle_rad = " << fmt_g17(m.plate.principal_angle_rad) << "\n";
  os << "plate.attenuation_exponent = " << fmt_g17(m.plate.attenuation_exponent) << "\n";
  os << "plate.sample_rate_hz = " << fmt_g17(m.plate.sample_rate_hz) << "\n";
  os << "plate.duration_s = " << fmt_g17(m.plate.duration_s) << "\n";
  os << "noise_rms = " << fmt_g17(m.noise_rms) << "\n";
  os << "master_seed = " << m.master_seed << "\n";
  os << "grid_spacing_mm = " << fmt_g17(m.grid_spacing_mm) << "\n";
  for (std::size_t s = 0; s < 4; ++s)
    os << "sensor." << s << " = " << fmt_g17(m.layout.positions_mm[s][0]) << " "
       << fmt_g17(m.layout.positions_mm[s][1]) << "\n";
  os << "[events]\n";
  os << "# id x_mm y_mm split wf0 wf1 wf2 wf3\n";
  for (const auto& e : m.events) {
    os << e.id << " " << fmt_g17(e.x_mm) << " " << fmt_g17(e.y_mm) << " " << e.split;
    for (const auto& p : e.waveform_paths) os << " " << p;
    os << "\n";
  }
  if (!os) throw InputError("failed writing manifest: " + path);
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open manifest: " + path);
  const fs::path base = fs::path(path).parent_path();

  DatasetManifest m;
  std::string line;
  bool in_events = false;
  std::vector<std::string> seen_ids;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line == "[events]") {
      in_events = true;
      continue;
    }
    if (!in_events) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw InputError("malformed manifest line: " + line);
      std::string key = line.substr(0, eq);
      std::string val = line.substr(eq + 1);
      auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
      };
      trim(key);
      trim(val);
      std::istringstream vs(val);
      if (key == "plate.width_mm") vs >> m.plate.width_mm;
      else if (key == "plate.height_mm") vs >> m.plate.height_mm;
      else if (key == "plate.base_speed_ms") vs >> m.plate.base_speed_ms;
      else if (key == "plate.anisotropy_ratio") vs >> m.plate.anisotropy_ratio;
      else if (key == "plate.principal_angle_rad") vs >> m.plate.principal_angle_rad;
      else if (key == "plate.attenuation_exponent") vs >> m.plate.attenuation_exponent;
      else if (key == "plate.sample_rate_hz") vs >> m.plate.sample_rate_hz;
      else if (key == "plate.duration_s") vs >> m.plate.duration_s;
      else if (key == "noise_rms") vs >> m.noise_rms;
      else if (key == "master_seed") vs >> m.master_seed;
      else if (key == "grid_spacing_mm") vs >> m.grid_spacing_mm;
      else if (key.rfind("sensor.", 0) == 0) {
        const std::size_t idx = static_cast<std::size_t>(std::stoul(key.substr(7)));
        if (idx >= 4) throw InputError("manifest sensor index out of range");
        vs >> m.layout.positions_mm[idx][0] >> m.layout.positions_mm[idx][1];
      } else {
        throw InputError("unknown manifest key: " + key);
      }
      if (vs.fail()) throw InputError("malformed manifest value for " + key);
    } else {
      std::istringstream ls(line);
      ManifestEvent ev;
      ls >> ev.id >> ev.x_mm >> ev.y_mm >> ev.split;
      for (auto& p : ev.waveform_paths) ls >> p;
      if (ls.fail()) throw InputError("malformed manifest event line: " + line);
      if (ev.split != "train" && ev.split != "validation")
        throw InputError("unknown split tag: " + ev.split);
      for (auto& p : ev.waveform_paths) {
        const fs::path resolved = base / p;
        if (!fs::exists(resolved))
          throw InputError("manifest references missing waveform: " + resolved.string());
        p = resolved.string();
      }
      seen_ids.push_back(ev.id);
      m.events.push_back(std::move(ev));
    }
  }
  std::sort(seen_ids.begin(), seen_ids.end());
  if (std::adjacent_find(seen_ids.begin(), seen_ids.end()) != seen_ids.end())
    throw InputError("duplicate event id in manifest");
  m.plate.validate();
  m.layout.validate(m.plate);
  return m;
}

}  // namespace aeloc
