#include "doctest.h"

#include <fstream>

#include "aeloc/errors.hpp"
#include "aeloc/io.hpp"
#include "support/tmpdir.hpp"

using namespace aeloc;

TEST_CASE("waveform file round trip at f32 precision") {
  testutil::TmpDir tmp("io");
  Waveform w;
  w.sample_rate_hz = 1.0e6;
  for (int i = 0; i < 257; ++i) w.samples.push_back(std::sin(0.1 * i) * 1.5);

  write_waveform(w, tmp.str("a.aewf"));
  const Waveform r = read_waveform(tmp.str("a.aewf"));
  CHECK(r.sample_rate_hz == w.sample_rate_hz);
  REQUIRE(r.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < r.samples.size(); ++i)
    CHECK(r.samples[i] == doctest::Approx(w.samples[i]).epsilon(1e-7));
  // f32 storage is exact under a second round trip.
  write_waveform(r, tmp.str("b.aewf"));
  const Waveform r2 = read_waveform(tmp.str("b.aewf"));
  for (std::size_t i = 0; i < r.samples.size(); ++i) CHECK(r2.samples[i] == r.samples[i]);
}

TEST_CASE("sample file round trip") {
  testutil::TmpDir tmp("io");
  Sample s;
  s.channels = TensorGrid({4, 3, 5});
  for (std::size_t i = 0; i < s.channels.size(); ++i)
    s.channels[i] = static_cast<double>(i % 7) / 8.0;
  s.label_x = 0.25;
  s.label_y = 0.75;

  write_sample(s, tmp.str("s.aesm"));
  const Sample r = read_sample(tmp.str("s.aesm"));
  CHECK(r.channels.shape() == s.channels.shape());
  CHECK(r.label_x == doctest::Approx(0.25));
  CHECK(r.label_y == doctest::Approx(0.75));
  for (std::size_t i = 0; i < r.channels.size(); ++i)
    CHECK(r.channels[i] == doctest::Approx(s.channels[i]).epsilon(1e-7));
}

TEST_CASE("bad magic is rejected") {
  testutil::TmpDir tmp("io");
  std::ofstream os(tmp.str("junk.aewf"), std::ios::binary);
  os << "NOPE then some bytes";
  os.close();
  CHECK_THROWS_AS(read_waveform(tmp.str("junk.aewf")), InputError);
  CHECK_THROWS_AS(read_sample(tmp.str("junk.aewf")), InputError);
}

TEST_CASE("missing file is rejected") {
  CHECK_THROWS_AS(read_waveform("/nonexistent/path.aewf"), InputError);
}
