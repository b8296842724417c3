#include "aeloc/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "aeloc/errors.hpp"

namespace aeloc {
namespace detail {

namespace {

template <typename T>
void put_le(std::ostream& os, T v) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  is.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!is) throw InputError("unexpected end of binary file");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void put_u16(std::ostream& os, std::uint16_t v) { put_le<std::uint16_t>(os, v); }
void put_u32(std::ostream& os, std::uint32_t v) { put_le<std::uint32_t>(os, v); }
void put_u64(std::ostream& os, std::uint64_t v) { put_le<std::uint64_t>(os, v); }
void put_f32(std::ostream& os, float v) { put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::ostream& os, double v) { put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v)); }

std::uint16_t get_u16(std::istream& is) { return get_le<std::uint16_t>(is); }
std::uint32_t get_u32(std::istream& is) { return get_le<std::uint32_t>(is); }
std::uint64_t get_u64(std::istream& is) { return get_le<std::uint64_t>(is); }
float get_f32(std::istream& is) { return std::bit_cast<float>(get_le<std::uint32_t>(is)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

void expect_magic(std::istream& is, const char magic[4], const std::string& what) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw InputError("bad magic, not a " + what + " file");
}

}  // namespace detail

using namespace detail;

void write_waveform(const Waveform& w, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open waveform file for writing: " + path);
  os.write("AEWF", 4);
  put_u32(os, 1);
  put_f64(os, w.sample_rate_hz);
  put_u64(os, w.samples.size());
  for (double s : w.samples) put_f32(os, static_cast<float>(s));
  if (!os) throw InputError("failed writing waveform: " + path);
}

Waveform read_waveform(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open waveform file: " + path);
  expect_magic(is, "AEWF", "waveform");
  const std::uint32_t version = get_u32(is);
  if (version != 1) throw InputError("unsupported waveform version");
  Waveform w;
  w.sample_rate_hz = get_f64(is);
  const std::uint64_t count = get_u64(is);
  w.samples.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) w.samples[i] = get_f32(is);
  return w;
}

void write_sample(const Sample& s, const std::string& path) {
  if (s.channels.rank() != 3 || s.channels.extent(0) != 4)
    throw InputError("sample channels must have shape (4 x H x W)");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open sample file for writing: " + path);
  os.write("AESM", 4);
  put_u32(os, 1);
  put_u32(os, static_cast<std::uint32_t>(s.channels.extent(1)));
  put_u32(os, static_cast<std::uint32_t>(s.channels.extent(2)));
  put_f32(os, static_cast<float>(s.label_x));
  put_f32(os, static_cast<float>(s.label_y));
  for (std::size_t i = 0; i < s.channels.size(); ++i)
    put_f32(os, static_cast<float>(s.channels[i]));
  if (!os) throw InputError("failed writing sample: " + path);
}

Sample read_sample(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open sample file: " + path);
  expect_magic(is, "AESM", "sample");
  const std::uint32_t version = get_u32(is);
  if (version != 1) throw InputError("unsupported sample version");
  const std::size_t H = get_u32(is);
  const std::size_t W = get_u32(is);
  Sample s;
  s.label_x = get_f32(is);
  s.label_y = get_f32(is);
  s.channels = TensorGrid({4, H, W});
  for (std::size_t i = 0; i < s.channels.size(); ++i) s.channels[i] = get_f32(is);
  return s;
}

}  // namespace aeloc
