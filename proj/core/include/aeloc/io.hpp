#ifndef AELOC_IO_HPP
#define AELOC_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "aeloc/dsp.hpp"
#include "aeloc/sim.hpp"

namespace aeloc {

// Waveform file: little-endian, magic "AEWF", u32 version=1, f64 sample
// rate, u64 count, then count f32 samples.
void write_waveform(const Waveform& w, const std::string& path);
Waveform read_waveform(const std::string& path);

// Sample cache file: little-endian, magic "AESM", u32 version=1, u32 H,
// u32 W, f32 label_x, f32 label_y, then 4*H*W f32 channel values, row-major,
// channel-major.
void write_sample(const Sample& s, const std::string& path);
Sample read_sample(const std::string& path);

namespace detail {

void put_u16(std::ostream& os, std::uint16_t v);
void put_u32(std::ostream& os, std::uint32_t v);
void put_u64(std::ostream& os, std::uint64_t v);
void put_f32(std::ostream& os, float v);
void put_f64(std::ostream& os, double v);

std::uint16_t get_u16(std::istream& is);
std::uint32_t get_u32(std::istream& is);
std::uint64_t get_u64(std::istream& is);
float get_f32(std::istream& is);
double get_f64(std::istream& is);

void expect_magic(std::istream& is, const char magic[4], const std::string& what);

}  // namespace detail

}  // namespace aeloc

#endif  // AELOC_IO_HPP
