#pragma once

// Raw binary volume/trace files and small CSV helpers.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chunktune/model.hpp"
#include "chunktune/rtm.hpp"

namespace chunktune {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void write_raw_f64(const std::string& path,
                          const std::vector<double>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<double> read_raw_f64(const std::string& path,
                                        std::size_t count) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open: " + path);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != count * sizeof(double))
    throw IoError("size mismatch: " + path + " has " + std::to_string(bytes) +
                  " bytes, expected " + std::to_string(count * sizeof(double)));
  in.seekg(0);
  std::vector<double> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("read failed: " + path);
  return data;
}

inline void write_seismogram(const std::string& path, const Seismogram& seis) {
  write_raw_f64(path, seis.traces);
}

inline Seismogram read_seismogram(const std::string& path, std::size_t nr,
                                  std::size_t ns) {
  Seismogram s(nr, ns);
  s.traces = read_raw_f64(path, nr * ns);
  return s;
}

// Raw float64 image plus a sidecar text metadata file.
inline void write_image(const std::string& raw_path,
                        const std::string& meta_path, const ImageVolume& image,
                        const Grid3& grid) {
  write_raw_f64(raw_path, image.values);
  std::ofstream meta(meta_path);
  if (!meta) throw IoError("cannot open for writing: " + meta_path);
  meta << "n1 " << image.n1 << "\n"
       << "n2 " << image.n2 << "\n"
       << "n3 " << image.n3 << "\n"
       << "dx1 " << grid.dx1 << "\n"
       << "dx2 " << grid.dx2 << "\n"
       << "dx3 " << grid.dx3 << "\n"
       << "shots " << image.shots << "\n"
       << "layout x3-fastest float64-le\n";
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir + ": " + ec.message());
}

}  // namespace chunktune
