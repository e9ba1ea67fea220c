#pragma once

// Grids, velocity models, acquisition geometry, the Ricker source wavelet
// and the numerical dispersion/stability checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace chunktune {

// 3D grid of n1 x n2 x n3 interior points (x3 the vertical, fastest-varying
// dimension) padded by an absorbing border of wb points on all six faces.
struct Grid3 {
  std::size_t n1 = 1, n2 = 1, n3 = 1;
  double dx1 = 1.0, dx2 = 1.0, dx3 = 1.0;
  std::size_t wb = 0;

  Grid3() = default;
  Grid3(std::size_t n1_, std::size_t n2_, std::size_t n3_, double dx1_,
        double dx2_, double dx3_, std::size_t wb_)
      : n1(n1_), n2(n2_), n3(n3_), dx1(dx1_), dx2(dx2_), dx3(dx3_), wb(wb_) {
    if (n1 < 1 || n2 < 1 || n3 < 1)
      throw std::invalid_argument("grid counts must be >= 1");
    if (!(dx1 > 0.0) || !(dx2 > 0.0) || !(dx3 > 0.0))
      throw std::invalid_argument("grid spacings must be > 0");
  }

  std::size_t t1() const { return n1 + 2 * wb; }
  std::size_t t2() const { return n2 + 2 * wb; }
  std::size_t t3() const { return n3 + 2 * wb; }
  // flattened point count over the padded volume (the parallel-loop size)
  std::size_t n_total() const { return t1() * t2() * t3(); }
  std::size_t n_interior() const { return n1 * n2 * n3; }
  double min_dx() const { return std::min({dx1, dx2, dx3}); }
  double max_dx() const { return std::max({dx1, dx2, dx3}); }

  // padded coordinates -> flattened index, x3 fastest
  std::size_t idx(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return (i1 * t2() + i2) * t3() + i3;
  }
  std::array<std::size_t, 3> coords(std::size_t idx) const {
    const std::size_t i3 = idx % t3();
    const std::size_t r = idx / t3();
    return {r / t2(), r % t2(), i3};
  }
  // interior coordinates -> flattened index into the padded volume
  std::size_t interior_idx(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return idx(i1 + wb, i2 + wb, i3 + wb);
  }
  bool interior_contains(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return i1 < n1 && i2 < n2 && i3 < n3;
  }
};

struct VelocityModel {
  Grid3 grid;
  std::vector<double> c;  // length grid.n_total(), x3 fastest
  double cmin = 0.0, cmax = 0.0;

  void cache_extrema() {
    cmin = std::numeric_limits<double>::infinity();
    cmax = -std::numeric_limits<double>::infinity();
    for (double v : c) {
      cmin = std::min(cmin, v);
      cmax = std::max(cmax, v);
    }
  }
};

struct RickerSource {
  double f_peak = 20.0;  // Hz
  double t0 = 0.0;       // s, wavelet delay
  std::array<std::size_t, 3> position{0, 0, 0};  // interior grid indices
  double amplitude = 1.0;  // test hook; 1.0 in normal use

  // Delay at which the wavelet envelope has decayed below ~1e-6.
  static double default_t0(double f_peak) {
    return 6.0 / (std::numbers::pi * f_peak * std::sqrt(2.0));
  }

  static RickerSource at(double f_peak, std::array<std::size_t, 3> pos) {
    if (!(f_peak > 0.0)) throw std::invalid_argument("f_peak must be > 0");
    return {f_peak, default_t0(f_peak), pos, 1.0};
  }
};

inline double ricker(double t, const RickerSource& src) {
  const double tau = t - src.t0;
  const double a = std::numbers::pi * std::numbers::pi * src.f_peak *
                   src.f_peak * tau * tau;
  return (1.0 - 2.0 * a) * std::exp(-a);
}

struct AcquisitionGeometry {
  RickerSource source;
  std::vector<std::array<std::size_t, 3>> receivers;  // interior indices
  std::size_t ns = 1;   // time steps
  double dt = 1e-3;     // s

  void validate(const Grid3& grid) const {
    if (ns < 1) throw std::invalid_argument("ns must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(src_f_peak() > 0.0)) throw std::invalid_argument("f_peak must be > 0");
    if (source.t0 < 0.0) throw std::invalid_argument("t0 must be >= 0");
    const auto& p = source.position;
    if (!grid.interior_contains(p[0], p[1], p[2]))
      throw std::invalid_argument("source outside interior grid");
    for (const auto& r : receivers)
      if (!grid.interior_contains(r[0], r[1], r[2]))
        throw std::invalid_argument("receiver outside interior grid");
  }

 private:
  double src_f_peak() const { return source.f_peak; }
};

struct Seismogram {
  std::size_t nr = 0, ns = 0;
  std::vector<double> traces;  // nr x ns, time fastest

  Seismogram() = default;
  Seismogram(std::size_t nr_, std::size_t ns_)
      : nr(nr_), ns(ns_), traces(nr_ * ns_, 0.0) {}

  double& at(std::size_t r, std::size_t t) { return traces[r * ns + t]; }
  double at(std::size_t r, std::size_t t) const { return traces[r * ns + t]; }
};

struct StabilityReport {
  double dx_bound = 0.0;  // m
  double dt_bound = 0.0;  // s
  bool dx_ok = false;
  bool dt_ok = false;
  double W = 0.0;      // grid points per minimum wavelength
  double f_max = 0.0;  // Hz
};

inline StabilityReport check_stability(const VelocityModel& model,
                                       const AcquisitionGeometry& geom,
                                       double f_max, double W) {
  if (!(f_max > 0.0)) throw std::invalid_argument("f_max must be > 0");
  if (!(W >= 4.0)) throw std::invalid_argument("W must be >= 4");
  StabilityReport rep;
  rep.W = W;
  rep.f_max = f_max;
  rep.dx_bound = model.cmin / (W * f_max);
  rep.dt_bound = 2.0 * model.grid.min_dx() /
                 (std::numbers::pi * model.cmax * std::sqrt(3.0));
  rep.dx_ok = model.grid.max_dx() <= rep.dx_bound;
  rep.dt_ok = geom.dt <= rep.dt_bound;
  return rep;
}

// Two layers split at the vertical midpoint: interior x3 < n3/2 gets v_top.
// Border points replicate the nearest interior value.
inline VelocityModel build_two_layer_model(const Grid3& grid, double v_top,
                                           double v_bottom) {
  if (!(v_top > 0.0) || !(v_bottom > 0.0))
    throw std::invalid_argument("layer velocities must be > 0");
  VelocityModel m;
  m.grid = grid;
  m.c.resize(grid.n_total());
  const std::size_t half = grid.n3 / 2;
  const auto clamp_interior = [](std::size_t p, std::size_t wb, std::size_t n) {
    if (p < wb) return std::size_t{0};
    if (p >= wb + n) return n - 1;
    return p - wb;
  };
  for (std::size_t i1 = 0; i1 < grid.t1(); ++i1)
    for (std::size_t i2 = 0; i2 < grid.t2(); ++i2)
      for (std::size_t i3 = 0; i3 < grid.t3(); ++i3) {
        const std::size_t k3 = clamp_interior(i3, grid.wb, grid.n3);
        m.c[grid.idx(i1, i2, i3)] = k3 < half ? v_top : v_bottom;
      }
  m.cache_extrema();
  return m;
}

// Raw little-endian float32 interior-only model file, x3 fastest.
inline VelocityModel load_velocity_model(const std::string& path,
                                         const Grid3& grid) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open velocity model file: " + path);
  const std::size_t expected = grid.n_interior() * sizeof(float);
  const std::size_t actual = static_cast<std::size_t>(in.tellg());
  if (actual != expected)
    throw std::runtime_error("velocity model size mismatch: " + path + " has " +
                             std::to_string(actual) + " bytes, expected " +
                             std::to_string(expected));
  in.seekg(0);
  std::vector<float> raw(grid.n_interior());
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(expected));
  if (!in) throw std::runtime_error("read error on velocity model file: " + path);

  VelocityModel m;
  m.grid = grid;
  m.c.resize(grid.n_total());
  const auto clamp_interior = [](std::size_t p, std::size_t wb, std::size_t n) {
    if (p < wb) return std::size_t{0};
    if (p >= wb + n) return n - 1;
    return p - wb;
  };
  for (std::size_t i1 = 0; i1 < grid.t1(); ++i1)
    for (std::size_t i2 = 0; i2 < grid.t2(); ++i2)
      for (std::size_t i3 = 0; i3 < grid.t3(); ++i3) {
        const std::size_t k1 = clamp_interior(i1, grid.wb, grid.n1);
        const std::size_t k2 = clamp_interior(i2, grid.wb, grid.n2);
        const std::size_t k3 = clamp_interior(i3, grid.wb, grid.n3);
        const float v = raw[(k1 * grid.n2 + k2) * grid.n3 + k3];
        if (!(v > 0.0f) || !std::isfinite(v))
          throw std::runtime_error("non-positive velocity in model file: " + path);
        m.c[grid.idx(i1, i2, i3)] = static_cast<double>(v);
      }
  m.cache_extrema();
  return m;
}

}  // namespace chunktune
