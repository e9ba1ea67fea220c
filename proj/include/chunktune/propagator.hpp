#pragma once

// 3D acoustic finite-difference kernel: 8th order in space, 2nd order in
// time, with an absorbing damping band around the grid. The propagation
// loop runs over the flattened padded index space through the thread pool.

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "chunktune/model.hpp"
#include "chunktune/parsched.hpp"

namespace chunktune {

// 8th-order central-difference second-derivative weights, offsets 0..4.
inline constexpr double kStencil[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0,
                                       8.0 / 315.0, -1.0 / 560.0};
inline constexpr std::size_t kStencilRadius = 4;

struct BoundaryCoeffs {
  std::vector<double> phi1, phi2;  // length grid.n_total()
};

// phi(i) = pi * f_peak * dt * (w_i/w_b)^2 inside the border band,
// summed over the three dimensions; phi1 = 1/(1+phi), phi2 = 1-phi.
inline BoundaryCoeffs compute_boundary_coeffs(const Grid3& grid, double f_peak,
                                              double dt) {
  BoundaryCoeffs bc;
  bc.phi1.assign(grid.n_total(), 1.0);
  bc.phi2.assign(grid.n_total(), 1.0);
  if (grid.wb == 0) return bc;

  const double scale = std::numbers::pi * f_peak * dt;
  const auto depth = [&](std::size_t p, std::size_t n) -> std::size_t {
    // distance into the border band; 0 at the interior edge, wb at the face
    if (p < grid.wb) return grid.wb - p;
    if (p >= grid.wb + n) return p - (grid.wb + n - 1);
    return 0;
  };
  const auto phi_dim = [&](std::size_t w_i) {
    if (w_i == 0) return 0.0;
    const double f = static_cast<double>(w_i) / static_cast<double>(grid.wb);
    return scale * f * f;
  };
  for (std::size_t i1 = 0; i1 < grid.t1(); ++i1) {
    const double p1 = phi_dim(depth(i1, grid.n1));
    for (std::size_t i2 = 0; i2 < grid.t2(); ++i2) {
      const double p2 = phi_dim(depth(i2, grid.n2));
      for (std::size_t i3 = 0; i3 < grid.t3(); ++i3) {
        const double phi = p1 + p2 + phi_dim(depth(i3, grid.n3));
        const std::size_t idx = grid.idx(i1, i2, i3);
        bc.phi1[idx] = 1.0 / (1.0 + phi);
        bc.phi2[idx] = 1.0 - phi;
      }
    }
  }
  return bc;
}

// Pressure at t-dt and t. step() overwrites the t-dt array with t+dt and
// swaps, so curr() is always the newest time level.
struct WavefieldPair {
  std::vector<double> a, b;
  bool a_is_curr = false;

  explicit WavefieldPair(std::size_t n) : a(n, 0.0), b(n, 0.0) {}

  std::vector<double>& curr() { return a_is_curr ? a : b; }
  std::vector<double>& prev() { return a_is_curr ? b : a; }
  const std::vector<double>& curr() const { return a_is_curr ? a : b; }
  const std::vector<double>& prev() const { return a_is_curr ? b : a; }
  void swap_roles() { a_is_curr = !a_is_curr; }

  void clear() {
    std::fill(a.begin(), a.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    a_is_curr = false;
  }

  bool finite() const {
    for (double v : curr())
      if (!std::isfinite(v)) return false;
    for (double v : prev())
      if (!std::isfinite(v)) return false;
    return true;
  }
};

namespace detail {

// Laplacian with zero-padded neighbors for points within the stencil radius
// of the padded volume's outer faces.
inline double lap8_guarded(const double* u, const Grid3& g,
                           std::size_t i1, std::size_t i2, std::size_t i3,
                           double w1, double w2, double w3) {
  const auto at = [&](std::ptrdiff_t a, std::ptrdiff_t b, std::ptrdiff_t c) {
    if (a < 0 || b < 0 || c < 0 || a >= static_cast<std::ptrdiff_t>(g.t1()) ||
        b >= static_cast<std::ptrdiff_t>(g.t2()) ||
        c >= static_cast<std::ptrdiff_t>(g.t3()))
      return 0.0;
    return u[g.idx(static_cast<std::size_t>(a), static_cast<std::size_t>(b),
                   static_cast<std::size_t>(c))];
  };
  const auto a1 = static_cast<std::ptrdiff_t>(i1);
  const auto a2 = static_cast<std::ptrdiff_t>(i2);
  const auto a3 = static_cast<std::ptrdiff_t>(i3);
  double lap = kStencil[0] * (w1 + w2 + w3) * at(a1, a2, a3);
  for (std::ptrdiff_t o = 1; o <= static_cast<std::ptrdiff_t>(kStencilRadius); ++o) {
    lap += kStencil[o] * (w1 * (at(a1 - o, a2, a3) + at(a1 + o, a2, a3)) +
                          w2 * (at(a1, a2 - o, a3) + at(a1, a2 + o, a3)) +
                          w3 * (at(a1, a2, a3 - o) + at(a1, a2, a3 + o)));
  }
  return lap;
}

struct StepContext {
  const Grid3& grid;
  const double* uc;
  double* un;  // aliases the previous time level; each point reads only its own slot
  const double* c;
  const double* phi1;
  const double* phi2;
  double dt;
  double w1, w2, w3;  // 1/dx^2 per dimension
  std::size_t s1, s2;  // flattened strides for i1 and i2
};

inline void step_point(const StepContext& cx, std::size_t idx, double lap) {
  const double cdt = cx.c[idx] * cx.dt;
  cx.un[idx] = cx.phi1[idx] *
               (2.0 * cx.uc[idx] - cx.phi2[idx] * cx.un[idx] + cdt * cdt * lap);
}

inline void step_range(const StepContext& cx, std::size_t begin, std::size_t end) {
  const Grid3& g = cx.grid;
  const std::size_t t1 = g.t1(), t2 = g.t2(), t3 = g.t3();
  const std::size_t R = kStencilRadius;

  std::size_t idx = begin;
  auto co = g.coords(begin);
  std::size_t i1 = co[0], i2 = co[1], i3 = co[2];

  while (idx < end) {
    // current row: fixed (i1, i2), i3 in [i3, row_end)
    const std::size_t row_end = std::min(t3 - i3, end - idx) + i3;
    const bool row_interior = i1 >= R && i1 + R < t1 && i2 >= R && i2 + R < t2 &&
                              t3 > 2 * R;
    std::size_t k = i3;
    if (!row_interior) {
      for (; k < row_end; ++k, ++idx)
        step_point(cx, idx,
                   lap8_guarded(cx.uc, g, i1, i2, k, cx.w1, cx.w2, cx.w3));
    } else {
      const std::size_t fast_b = std::max(k, R);
      const std::size_t fast_e = std::min(row_end, t3 - R);
      for (; k < std::min(fast_b, row_end); ++k, ++idx)
        step_point(cx, idx,
                   lap8_guarded(cx.uc, g, i1, i2, k, cx.w1, cx.w2, cx.w3));
      const double* uc = cx.uc;
      const std::size_t s1 = cx.s1, s2 = cx.s2;
      const double w1 = cx.w1, w2 = cx.w2, w3 = cx.w3;
      const double a0 = kStencil[0] * (w1 + w2 + w3);
      for (; k < fast_e; ++k, ++idx) {
        double lap = a0 * uc[idx];
        lap += kStencil[1] * (w1 * (uc[idx - s1] + uc[idx + s1]) +
                              w2 * (uc[idx - s2] + uc[idx + s2]) +
                              w3 * (uc[idx - 1] + uc[idx + 1]));
        lap += kStencil[2] * (w1 * (uc[idx - 2 * s1] + uc[idx + 2 * s1]) +
                              w2 * (uc[idx - 2 * s2] + uc[idx + 2 * s2]) +
                              w3 * (uc[idx - 2] + uc[idx + 2]));
        lap += kStencil[3] * (w1 * (uc[idx - 3 * s1] + uc[idx + 3 * s1]) +
                              w2 * (uc[idx - 3 * s2] + uc[idx + 3 * s2]) +
                              w3 * (uc[idx - 3] + uc[idx + 3]));
        lap += kStencil[4] * (w1 * (uc[idx - 4 * s1] + uc[idx + 4 * s1]) +
                              w2 * (uc[idx - 4 * s2] + uc[idx + 4 * s2]) +
                              w3 * (uc[idx - 4] + uc[idx + 4]));
        step_point(cx, idx, lap);
      }
      for (; k < row_end; ++k, ++idx)
        step_point(cx, idx,
                   lap8_guarded(cx.uc, g, i1, i2, k, cx.w1, cx.w2, cx.w3));
    }
    i3 = 0;
    if (++i2 == t2) {
      i2 = 0;
      ++i1;
    }
  }
}

}  // namespace detail

// One time step of Eq.-style update: u_next = phi1*(2 u_curr - phi2*u_prev
// + (c dt)^2 lap8(u_curr)), written over u_prev, then the roles swap.
inline void step(WavefieldPair& fields, const VelocityModel& model,
                 const BoundaryCoeffs& coeffs, double dt, ThreadPool& pool,
                 const SchedulePolicy& policy) {
  const Grid3& g = model.grid;
  detail::StepContext cx{g,
                         fields.curr().data(),
                         fields.prev().data(),
                         model.c.data(),
                         coeffs.phi1.data(),
                         coeffs.phi2.data(),
                         dt,
                         1.0 / (g.dx1 * g.dx1),
                         1.0 / (g.dx2 * g.dx2),
                         1.0 / (g.dx3 * g.dx3),
                         g.t2() * g.t3(),
                         g.t3()};
  pool.parallel_for(g.n_total(), policy, [&cx](std::size_t b, std::size_t e) {
    detail::step_range(cx, b, e);
  });
  fields.swap_roles();
}

// Point injection at the source location; call after step() for the same
// time level. The source sits in the interior where phi1 = 1.
inline void inject_source(WavefieldPair& fields, const RickerSource& src,
                          double t, const VelocityModel& model, double dt) {
  const Grid3& g = model.grid;
  const auto& p = src.position;
  const std::size_t idx = g.interior_idx(p[0], p[1], p[2]);
  const double cdt = model.c[idx] * dt;
  fields.curr()[idx] -= cdt * cdt * src.amplitude * ricker(t, src);
}

inline void record_receivers(const WavefieldPair& fields,
                             const AcquisitionGeometry& geom,
                             std::size_t t_index, const Grid3& grid,
                             Seismogram& seis) {
  const auto& u = fields.curr();
  for (std::size_t r = 0; r < geom.receivers.size(); ++r) {
    const auto& p = geom.receivers[r];
    seis.at(r, t_index) = u[grid.interior_idx(p[0], p[1], p[2])];
  }
}

// Additive injection of observed samples at the receiver points, statically
// parallelized over receivers. Coincident receivers accumulate through a
// CAS loop so duplicates stay additive.
inline void inject_receivers(WavefieldPair& fields,
                             const AcquisitionGeometry& geom,
                             const Seismogram& seis, std::size_t t_index,
                             const VelocityModel& model, double dt,
                             ThreadPool& pool) {
  const Grid3& g = model.grid;
  double* u = fields.curr().data();
  pool.parallel_for(
      geom.receivers.size(), SchedulePolicy::static_default(),
      [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
          const auto& p = geom.receivers[r];
          const std::size_t idx = g.interior_idx(p[0], p[1], p[2]);
          const double cdt = model.c[idx] * dt;
          const double add = cdt * cdt * seis.at(r, t_index);
          std::atomic_ref<double> slot(u[idx]);
          double old = slot.load(std::memory_order_relaxed);
          while (!slot.compare_exchange_weak(old, old + add,
                                             std::memory_order_relaxed)) {
          }
        }
      });
}

// ns steps of step + source injection + receiver recording.
inline Seismogram forward_model(const VelocityModel& model,
                                const AcquisitionGeometry& geom,
                                ThreadPool& pool,
                                const SchedulePolicy& policy) {
  geom.validate(model.grid);
  if (geom.receivers.empty())
    throw std::invalid_argument("receiver list empty");
  const BoundaryCoeffs coeffs =
      compute_boundary_coeffs(model.grid, geom.source.f_peak, geom.dt);
  WavefieldPair fields(model.grid.n_total());
  Seismogram seis(geom.receivers.size(), geom.ns);
  for (std::size_t t = 0; t < geom.ns; ++t) {
    step(fields, model, coeffs, geom.dt, pool, policy);
    inject_source(fields, geom.source, static_cast<double>(t) * geom.dt, model,
                  geom.dt);
    record_receivers(fields, geom, t, model.grid, seis);
  }
  if (!fields.finite()) throw std::runtime_error("unstable propagation");
  return seis;
}

}  // namespace chunktune
