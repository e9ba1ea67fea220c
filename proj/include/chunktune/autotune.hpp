#pragma once

// Chunk-size auto-tuning: measures the wall time of one forward time step
// per candidate chunk and drives CSA to the chunk minimizing it. Each
// measurement runs the step kernel twice and times only the second pass,
// on a sandbox reset to the identical first-step state.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>

#include "chunktune/csa.hpp"
#include "chunktune/model.hpp"
#include "chunktune/parsched.hpp"
#include "chunktune/propagator.hpp"

namespace chunktune {

struct TuneConfig {
  csa::CsaParams csa;
  std::size_t lo = 50;  // minimum chunk
};

struct TuneResult {
  std::size_t chunk = 0;
  double cost = 0.0;                    // seconds of the best timed step
  std::vector<csa::Evaluation> trace;   // (iteration, optimizer, chunk, seconds)
  std::size_t evaluations = 0;          // kernel step executions, 2 per measurement
};

// First-forward-step measurement sandbox. reset() restores the exact
// pre-first-step state so every chunk candidate measures the same work.
class StepCostSandbox {
 public:
  StepCostSandbox(const VelocityModel& model, const AcquisitionGeometry& geom,
                  ThreadPool& pool)
      : model_(model),
        geom_(geom),
        pool_(pool),
        coeffs_(compute_boundary_coeffs(model.grid, geom.source.f_peak, geom.dt)),
        fields_(model.grid.n_total()) {}

  double measure(std::size_t chunk) {
    const SchedulePolicy policy = SchedulePolicy::dynamic(chunk);
    reset();
    step(fields_, model_, coeffs_, geom_.dt, pool_, policy);  // cache warm-up
    const double t0 = monotonic_now();
    step(fields_, model_, coeffs_, geom_.dt, pool_, policy);
    const double elapsed = monotonic_now() - t0;
    kernel_steps_ += 2;
    if (!fields_.finite())
      throw std::runtime_error("unstable propagation during tuning measurement");
    return elapsed;
  }

  std::size_t kernel_steps() const { return kernel_steps_; }

 private:
  void reset() {
    fields_.clear();
    inject_source(fields_, geom_.source, 0.0, model_, geom_.dt);
  }

  const VelocityModel& model_;
  const AcquisitionGeometry& geom_;
  ThreadPool& pool_;
  BoundaryCoeffs coeffs_;
  WavefieldPair fields_;
  std::size_t kernel_steps_ = 0;
};

namespace detail {

inline TuneResult tune_over(const std::function<double(std::size_t)>& step_cost,
                            std::size_t lo, std::size_t hi,
                            const csa::CsaParams& params) {
  if (hi <= lo) throw std::runtime_error("domain empty: N_loop/N_threads <= lo");
  const csa::Domain domain(static_cast<double>(lo), static_cast<double>(hi),
                           /*integer=*/true);
  const auto cost = [&](double x) {
    const double clamped = domain.clamp(x);
    return step_cost(static_cast<std::size_t>(clamped));
  };
  const csa::CsaResult r = csa::minimize(cost, domain, params);
  TuneResult out;
  out.chunk = static_cast<std::size_t>(domain.clamp(r.best_solution));
  out.cost = r.best_energy;
  out.trace = r.trace;
  out.evaluations = 2 * r.trace.size();
  return out;
}

}  // namespace detail

// Tunes the dynamic chunk over [cfg.lo, N_loop/N_threads].
inline TuneResult autotune(const VelocityModel& model,
                           const AcquisitionGeometry& geom, ThreadPool& pool,
                           const TuneConfig& cfg) {
  geom.validate(model.grid);
  const std::size_t hi = model.grid.n_total() / pool.n_threads();
  StepCostSandbox sandbox(model, geom, pool);
  TuneResult out = detail::tune_over(
      [&](std::size_t chunk) { return sandbox.measure(chunk); }, cfg.lo, hi,
      cfg.csa);
  out.evaluations = sandbox.kernel_steps();
  return out;
}

// Seam for deterministic tests: the cost model replaces the timed kernel.
inline TuneResult autotune_with_cost(
    const std::function<double(std::size_t)>& step_cost, std::size_t lo,
    std::size_t hi, const csa::CsaParams& params) {
  return detail::tune_over(step_cost, lo, hi, params);
}

inline void write_tune_trace_csv(const TuneResult& result,
                                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  out << "iteration,optimizer,chunk,seconds\n";
  for (const auto& ev : result.trace)
    out << ev.iteration << ',' << ev.optimizer << ','
        << static_cast<std::size_t>(ev.solution) << ',' << ev.energy << '\n';
}

}  // namespace chunktune
