#pragma once

// Command implementations behind the CLI subcommands: forward modeling,
// migration, standalone tuning, scheduler benchmarking and analytical
// validation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "chunktune/autotune.hpp"
#include "chunktune/config.hpp"
#include "chunktune/io.hpp"
#include "chunktune/model.hpp"
#include "chunktune/parsched.hpp"
#include "chunktune/propagator.hpp"
#include "chunktune/rtm.hpp"

namespace chunktune {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Grid3 make_grid(const RunConfig& cfg) {
  return Grid3(cfg.n1, cfg.n2, cfg.n3, cfg.dx1, cfg.dx2, cfg.dx3, cfg.wb);
}

inline VelocityModel make_model(const RunConfig& cfg, const Grid3& grid) {
  if (!cfg.velocity_file.empty())
    return load_velocity_model(cfg.velocity_file, grid);
  return build_two_layer_model(grid, cfg.v_top, cfg.v_bottom);
}

inline double effective_f_max(const RunConfig& cfg) {
  return cfg.f_max > 0.0 ? cfg.f_max : 2.5 * cfg.f_peak;
}

inline RickerSource make_source(const RunConfig& cfg, const Grid3& grid,
                                std::size_t shot_index) {
  std::size_t i1 = cfg.source_i1 ? cfg.source_i1 : grid.n1 / 2;
  const std::size_t i2 = cfg.source_i2 ? cfg.source_i2 : grid.n2 / 2;
  if (cfg.shots > 1)  // spread shots evenly along x1
    i1 = (shot_index + 1) * grid.n1 / (cfg.shots + 1);
  RickerSource src = RickerSource::at(cfg.f_peak, {i1, i2, cfg.source_i3});
  if (cfg.t0 >= 0.0) src.t0 = cfg.t0;
  return src;
}

inline std::vector<std::array<std::size_t, 3>> make_receiver_grid(
    const RunConfig& cfg, const Grid3& grid) {
  std::vector<std::array<std::size_t, 3>> recs;
  for (std::size_t i1 = 0; i1 < grid.n1; i1 += cfg.receiver_stride)
    for (std::size_t i2 = 0; i2 < grid.n2; i2 += cfg.receiver_stride)
      recs.push_back({i1, i2, cfg.receiver_depth});
  return recs;
}

inline AcquisitionGeometry make_geometry(const RunConfig& cfg,
                                         const Grid3& grid,
                                         std::size_t shot_index) {
  AcquisitionGeometry geom;
  geom.source = make_source(cfg, grid, shot_index);
  geom.receivers = make_receiver_grid(cfg, grid);
  geom.ns = cfg.ns;
  geom.dt = cfg.dt;
  geom.validate(grid);
  return geom;
}

inline csa::CsaParams make_csa_params(const RunConfig& cfg) {
  csa::CsaParams p;
  p.t_gen0 = cfg.csa_tgen0;
  p.t_ac0 = cfg.csa_tac0;
  p.n_iter = cfg.csa_iters;
  p.m = cfg.csa_m;
  p.alpha = cfg.csa_alpha;
  p.sigma_d2 = cfg.csa_sigma_d2 >= 0.0 ? cfg.csa_sigma_d2
                                       : csa::CsaParams::default_sigma_d2(cfg.csa_m);
  p.gen_decay = cfg.csa_gen_decay;
  p.seed = cfg.seed;
  p.validate();
  return p;
}

inline TuneConfig make_tune_config(const RunConfig& cfg) {
  TuneConfig t;
  t.csa = make_csa_params(cfg);
  t.lo = cfg.tune_lo;
  return t;
}

struct SchedulerChoice {
  SchedulePolicy policy = SchedulePolicy::static_default();
  bool tuned = false;
};

inline SchedulerChoice resolve_scheduler(const std::string& name,
                                         std::size_t chunk) {
  if (name == "static" || name == "auto") {
    // the `auto` runtime mapping observed for libgomp: static, default chunk
    if (chunk > 0 && name == "static")
      return {SchedulePolicy::static_chunked(chunk), false};
    return {SchedulePolicy::static_default(), false};
  }
  if (name == "dynamic") {
    if (chunk == 0)
      throw std::invalid_argument(
          "dynamic requires chunk (untuned unit-chunk dynamic is excluded)");
    return {SchedulePolicy::dynamic(chunk), false};
  }
  if (name == "guided") return {SchedulePolicy::guided(chunk ? chunk : 1), false};
  if (name == "tuned") return {SchedulePolicy::static_default(), true};
  throw std::invalid_argument("unknown scheduler: " + name);
}

inline void require_stable(const VelocityModel& model,
                           const AcquisitionGeometry& geom,
                           const RunConfig& cfg) {
  const StabilityReport rep =
      check_stability(model, geom, effective_f_max(cfg), cfg.stability_w);
  if (!(rep.dx_ok && rep.dt_ok) && !cfg.force)
    throw NumericError(
        "stability check failed (dx_bound=" + std::to_string(rep.dx_bound) +
        " m, dt_bound=" + std::to_string(rep.dt_bound) +
        " s); pass force=true to override");
}

inline std::string shot_file(const RunConfig& cfg, std::size_t shot) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "shot_%04zu.bin", shot);
  return cfg.output_dir + "/" + buf;
}

inline TuneResult run_autotune(const RunConfig& cfg, const VelocityModel& model,
                               const AcquisitionGeometry& geom,
                               ThreadPool& pool) {
  return autotune(model, geom, pool, make_tune_config(cfg));
}

// ---------------------------------------------------------------- model ----

inline void cmd_model(const RunConfig& cfg, std::ostream& log = std::cout) {
  const Grid3 grid = make_grid(cfg);
  const VelocityModel model = make_model(cfg, grid);
  ThreadPool pool(cfg.threads ? static_cast<unsigned>(cfg.threads)
                              : default_thread_count());
  require_stable(model, make_geometry(cfg, grid, 0), cfg);
  ensure_dir(cfg.output_dir);

  SchedulerChoice sched = resolve_scheduler(cfg.scheduler, cfg.chunk);
  if (sched.tuned) {
    const TuneResult t = run_autotune(cfg, model, make_geometry(cfg, grid, 0), pool);
    sched.policy = SchedulePolicy::dynamic(t.chunk);
    log << "tuned chunk " << t.chunk << "\n";
  }

  for (std::size_t s = 0; s < cfg.shots; ++s) {
    const AcquisitionGeometry geom = make_geometry(cfg, grid, s);
    const Seismogram seis = forward_model(model, geom, pool, sched.policy);
    write_seismogram(shot_file(cfg, s), seis);
    if (s == 0) {
      std::ofstream preview(cfg.output_dir + "/trace_preview.csv");
      preview << "t_index,seconds,amplitude\n";
      for (std::size_t t = 0; t < geom.ns; ++t)
        preview << t << ',' << static_cast<double>(t) * geom.dt << ','
                << seis.at(0, t) << '\n';
    }
    log << "wrote " << shot_file(cfg, s) << " (" << geom.receivers.size()
        << " traces x " << geom.ns << " samples)\n";
  }
}

// -------------------------------------------------------------- migrate ----

inline MigrationResult cmd_migrate(const RunConfig& cfg,
                                   std::ostream& log = std::cout) {
  const Grid3 grid = make_grid(cfg);
  const VelocityModel model = make_model(cfg, grid);
  ThreadPool pool(cfg.threads ? static_cast<unsigned>(cfg.threads)
                              : default_thread_count());
  require_stable(model, make_geometry(cfg, grid, 0), cfg);
  ensure_dir(cfg.output_dir);

  std::vector<Shot> shots;
  for (std::size_t s = 0; s < cfg.shots; ++s) {
    Shot shot;
    shot.geometry = make_geometry(cfg, grid, s);
    shot.observed =
        read_seismogram(shot_file(cfg, s), shot.geometry.receivers.size(), cfg.ns);
    shots.push_back(std::move(shot));
  }

  RtmConfig rtm_cfg;
  rtm_cfg.n_b = cfg.n_b;
  if (cfg.n_c > 0) rtm_cfg.n_c = cfg.n_c;
  const SchedulerChoice sched = resolve_scheduler(cfg.scheduler, cfg.chunk);
  rtm_cfg.policy_propagation = sched.policy;
  if (sched.tuned) rtm_cfg.tune = make_tune_config(cfg);

  const MigrationResult result = migrate_all(model, shots, pool, rtm_cfg);

  write_image(cfg.output_dir + "/image.raw", cfg.output_dir + "/image.meta",
              result.image, grid);
  std::ofstream timing(cfg.output_dir + "/timing.csv");
  timing << "metric,value\n";
  timing << "total_seconds," << result.stats.total_seconds << '\n';
  timing << "tuner_seconds," << result.stats.tuner_seconds << '\n';
  timing << "chunk,"
         << (result.stats.tuned_chunk ? std::to_string(*result.stats.tuned_chunk)
                                      : std::string("-"))
         << '\n';
  for (std::size_t s = 0; s < result.stats.per_shot_seconds.size(); ++s)
    timing << "shot_" << s << "_seconds," << result.stats.per_shot_seconds[s]
           << '\n';

  log << "migrated " << cfg.shots << " shot(s) in "
      << result.stats.total_seconds << " s";
  if (result.stats.tuned_chunk)
    log << " (tuned chunk " << *result.stats.tuned_chunk << ", tuner "
        << result.stats.tuner_seconds << " s)";
  log << "\n";
  return result;
}

// ----------------------------------------------------------------- tune ----

inline TuneResult cmd_tune(const RunConfig& cfg, std::ostream& log = std::cout) {
  const Grid3 grid = make_grid(cfg);
  const VelocityModel model = make_model(cfg, grid);
  ThreadPool pool(cfg.threads ? static_cast<unsigned>(cfg.threads)
                              : default_thread_count());
  const AcquisitionGeometry geom = make_geometry(cfg, grid, 0);
  const TuneResult result = run_autotune(cfg, model, geom, pool);
  ensure_dir(cfg.output_dir);
  write_tune_trace_csv(result, cfg.output_dir + "/tune_trace.csv");
  log << "best chunk " << result.chunk << "\n"
      << "cost " << result.cost << " s\n"
      << "evaluations " << result.evaluations << "\n";
  return result;
}

// ---------------------------------------------------------------- bench ----

struct BenchRecord {
  std::string scheduler;
  std::size_t chunk = 0;
  std::size_t shots = 0;
  double median_seconds = 0.0;
  std::size_t reps = 0;
  double tuner_overhead_seconds = 0.0;
  unsigned threads = 0;
};

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<BenchRecord> cmd_bench(const RunConfig& cfg,
                                          std::ostream& log = std::cout) {
  if (cfg.reps < 1) throw std::invalid_argument("reps must be >= 1");
  const Grid3 grid = make_grid(cfg);
  const VelocityModel model = make_model(cfg, grid);
  ThreadPool pool(cfg.threads ? static_cast<unsigned>(cfg.threads)
                              : default_thread_count());
  require_stable(model, make_geometry(cfg, grid, 0), cfg);
  ensure_dir(cfg.output_dir);

  // observed data synthesized once and shared by every scheduler run
  std::vector<Shot> shots;
  for (std::size_t s = 0; s < cfg.shots; ++s) {
    Shot shot;
    shot.geometry = make_geometry(cfg, grid, s);
    shot.observed =
        forward_model(model, shot.geometry, pool, SchedulePolicy::static_default());
    shots.push_back(std::move(shot));
  }

  const std::size_t static_chunk =
      (grid.n_total() + pool.n_threads() - 1) / pool.n_threads();
  std::vector<BenchRecord> records;
  for (const std::string& name : {"static", "auto", "guided", "tuned"}) {
    RtmConfig rtm_cfg;
    rtm_cfg.n_b = cfg.n_b;
    const SchedulerChoice sched = resolve_scheduler(name, 0);
    rtm_cfg.policy_propagation = sched.policy;
    if (sched.tuned) rtm_cfg.tune = make_tune_config(cfg);

    std::vector<double> totals, tuner;
    std::size_t chunk_used = sched.tuned ? 0 : (name == "guided" ? 1 : static_chunk);
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
      const MigrationResult r = migrate_all(model, shots, pool, rtm_cfg);
      totals.push_back(r.stats.total_seconds);
      tuner.push_back(r.stats.tuner_seconds);
      if (r.stats.tuned_chunk) chunk_used = *r.stats.tuned_chunk;
    }
    BenchRecord rec{name,       chunk_used,       cfg.shots,
                    median_of(totals), cfg.reps, median_of(tuner),
                    pool.n_threads()};
    records.push_back(rec);
    log << name << ": median " << rec.median_seconds << " s (chunk "
        << rec.chunk << ")\n";
  }

  std::ofstream out(cfg.output_dir + "/bench.csv");
  out << "scheduler,chunk,shots,median_seconds,reps,tuner_overhead_seconds,threads\n";
  for (const auto& r : records)
    out << r.scheduler << ',' << r.chunk << ',' << r.shots << ','
        << r.median_seconds << ',' << r.reps << ',' << r.tuner_overhead_seconds
        << ',' << r.threads << '\n';
  return records;
}

// ------------------------------------------------------------- validate ----

struct ValidationReport {
  double mse = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::size_t offset_cells = 0;
};

// Homogeneous-medium comparison of a recorded trace against the analytical
// point-source solution s(t - r/c)/(4 pi r), both normalized to unit peak.
inline ValidationReport run_validation(const RunConfig& cfg,
                                       ThreadPool& pool) {
  const Grid3 grid = make_grid(cfg);
  VelocityModel model;
  model.grid = grid;
  model.c.assign(grid.n_total(), cfg.validate_velocity);
  model.cache_extrema();

  const std::size_t offset_cells =
      static_cast<std::size_t>(std::llround(cfg.validate_offset_m / grid.dx1));
  if (offset_cells == 0)
    throw std::invalid_argument("receiver coincides with source");
  const std::array<std::size_t, 3> src_pos{grid.n1 / 2, grid.n2 / 2, grid.n3 / 2};
  if (src_pos[0] + offset_cells >= grid.n1)
    throw std::invalid_argument("validation offset exceeds the grid");

  AcquisitionGeometry geom;
  geom.source = RickerSource::at(cfg.f_peak, src_pos);
  if (cfg.t0 >= 0.0) geom.source.t0 = cfg.t0;
  geom.receivers = {{src_pos[0] + offset_cells, src_pos[1], src_pos[2]}};
  geom.ns = cfg.ns;
  geom.dt = cfg.dt;
  geom.validate(grid);
  require_stable(model, geom, cfg);

  const Seismogram seis =
      forward_model(model, geom, pool, SchedulePolicy::static_default());

  const double r = static_cast<double>(offset_cells) * grid.dx1;
  const double c = cfg.validate_velocity;
  std::vector<double> numeric(geom.ns), analytic(geom.ns);
  for (std::size_t t = 0; t < geom.ns; ++t) {
    numeric[t] = seis.at(0, t);
    // the sample recorded at index t is the wavefield at time (t+1)*dt
    const double time = static_cast<double>(t + 1) * geom.dt;
    analytic[t] = ricker(time - r / c, geom.source) / (4.0 * std::numbers::pi * r);
  }
  const auto normalize = [](std::vector<double>& v) {
    double peak = 0.0;
    for (double x : v)
      if (std::abs(x) > std::abs(peak)) peak = x;
    if (peak == 0.0) throw NumericError("zero trace in validation");
    for (double& x : v) x /= peak;
  };
  normalize(numeric);
  normalize(analytic);

  double mse = 0.0;
  for (std::size_t t = 0; t < geom.ns; ++t) {
    const double d = numeric[t] - analytic[t];
    mse += d * d;
  }
  mse /= static_cast<double>(geom.ns);

  return {mse, cfg.mse_tol, mse <= cfg.mse_tol, offset_cells};
}

inline ValidationReport cmd_validate(const RunConfig& cfg,
                                     std::ostream& log = std::cout) {
  ThreadPool pool(cfg.threads ? static_cast<unsigned>(cfg.threads)
                              : default_thread_count());
  const ValidationReport rep = run_validation(cfg, pool);
  log << "offset_cells " << rep.offset_cells << "\n"
      << "normalized_mse " << rep.mse << "\n"
      << "tolerance " << rep.tolerance << "\n"
      << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep;
}

}  // namespace chunktune
