#pragma once

// Reverse time migration: forward pass with evenly spaced checkpoints,
// backward pass injecting observed data, zero-lag cross-correlation imaging
// over the interior grid, and stacking over shots.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chunktune/autotune.hpp"
#include "chunktune/model.hpp"
#include "chunktune/parsched.hpp"
#include "chunktune/propagator.hpp"

namespace chunktune {

// Snapshots of (u_prev, u_curr) every `stride` steps; stride = ceil(ns/n_b)
// bounds the store at n_b entries and recomputation at one forward pass.
struct CheckpointStore {
  struct Entry {
    std::size_t step;
    std::vector<double> prev, curr;
  };

  std::size_t n_b = 1;
  std::size_t stride = 1;
  std::vector<Entry> entries;

  CheckpointStore(std::size_t n_b_, std::size_t ns) : n_b(n_b_) {
    if (n_b < 1) throw std::invalid_argument("n_b must be >= 1");
    stride = (ns + n_b - 1) / n_b;
    entries.reserve((ns + stride - 1) / stride);
  }

  void save(std::size_t step, const WavefieldPair& fields) {
    entries.push_back({step, fields.prev(), fields.curr()});
  }

  // largest checkpoint with step <= t
  const Entry& nearest_at_or_before(std::size_t t) const {
    const Entry* best = nullptr;
    for (const auto& e : entries)
      if (e.step <= t && (!best || e.step > best->step)) best = &e;
    if (!best) throw std::logic_error("no checkpoint at or before requested step");
    return *best;
  }
};

struct ImageVolume {
  std::size_t n1 = 0, n2 = 0, n3 = 0;  // interior dims
  std::vector<double> values;          // x3 fastest
  std::size_t shots = 0;

  ImageVolume() = default;
  explicit ImageVolume(const Grid3& g)
      : n1(g.n1), n2(g.n2), n3(g.n3), values(g.n_interior(), 0.0) {}

  double& at(std::size_t i1, std::size_t i2, std::size_t i3) {
    return values[(i1 * n2 + i2) * n3 + i3];
  }
  double at(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return values[(i1 * n2 + i2) * n3 + i3];
  }
};

struct RtmConfig {
  SchedulePolicy policy_propagation = SchedulePolicy::static_default();
  std::size_t n_b = 1;
  std::optional<TuneConfig> tune;
  std::optional<std::size_t> n_c;  // recorded for provenance, unused
};

// Per-run accounting used by the overhead analysis.
struct MigrationStats {
  double total_seconds = 0.0;
  double tuner_seconds = 0.0;
  std::size_t tuner_kernel_steps = 0;
  std::optional<std::size_t> tuned_chunk;
  std::size_t forward_steps = 0;
  std::size_t backward_steps = 0;
  std::size_t recomputed_steps = 0;
  std::vector<double> per_shot_seconds;
};

// Forward propagation saving a checkpoint after each step whose index is a
// multiple of the stride.
inline WavefieldPair rtm_forward(const VelocityModel& model,
                                 const AcquisitionGeometry& geom,
                                 ThreadPool& pool,
                                 const SchedulePolicy& policy,
                                 CheckpointStore& store,
                                 std::size_t* step_counter = nullptr) {
  const BoundaryCoeffs coeffs =
      compute_boundary_coeffs(model.grid, geom.source.f_peak, geom.dt);
  WavefieldPair fields(model.grid.n_total());
  for (std::size_t t = 0; t < geom.ns; ++t) {
    step(fields, model, coeffs, geom.dt, pool, policy);
    inject_source(fields, geom.source, static_cast<double>(t) * geom.dt, model,
                  geom.dt);
    if (step_counter) ++*step_counter;
    if (t % store.stride == 0) store.save(t, fields);
  }
  return fields;
}

// Serves the forward wavefield at arbitrary step indices by replaying from
// the nearest checkpoint. A whole stride segment is recomputed and cached on
// first touch, so a descending sweep replays each segment once.
class ForwardRetriever {
 public:
  ForwardRetriever(const CheckpointStore& store, const VelocityModel& model,
                   const AcquisitionGeometry& geom, ThreadPool& pool,
                   const SchedulePolicy& policy)
      : store_(store),
        model_(model),
        geom_(geom),
        pool_(pool),
        policy_(policy),
        coeffs_(compute_boundary_coeffs(model.grid, geom.source.f_peak, geom.dt)),
        work_(model.grid.n_total()) {}

  // wavefield (u_curr) at step t
  const std::vector<double>& get(std::size_t t) {
    if (t >= geom_.ns) throw std::invalid_argument("step index out of range");
    if (!cached(t)) replay_segment(t);
    return segment_[t - segment_base_];
  }

  std::size_t recomputed_steps() const { return recomputed_; }

 private:
  bool cached(std::size_t t) const {
    return !segment_.empty() && t >= segment_base_ &&
           t < segment_base_ + segment_.size();
  }

  void replay_segment(std::size_t t) {
    const auto& ckpt = store_.nearest_at_or_before(t);
    segment_base_ = ckpt.step;
    segment_.assign(t - ckpt.step + 1, {});
    segment_[0] = ckpt.curr;

    work_.clear();
    work_.prev() = ckpt.prev;
    work_.curr() = ckpt.curr;
    for (std::size_t s = ckpt.step + 1; s <= t; ++s) {
      step(work_, model_, coeffs_, geom_.dt, pool_, policy_);
      inject_source(work_, geom_.source, static_cast<double>(s) * geom_.dt,
                    model_, geom_.dt);
      ++recomputed_;
      segment_[s - segment_base_] = work_.curr();
    }
  }

  const CheckpointStore& store_;
  const VelocityModel& model_;
  const AcquisitionGeometry& geom_;
  ThreadPool& pool_;
  SchedulePolicy policy_;
  BoundaryCoeffs coeffs_;
  WavefieldPair work_;
  std::size_t segment_base_ = 0;
  std::vector<std::vector<double>> segment_;
  std::size_t recomputed_ = 0;
};

inline std::vector<double> retrieve_forward(const CheckpointStore& store,
                                            std::size_t t,
                                            const VelocityModel& model,
                                            const AcquisitionGeometry& geom,
                                            ThreadPool& pool,
                                            const SchedulePolicy& policy) {
  ForwardRetriever r(store, model, geom, pool, policy);
  return r.get(t);
}

// image += u_fwd * u_bwd over interior points, static distribution. The dt
// factor of the correlation integral is omitted (constant positive scale).
inline void imaging_step(ImageVolume& image, const std::vector<double>& u_fwd,
                         const std::vector<double>& u_bwd, const Grid3& grid,
                         ThreadPool& pool) {
  const std::size_t n2 = grid.n2, n3 = grid.n3;
  pool.parallel_for(
      grid.n_interior(), SchedulePolicy::static_default(),
      [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) {
          const std::size_t i3 = j % n3;
          const std::size_t r = j / n3;
          const std::size_t idx = grid.interior_idx(r / n2, r % n2, i3);
          image.values[j] += u_fwd[idx] * u_bwd[idx];
        }
      });
}

// One shot: forward pass with checkpoints, then backward receiver-wavefield
// propagation with imaging against the retrieved forward field.
inline ImageVolume migrate_shot(const VelocityModel& model,
                                const Seismogram& observed,
                                const AcquisitionGeometry& geom,
                                ThreadPool& pool, const RtmConfig& cfg,
                                MigrationStats* stats = nullptr) {
  geom.validate(model.grid);
  if (observed.nr != geom.receivers.size() || observed.ns != geom.ns)
    throw std::invalid_argument("seismogram shape does not match geometry");

  CheckpointStore store(cfg.n_b, geom.ns);
  std::size_t fwd_steps = 0;
  rtm_forward(model, geom, pool, cfg.policy_propagation, store, &fwd_steps);

  ForwardRetriever retriever(store, model, geom, pool, cfg.policy_propagation);
  const BoundaryCoeffs coeffs =
      compute_boundary_coeffs(model.grid, geom.source.f_peak, geom.dt);
  WavefieldPair bwd(model.grid.n_total());
  ImageVolume image(model.grid);

  std::size_t bwd_steps = 0;
  for (std::size_t t = geom.ns; t-- > 0;) {
    step(bwd, model, coeffs, geom.dt, pool, cfg.policy_propagation);
    ++bwd_steps;
    inject_receivers(bwd, geom, observed, t, model, geom.dt, pool);
    const std::vector<double>& fwd = retriever.get(t);
    imaging_step(image, fwd, bwd.curr(), model.grid, pool);
  }
  if (!bwd.finite()) throw std::runtime_error("unstable migration");
  image.shots = 1;

  if (stats) {
    stats->forward_steps += fwd_steps;
    stats->backward_steps += bwd_steps;
    stats->recomputed_steps += retriever.recomputed_steps();
  }
  return image;
}

struct Shot {
  AcquisitionGeometry geometry;
  Seismogram observed;
};

struct MigrationResult {
  ImageVolume image;
  MigrationStats stats;
};

// Migrates every shot sequentially, optionally auto-tuning the propagation
// chunk before the first shot; per-shot images are summed in process.
inline MigrationResult migrate_all(const VelocityModel& model,
                                   const std::vector<Shot>& shots,
                                   ThreadPool& pool, const RtmConfig& cfg) {
  if (shots.empty()) throw std::invalid_argument("at least one shot required");
  MigrationResult res;
  res.image = ImageVolume(model.grid);

  const double t_start = monotonic_now();
  RtmConfig run_cfg = cfg;
  if (cfg.tune) {
    const double t0 = monotonic_now();
    const TuneResult tuned =
        autotune(model, shots.front().geometry, pool, *cfg.tune);
    res.stats.tuner_seconds = monotonic_now() - t0;
    res.stats.tuner_kernel_steps = tuned.evaluations;
    res.stats.tuned_chunk = tuned.chunk;
    run_cfg.policy_propagation = SchedulePolicy::dynamic(tuned.chunk);
  }

  for (std::size_t s = 0; s < shots.size(); ++s) {
    const double t0 = monotonic_now();
    ImageVolume shot_image;
    try {
      shot_image = migrate_shot(model, shots[s].observed, shots[s].geometry,
                                pool, run_cfg, &res.stats);
    } catch (const std::exception& ex) {
      throw std::runtime_error("shot " + std::to_string(s) +
                               " failed: " + ex.what());
    }
    for (std::size_t j = 0; j < res.image.values.size(); ++j)
      res.image.values[j] += shot_image.values[j];
    res.image.shots++;
    res.stats.per_shot_seconds.push_back(monotonic_now() - t0);
  }
  res.stats.total_seconds = monotonic_now() - t_start;
  return res;
}

}  // namespace chunktune
