#pragma once

// Coupled simulated annealing over a bounded scalar domain. m logical
// optimizers share a coupled acceptance probability whose variance steers
// the acceptance temperature.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace chunktune::csa {

// Small seedable generator (splitmix64) so traces reproduce across
// platforms; standard-library distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in the open interval (0, 1)
  double next_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // uniform in [0, 1)
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

  // derive an independent substream for optimizer i
  Rng substream(std::uint64_t i) const {
    Rng r(state_ ^ ((i + 1) * 0xd1342543de82ef95ULL));
    r.next_u64();
    return r;
  }

 private:
  std::uint64_t state_;
};

struct CsaParams {
  double t_gen0 = 100.0;   // initial generation temperature (Table-2 default)
  double t_ac0 = 0.9;      // initial acceptance temperature
  std::size_t n_iter = 40; // N
  std::size_t m = 4;       // optimizer count
  double alpha = 0.005;    // acceptance-temperature rate
  double sigma_d2 = 0.99 * 3.0 / 16.0;  // desired variance, 0.99*(m-1)/m^2
  double gen_decay = 0.99999;
  std::uint64_t seed = 1;
  // The published acceptance sentence ("only if A < r") inverts the
  // conventional CSA rule; the conventional rule (accept worse when r < A)
  // is the default.
  bool paper_acceptance_rule = false;

  static double default_sigma_d2(std::size_t m) {
    const double md = static_cast<double>(m);
    return 0.99 * (md - 1.0) / (md * md);
  }

  void validate() const {
    if (!(t_gen0 > 0.0) || !(t_ac0 > 0.0))
      throw std::invalid_argument("initial temperatures must be > 0");
    if (n_iter < 1) throw std::invalid_argument("n_iter must be >= 1");
    if (m < 2) throw std::invalid_argument("m must be >= 2");
    if (!(alpha > 0.0) || alpha > 0.1)
      throw std::invalid_argument("alpha must be in (0, 0.1]");
    const double md = static_cast<double>(m);
    if (sigma_d2 < 0.0 || sigma_d2 > (md - 1.0) / (md * md))
      throw std::invalid_argument("sigma_d2 out of [0, (m-1)/m^2]");
  }
};

struct Domain {
  double lo = 0.0, hi = 1.0;
  bool integer = false;  // round solutions to integers

  Domain(double lo_, double hi_, bool integer_ = false)
      : lo(lo_), hi(hi_), integer(integer_) {
    if (!(lo < hi)) throw std::invalid_argument("domain requires lo < hi");
  }

  double clamp(double x) const {
    double v = std::min(hi, std::max(lo, x));
    if (integer) v = std::round(v);
    return v;
  }
};

struct CsaState {
  std::vector<double> a, b;      // current and probe solutions
  std::vector<double> e_a, e_b;  // energies
  double t_gen = 0.0, t_ac = 0.0;
  std::size_t k = 0;
  double best_solution = 0.0;
  double best_energy = std::numeric_limits<double>::infinity();
};

// Cauchy variate with scale t (Eq. 6 reduced to D = 1).
inline double sample_cauchy(double t, Rng& rng) {
  return t * std::tan(std::numbers::pi * (rng.next_open01() - 0.5));
}

// b_i = clamp(a_i + eps_i * t_gen) with eps_i ~ Cauchy(t_gen); the double
// temperature scaling follows the published generation rule literally.
inline void generate_probes(CsaState& state, const Domain& domain,
                            std::vector<Rng>& streams) {
  for (std::size_t i = 0; i < state.a.size(); ++i) {
    const double eps = sample_cauchy(state.t_gen, streams[i]);
    state.b[i] = domain.clamp(state.a[i] + eps * state.t_gen);
  }
}

// A_i = exp((E(a_i) - maxE)/t_ac) / gamma; all exponents <= 0.
inline double acceptance_probability(const CsaState& state, std::size_t i) {
  const double max_e = *std::max_element(state.e_a.begin(), state.e_a.end());
  double gamma = 0.0;
  for (double e : state.e_a) gamma += std::exp((e - max_e) / state.t_ac);
  return std::exp((state.e_a[i] - max_e) / state.t_ac) / gamma;
}

inline double acceptance_variance(const CsaState& state) {
  const std::size_t m = state.e_a.size();
  const double max_e = *std::max_element(state.e_a.begin(), state.e_a.end());
  double gamma = 0.0;
  for (double e : state.e_a) gamma += std::exp((e - max_e) / state.t_ac);
  double sum_sq = 0.0;
  for (double e : state.e_a) {
    const double A = std::exp((e - max_e) / state.t_ac) / gamma;
    sum_sq += A * A;
  }
  const double md = static_cast<double>(m);
  return sum_sq / md - 1.0 / (md * md);
}

inline void update_temperatures(CsaState& state, const CsaParams& params,
                                double sigma2) {
  state.t_ac *= sigma2 < params.sigma_d2 ? (1.0 - params.alpha)
                                         : (1.0 + params.alpha);
  state.t_gen *= params.gen_decay;
}

struct Evaluation {
  std::size_t iteration;
  std::size_t optimizer;
  double solution;
  double energy;
};

struct CsaResult {
  double best_solution = 0.0;
  double best_energy = std::numeric_limits<double>::infinity();
  std::vector<Evaluation> trace;  // one row per cost evaluation
};

// Runs N iterations with exactly m*N cost evaluations: the first iteration
// evaluates the initial solutions, each later iteration evaluates one probe
// per optimizer. Every evaluated energy (accepted or not) counts toward the
// returned best.
inline CsaResult minimize(const std::function<double(double)>& cost,
                          const Domain& domain, const CsaParams& params) {
  params.validate();
  Rng master(params.seed);
  std::vector<Rng> streams;
  streams.reserve(params.m);
  for (std::size_t i = 0; i < params.m; ++i)
    streams.push_back(master.substream(i));

  CsaState st;
  st.a.resize(params.m);
  st.b.resize(params.m);
  st.e_a.resize(params.m);
  st.e_b.resize(params.m);
  st.t_gen = params.t_gen0;
  st.t_ac = params.t_ac0;

  CsaResult res;
  const auto evaluate = [&](std::size_t iter, std::size_t i, double x) {
    double e;
    try {
      e = cost(x);
    } catch (const std::exception& ex) {
      throw std::runtime_error("cost evaluation failed at iteration " +
                               std::to_string(iter) + ", optimizer " +
                               std::to_string(i) + ": " + ex.what());
    }
    res.trace.push_back({iter, i, x, e});
    if (e < res.best_energy) {
      res.best_energy = e;
      res.best_solution = x;
    }
    return e;
  };

  for (std::size_t i = 0; i < params.m; ++i) {
    st.a[i] = domain.clamp(domain.lo +
                           master.next_unit() * (domain.hi - domain.lo));
    st.e_a[i] = evaluate(0, i, st.a[i]);
  }

  for (st.k = 1; st.k < params.n_iter; ++st.k) {
    generate_probes(st, domain, streams);
    for (std::size_t i = 0; i < params.m; ++i)
      st.e_b[i] = evaluate(st.k, i, st.b[i]);

    // acceptance probabilities from the current set, before any replacement
    std::vector<double> accept_p(params.m);
    for (std::size_t i = 0; i < params.m; ++i)
      accept_p[i] = acceptance_probability(st, i);
    const double sigma2 = acceptance_variance(st);

    for (std::size_t i = 0; i < params.m; ++i) {
      bool accept;
      if (st.e_b[i] < st.e_a[i]) {
        accept = true;
      } else {
        const double r = streams[i].next_unit();
        accept = params.paper_acceptance_rule ? (accept_p[i] < r)
                                              : (r < accept_p[i]);
      }
      if (accept) {
        st.a[i] = st.b[i];
        st.e_a[i] = st.e_b[i];
      }
    }
    update_temperatures(st, params, sigma2);
  }

  st.best_solution = res.best_solution;
  st.best_energy = res.best_energy;
  return res;
}

}  // namespace chunktune::csa
