#pragma once

// Flat key=value run configuration shared by every CLI command. Unknown
// keys and malformed values are rejected before any computation starts.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace chunktune {

struct RunConfig {
  // grid
  std::size_t n1 = 101, n2 = 101, n3 = 101;
  double dx1 = 10.0, dx2 = 10.0, dx3 = 10.0;
  std::size_t wb = 50;

  // velocity: file takes precedence over the two-layer spec when set
  std::string velocity_file;
  double v_top = 1400.0;
  double v_bottom = 2000.0;

  // source / time axis
  double f_peak = 20.0;
  double f_max = 0.0;  // 0 -> 2.5 * f_peak
  double t0 = -1.0;    // <0 -> 6/(pi f sqrt(2))
  double dt = 1e-3;
  std::size_t ns = 3501;
  std::size_t source_i1 = 0, source_i2 = 0;  // 0 -> centered
  std::size_t source_i3 = 2;

  // receivers: horizontal grid at receiver_depth, every receiver_stride cells
  std::size_t receiver_depth = 2;
  std::size_t receiver_stride = 2;

  std::size_t shots = 1;

  // scheduling
  std::string scheduler = "tuned";  // static|dynamic|guided|auto|tuned
  std::size_t chunk = 0;            // 0 -> policy default

  // CSA (Table-2 defaults)
  double csa_tgen0 = 100.0;
  double csa_tac0 = 0.9;
  std::size_t csa_iters = 40;
  std::size_t csa_m = 4;
  double csa_alpha = 0.005;
  double csa_sigma_d2 = -1.0;  // <0 -> 0.99*(m-1)/m^2
  double csa_gen_decay = 0.99999;
  std::size_t tune_lo = 50;

  // checkpointing
  std::size_t n_b = 16;
  std::size_t n_c = 0;  // recorded for provenance only

  std::size_t threads = 0;  // 0 -> CHUNKTUNE_THREADS or hardware count
  std::uint64_t seed = 1;
  std::size_t reps = 5;
  std::string output_dir = "out";

  // validation
  double mse_tol = 1e-3;
  double stability_w = 4.0;
  double validate_velocity = 2000.0;
  double validate_offset_m = 200.0;
  bool force = false;

  bool operator==(const RunConfig&) const = default;

  template <class Visitor>
  static void for_each_field(Visitor&& v) {
    v("n1", &RunConfig::n1);
    v("n2", &RunConfig::n2);
    v("n3", &RunConfig::n3);
    v("dx1", &RunConfig::dx1);
    v("dx2", &RunConfig::dx2);
    v("dx3", &RunConfig::dx3);
    v("wb", &RunConfig::wb);
    v("velocity_file", &RunConfig::velocity_file);
    v("v_top", &RunConfig::v_top);
    v("v_bottom", &RunConfig::v_bottom);
    v("f_peak", &RunConfig::f_peak);
    v("f_max", &RunConfig::f_max);
    v("t0", &RunConfig::t0);
    v("dt", &RunConfig::dt);
    v("ns", &RunConfig::ns);
    v("source_i1", &RunConfig::source_i1);
    v("source_i2", &RunConfig::source_i2);
    v("source_i3", &RunConfig::source_i3);
    v("receiver_depth", &RunConfig::receiver_depth);
    v("receiver_stride", &RunConfig::receiver_stride);
    v("shots", &RunConfig::shots);
    v("scheduler", &RunConfig::scheduler);
    v("chunk", &RunConfig::chunk);
    v("csa_tgen0", &RunConfig::csa_tgen0);
    v("csa_tac0", &RunConfig::csa_tac0);
    v("csa_iters", &RunConfig::csa_iters);
    v("csa_m", &RunConfig::csa_m);
    v("csa_alpha", &RunConfig::csa_alpha);
    v("csa_sigma_d2", &RunConfig::csa_sigma_d2);
    v("csa_gen_decay", &RunConfig::csa_gen_decay);
    v("tune_lo", &RunConfig::tune_lo);
    v("n_b", &RunConfig::n_b);
    v("n_c", &RunConfig::n_c);
    v("threads", &RunConfig::threads);
    v("seed", &RunConfig::seed);
    v("reps", &RunConfig::reps);
    v("output_dir", &RunConfig::output_dir);
    v("mse_tol", &RunConfig::mse_tol);
    v("stability_w", &RunConfig::stability_w);
    v("validate_velocity", &RunConfig::validate_velocity);
    v("validate_offset_m", &RunConfig::validate_offset_m);
    v("force", &RunConfig::force);
  }
};

namespace detail {

inline void parse_value(const std::string& key, const std::string& text,
                        std::string& out) {
  (void)key;
  out = text;
}

inline void parse_value(const std::string& key, const std::string& text,
                        bool& out) {
  if (text == "true" || text == "1")
    out = true;
  else if (text == "false" || text == "0")
    out = false;
  else
    throw std::invalid_argument("config key '" + key + "': expected boolean, got '" +
                                text + "'");
}

template <class T>
void parse_value(const std::string& key, const std::string& text, T& out) {
  std::istringstream ss(text);
  T v{};
  ss >> v;
  if (ss.fail() || !ss.eof())
    throw std::invalid_argument("config key '" + key + "': malformed value '" +
                                text + "'");
  out = v;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline void apply_config_line(RunConfig& cfg, const std::string& key,
                              const std::string& value) {
  bool found = false;
  RunConfig::for_each_field([&](const char* name, auto member) {
    if (key == name) {
      found = true;
      detail::parse_value(key, value, cfg.*member);
    }
  });
  if (!found) throw std::invalid_argument("unknown config key: " + key);
}

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    apply_config_line(cfg, detail::trim(line.substr(0, eq)),
                      detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  RunConfig::for_each_field([&](const char* name, auto member) {
    using T = std::decay_t<decltype(cfg.*member)>;
    out << name << " = ";
    if constexpr (std::is_same_v<T, bool>)
      out << (cfg.*member ? "true" : "false");
    else
      out << cfg.*member;
    out << '\n';
  });
  return out.str();
}

}  // namespace chunktune
