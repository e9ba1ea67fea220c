#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "chunktune/model.hpp"

using namespace chunktune;

namespace {

std::string write_temp_model(const std::vector<float>& values) {
  static int counter = 0;
  std::string path = "model_tmp_" + std::to_string(counter++) + ".bin";
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  return path;
}

}  // namespace

TEST_CASE("ricker wavelet") {
  RickerSource src = RickerSource::at(20.0, {0, 0, 0});

  SECTION("peak amplitude 1 at t0") {
    CHECK(ricker(src.t0, src) == Catch::Approx(1.0).margin(1e-15));
  }
  SECTION("decays to zero for |tau| > 1 s") {
    CHECK(std::abs(ricker(src.t0 + 1.0, src)) < 1e-12);
    CHECK(std::abs(ricker(src.t0 - 1.0, src)) < 1e-12);
  }
  SECTION("closed form at tau = 0.025 s") {
    // frozen from an arbitrary-precision evaluation of the formula
    CHECK(ricker(src.t0 + 0.025, src) ==
          Catch::Approx(-0.33369079229646944).epsilon(1e-13));
  }
  SECTION("default delay") {
    CHECK(src.t0 == Catch::Approx(0.067523723711782955).epsilon(1e-13));
  }
}

TEST_CASE("grid invariants") {
  Grid3 g(5, 6, 7, 10.0, 10.0, 5.0, 3);
  CHECK(g.t1() == 11);
  CHECK(g.n_total() == 11 * 12 * 13);
  CHECK_THROWS_AS(Grid3(0, 1, 1, 1, 1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(Grid3(1, 1, 1, 0.0, 1, 1, 0), std::invalid_argument);

  SECTION("flattened index round-trips exhaustively up to 16^3") {
    for (std::size_t n : {1u, 3u, 16u}) {
      Grid3 grid(n, n, n, 1, 1, 1, 2);
      for (std::size_t idx = 0; idx < grid.n_total(); ++idx) {
        const auto c = grid.coords(idx);
        REQUIRE(grid.idx(c[0], c[1], c[2]) == idx);
      }
    }
  }
}

TEST_CASE("stability report") {
  Grid3 grid(10, 10, 10, 10.0, 10.0, 10.0, 0);

  SECTION("dx bound at the boundary") {
    VelocityModel m = build_two_layer_model(grid, 2000.0, 2500.0);
    AcquisitionGeometry geom;
    geom.source = RickerSource::at(20.0, {5, 5, 5});
    geom.ns = 10;
    geom.dt = 1e-3;
    const StabilityReport rep = check_stability(m, geom, 50.0, 4.0);
    CHECK(rep.dx_bound == Catch::Approx(10.0));
    CHECK(rep.dx_ok);  // dx = 10 m passes exactly at the bound
  }
  SECTION("dt bound, cmax = 2000") {
    VelocityModel m = build_two_layer_model(grid, 2000.0, 2000.0);
    AcquisitionGeometry geom;
    geom.source = RickerSource::at(20.0, {5, 5, 5});
    geom.ns = 10;
    geom.dt = 1e-3;
    const StabilityReport rep = check_stability(m, geom, 35.0, 4.0);
    CHECK(rep.dt_bound == Catch::Approx(1.8377629847393068e-3).epsilon(1e-12));
    CHECK(rep.dt_ok);
  }
  SECTION("dt bound fails for cmax = 4000 at dt = 1 ms") {
    VelocityModel m = build_two_layer_model(grid, 1400.0, 4000.0);
    AcquisitionGeometry geom;
    geom.source = RickerSource::at(20.0, {5, 5, 5});
    geom.ns = 10;
    geom.dt = 1e-3;
    const StabilityReport rep = check_stability(m, geom, 35.0, 4.0);
    CHECK(rep.dt_bound == Catch::Approx(0.91888149236965342e-3).epsilon(1e-12));
    CHECK_FALSE(rep.dt_ok);
  }
  SECTION("monotone in f_max and W") {
    VelocityModel m = build_two_layer_model(grid, 1400.0, 2000.0);
    AcquisitionGeometry geom;
    geom.source = RickerSource::at(20.0, {5, 5, 5});
    geom.ns = 10;
    geom.dt = 1e-3;
    bool prev_ok = true;
    for (double f_max : {20.0, 30.0, 40.0, 60.0, 100.0}) {
      const bool ok = check_stability(m, geom, f_max, 4.0).dx_ok;
      if (!prev_ok) CHECK_FALSE(ok);
      prev_ok = ok;
    }
    prev_ok = true;
    for (double W : {4.0, 6.0, 8.0, 16.0}) {
      const bool ok = check_stability(m, geom, 35.0, W).dx_ok;
      if (!prev_ok) CHECK_FALSE(ok);
      prev_ok = ok;
    }
  }
}

TEST_CASE("two-layer model") {
  SECTION("degenerate homogeneous") {
    Grid3 grid(4, 4, 4, 10, 10, 10, 2);
    VelocityModel m = build_two_layer_model(grid, 2000.0, 2000.0);
    CHECK(m.cmin == 2000.0);
    CHECK(m.cmax == 2000.0);
  }
  SECTION("paper velocities") {
    Grid3 grid(8, 8, 8, 10, 10, 10, 4);
    VelocityModel m = build_two_layer_model(grid, 1400.0, 2000.0);
    CHECK(m.cmin == 1400.0);
    CHECK(m.cmax == 2000.0);
  }
  SECTION("midpoint split for n3 = 4") {
    Grid3 grid(4, 4, 4, 10, 10, 10, 0);
    VelocityModel m = build_two_layer_model(grid, 1400.0, 2000.0);
    for (std::size_t i3 = 0; i3 < 4; ++i3)
      CHECK(m.c[grid.interior_idx(1, 1, i3)] == (i3 < 2 ? 1400.0 : 2000.0));
  }
  SECTION("cmin <= c <= cmax everywhere on small grids") {
    for (std::size_t wb : {0u, 2u}) {
      Grid3 grid(5, 4, 6, 10, 10, 10, wb);
      VelocityModel m = build_two_layer_model(grid, 1700.0, 1500.0);
      for (double v : m.c) {
        REQUIRE(v >= m.cmin);
        REQUIRE(v <= m.cmax);
      }
    }
  }
  SECTION("border replicates nearest interior value") {
    Grid3 grid(4, 4, 4, 10, 10, 10, 3);
    VelocityModel m = build_two_layer_model(grid, 1400.0, 2000.0);
    CHECK(m.c[grid.idx(0, 0, 0)] == 1400.0);                    // top corner
    CHECK(m.c[grid.idx(0, 0, grid.t3() - 1)] == 2000.0);        // bottom corner
  }
}

TEST_CASE("load_velocity_model") {
  Grid3 grid(2, 2, 2, 10, 10, 10, 1);

  SECTION("homogeneous file") {
    const std::string path = write_temp_model(std::vector<float>(8, 1500.0f));
    VelocityModel m = load_velocity_model(path, grid);
    CHECK(m.cmin == 1500.0);
    CHECK(m.cmax == 1500.0);
    CHECK(m.c.size() == grid.n_total());
    std::remove(path.c_str());
  }
  SECTION("non-positive velocity rejected") {
    std::vector<float> vals(8, 1500.0f);
    vals[3] = 0.0f;
    const std::string path = write_temp_model(vals);
    CHECK_THROWS_WITH(load_velocity_model(path, grid),
                      Catch::Matchers::ContainsSubstring("non-positive velocity"));
    std::remove(path.c_str());
  }
  SECTION("truncated file rejected") {
    const std::string path = write_temp_model(std::vector<float>(7, 1500.0f));
    CHECK_THROWS_WITH(load_velocity_model(path, grid),
                      Catch::Matchers::ContainsSubstring("size mismatch"));
    std::remove(path.c_str());
  }
  SECTION("missing file rejected") {
    CHECK_THROWS(load_velocity_model("no_such_file.bin", grid));
  }
}
