#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "gmt/errors.hpp"
#include "gmt/fractal.hpp"
#include "gmt/random.hpp"
#include "gmt/raster.hpp"
#include "gmt/spectral.hpp"
#include "oracles.hpp"

using namespace gmt;
using namespace gmt::spectral;
using raster::GridSpec;
using std::numbers::pi;

namespace {

GridSpec square_grid(double lo, double hi, int n) { return GridSpec(Box::cube(2, lo, hi), n); }

GriddedDensity dirac(const GridSpec& grid, std::size_t cell) {
  GriddedDensity d(grid);
  d.values[cell] = 1.0 / grid.cell_volume();
  d.total_mass = 1.0;
  return d;
}

GriddedDensity random_density(const GridSpec& grid, std::uint64_t seed) {
  GriddedDensity d(grid);
  Rng rng = make_rng(seed);
  for (auto& v : d.values) v = uniform01(rng) < 0.1 ? uniform01(rng) : 0.0;
  d.total_mass = d.mass();
  return d;
}

double sum_squares(const std::vector<LpNorm>& norms) {
  double s = 0.0;
  for (const auto& p : norms) s += p.norm * p.norm;
  return s;
}

}  // namespace

TEST_CASE("point clouds on a grid") {
  const auto grid = square_grid(0, 1, 64);
  const auto one = fractal::PointSet::uniform(2, {0.3, 0.7}, Box::cube(2, 0, 1));
  const auto d1 = grid_density_from_points(one, grid);
  std::size_t nonzero = 0;
  for (double v : d1.values) nonzero += v > 0;
  CHECK(nonzero == 1);
  CHECK(d1.mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d1.values[44 * 64 + 19] * grid.cell_volume() == doctest::Approx(1.0));

  const auto two = fractal::PointSet::uniform(2, {0.3, 0.7, 0.301, 0.701}, Box::cube(2, 0, 1));
  const auto d2 = grid_density_from_points(two, grid);
  CHECK(d2.cell_mass(44 * 64 + 19) == doctest::Approx(1.0));

  const auto c6 = fractal::cantor_middle_thirds(6);
  const auto cc = fractal::product_point_cloud(c6, c6, 1, 8);
  const auto g1024 = square_grid(0, 1, 1024);
  const auto dc = grid_density_from_points(cc, g1024);
  std::set<std::size_t> cells;
  for (std::size_t i = 0; i < cc.size(); ++i) {
    const auto p = cc.point(i);
    const auto ix = std::min<std::size_t>(1023, static_cast<std::size_t>(p[0] * 1024));
    const auto iy = std::min<std::size_t>(1023, static_cast<std::size_t>(p[1] * 1024));
    cells.insert(iy * 1024 + ix);
  }
  nonzero = 0;
  for (double v : dc.values) nonzero += v > 0;
  CHECK(nonzero == cells.size());
  CHECK(std::abs(dc.mass() - 1.0) <= 1e-12);
  CHECK_NOTHROW(dc.validate());

  const auto outside = fractal::PointSet::uniform(2, {1.5, 0.5}, Box::cube(2, 0, 2));
  CHECK_THROWS_AS(grid_density_from_points(outside, grid), ArgumentError);
}

TEST_CASE("density validation") {
  GriddedDensity d(square_grid(0, 1, 16));
  d.values[3] = -1.0;
  CHECK_THROWS_AS(d.validate(), ArgumentError);
  d.values[3] = 256.0;
  d.total_mass = 2.0;
  CHECK_THROWS_AS(d.validate(), ArgumentError);
  d.total_mass = 1.0;
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("LP windows form a partition of unity") {
  for (int j_max : {3, 6, 9}) {
    for (double r = 0.0; r <= 1.5 * std::ldexp(1.0, j_max); r += 0.0137) {
      double s = 0.0;
      for (int j = 0; j <= j_max; ++j) {
        const double w = lp_window(j, j_max, r);
        CHECK(w >= -1e-15);
        CHECK(w <= 1.0 + 1e-15);
        s += w;
      }
      CHECK(std::abs(s - 1.0) <= 1e-10);
    }
  }
  // pieces are supported inside [2^(j-1), 2^(j+2)]
  for (int j = 1; j < 6; ++j) {
    CHECK(lp_window(j, 8, std::ldexp(1.0, j - 1) * 0.999) == 0.0);
    CHECK(lp_window(j, 8, std::ldexp(1.0, j + 2) * 1.001) == 0.0);
    CHECK(lp_window(j, 8, 1.5 * std::ldexp(1.0, j)) == doctest::Approx(1.0));
  }
  CHECK(lp_window(0, 8, 0.0) == 1.0);
}

TEST_CASE("LP norms match a direct DFT") {
  const int n = 32;
  const auto grid = square_grid(0, 1, n);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto d = random_density(grid, seed);
    std::vector<std::vector<double>> f(n, std::vector<double>(n));
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) f[j][i] = d.values[j * n + i];
    }
    const auto direct = oracle::lp_norms_direct(f, 4, grid.cell_volume(),
                                                [](int j, double r) { return lp_window(j, 4, r); });
    const auto got = lp_projection_norms(d, 4);
    REQUIRE(got.size() == direct.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      CHECK(got[k].j == static_cast<int>(k));
      CHECK(got[k].norm == doctest::Approx(direct[k]).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(lp_projection_norms(random_density(grid, 1), 5), ArgumentError);
}

TEST_CASE("Parseval consistency") {
  const auto grid = square_grid(0, 1, 256);
  std::vector<GriddedDensity> tests{dirac(grid, 128 * 256 + 77), random_density(grid, 4)};
  GriddedDensity flat(grid);
  std::fill(flat.values.begin(), flat.values.end(), 1.0);
  flat.total_mass = 1.0;
  tests.push_back(flat);
  const auto c5 = fractal::cantor_middle_thirds(5);
  tests.push_back(grid_density_from_points(fractal::product_point_cloud(c5, c5, 4, 1), grid));
  for (const auto& d : tests) {
    const double ratio = sum_squares(lp_projection_norms(d, 7)) / (d.l2_norm() * d.l2_norm());
    CHECK(ratio >= 0.98);
    CHECK(ratio <= 1.02);
  }
}

TEST_CASE("Dirac density has a flat spectrum") {
  const auto grid = square_grid(0, 1, 1024);
  const auto norms = lp_projection_norms(dirac(grid, 500 * 1024 + 300), 9);
  const auto fit = fit_lp_decay(norms, 3, 8);
  CHECK(std::abs(fit.slope - 1.0) <= 0.15);
  CHECK(fit.abscissae.size() == 6);
}

TEST_CASE("uniform density lives in the lowest piece") {
  const auto grid = square_grid(0, 1, 256);
  GriddedDensity flat(grid);
  std::fill(flat.values.begin(), flat.values.end(), 1.0);
  flat.total_mass = 1.0;
  const auto norms = lp_projection_norms(flat, 7);
  CHECK(norms[0].norm == doctest::Approx(1.0));
  for (std::size_t j = 2; j < norms.size(); ++j) CHECK(norms[j].norm <= 1e-6 * norms[0].norm);
}

TEST_CASE("Cantor-product measure decays at the dimension rate") {
  const auto grid = square_grid(0, 1, 2048);
  const auto c6 = fractal::cantor_middle_thirds(6);
  const auto mu = grid_density_from_points(fractal::product_point_cloud(c6, c6, 16, 0), grid);
  const auto fit = fit_lp_decay(lp_projection_norms(mu, 10), 3, 8);
  const double a = 2 * std::log(2.0) / std::log(3.0);
  CHECK(std::abs(fit.slope - (2 - a) / 2) <= 0.10);
}

TEST_CASE("decay fits") {
  const auto fit = fit_log2({1, 2, 3, 4}, {2, 4, 8, 16});
  CHECK(fit.slope == doctest::Approx(1.0));
  CHECK(fit.intercept == doctest::Approx(0.0).scale(1));
  CHECK(fit.residual <= 1e-12);
  CHECK(fit.fitted_log2(5) == doctest::Approx(5.0));
  CHECK_THROWS_AS(fit_log2({1}, {1}), FitError);
  CHECK_THROWS_AS(fit_log2({1, 2}, {1, -1}), FitError);

  std::ostringstream os;
  write_csv(os, fit);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "level,norm,fitted_value");
  std::getline(in, line);
  CHECK(line == "1,2,2");

  const auto grid = square_grid(0, 1, 128);
  const auto d = random_density(grid, 9);
  const auto a = fit_lp_decay(lp_projection_norms(d, 6), 2, 5);
  const auto b = fit_lp_decay(lp_projection_norms(d, 6), 2, 5);
  CHECK(a.slope == b.slope);
  CHECK(a.norms == b.norms);
}

TEST_CASE("incidence density of a single circle") {
  const auto grid = square_grid(-2, 2, 512);
  const raster::Band band{raster::Shape{raster::Circle{{0, 0}, 1}}, 0.05};
  const double w[] = {1.0};
  const auto inc = incidence_density(std::span(&band, 1), w, grid);
  CHECK(inc.empty_bands == 0);
  CHECK(inc.nu.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(inc.nu.total_mass == doctest::Approx(1.0).epsilon(1e-12));
  const auto r = raster::rasterize_band(band, grid);
  const double level = 1.0 / r.area();
  for (std::size_t j = 0; j < 512; ++j) {
    for (int i = 0; i < 512; ++i) {
      const double v = inc.nu.values[j * 512 + i];
      if (r.test(j, i)) {
        CHECK(v == doctest::Approx(level));
      } else {
        CHECK(v == 0.0);
      }
    }
  }
}

TEST_CASE("incidence density is linear in the bands") {
  const auto grid = square_grid(-4, 4, 512);
  const raster::Band bands[] = {{raster::Shape{raster::Circle{{-2, 0}, 1}}, 0.05},
                                {raster::Shape{raster::Circle{{2, 0}, 1}}, 0.05}};
  const double w[] = {0.5, 0.5};
  const auto inc = incidence_density(bands, w, grid);
  double left = 0.0, right = 0.0;
  for (std::size_t j = 0; j < 512; ++j) {
    for (int i = 0; i < 512; ++i) (i < 256 ? left : right) += inc.nu.cell_mass(j * 512 + i);
  }
  CHECK(left == doctest::Approx(0.5));
  CHECK(right == doctest::Approx(0.5));

  const raster::Band missing[] = {bands[0], {raster::Shape{raster::Circle{{40, 0}, 1}}, 0.05}};
  const auto dropped = incidence_density(missing, w, grid);
  CHECK(dropped.empty_bands == 1);
  CHECK(dropped.nu.mass() == doctest::Approx(0.5));

  const raster::Band none[] = {missing[1]};
  const double one[] = {1.0};
  CHECK_THROWS_AS(incidence_density(none, one, grid), EmptyLevelError);
  const raster::Band thin[] = {{raster::Shape{raster::Circle{{0, 0}, 1}}, grid.max_cell_size() / 2}};
  CHECK_THROWS_AS(incidence_density(thin, one, grid), ArgumentError);
}

TEST_CASE("incidence density is supported in the union") {
  const auto grid = square_grid(-1.5, 2.5, 1024);
  const auto c4 = fractal::cantor_middle_thirds(4);
  const auto pts = fractal::product_point_cloud(c4, c4, 1, 2);
  const phase::PhaseSpec spec(phase::PhaseKind::unit_distance, 2);
  const std::vector<double> levels(pts.size(), 1.0);
  const auto inc = incidence_density(spec, pts, levels, 0.01, grid);
  CHECK(inc.empty_bands == 0);
  CHECK(inc.nu.mass() == doctest::Approx(1.0).epsilon(1e-10));

  std::vector<raster::Band> bands;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bands.push_back({raster::PhaseLevel{spec, {pts.point(i)[0], pts.point(i)[1]}, 1.0}, 0.01});
  }
  const auto u = raster::union_of_bands(bands, grid);
  std::size_t outside = 0, support = 0;
  for (std::size_t j = 0; j < 1024; ++j) {
    for (int i = 0; i < 1024; ++i) {
      if (inc.nu.values[j * 1024 + i] > 0) {
        ++support;
        outside += !u.test(j, i);
      }
    }
  }
  CHECK(outside == 0);
  CHECK(support == u.filled_count());
}

TEST_CASE("mollification") {
  const auto grid = square_grid(0, 1, 256);
  GriddedDensity flat(grid);
  std::fill(flat.values.begin(), flat.values.end(), 1.0);
  flat.total_mass = 1.0;
  const double eps[] = {0.1, 0.05, 0.02};
  for (const auto& m : mollified_l2(flat, eps)) {
    CHECK(m.norm == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(m.mass - 1.0) <= 1e-6);
  }

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto d = random_density(grid, seed);
    for (double e : eps) {
      const auto lam = mollify(d, e);
      CHECK(std::abs(lam.total_mass - d.total_mass) <= 1e-6 * d.total_mass);
      CHECK(std::abs(lam.mass() - lam.total_mass) <= 1e-9 * lam.total_mass);
      for (double v : lam.values) CHECK(v >= 0.0);
      // convolution with a probability kernel cannot raise the L2 norm
      CHECK(lam.l2_norm() <= d.l2_norm() * (1 + 1e-9));
    }
  }

  // a Dirac spreads over the eps-disc
  const auto lam = mollify(dirac(grid, 128 * 256 + 128), 0.05);
  for (std::size_t j = 0; j < 256; ++j) {
    for (int i = 0; i < 256; ++i) {
      const double r = std::hypot(grid.center(0, i) - grid.center(0, 128), grid.center(1, static_cast<int>(j)) - grid.center(1, 128));
      if (r > 0.05 + 1e-12) CHECK(lam.values[j * 256 + i] <= 1e-9);
    }
  }
  CHECK(lam.values[128 * 256 + 128] > 0);

  CHECK_THROWS_AS(mollify(flat, grid.max_cell_size()), ArgumentError);
  CHECK_THROWS_AS(mollify(flat, 0.6), ArgumentError);
}

TEST_CASE("mollified incidence norms: bounded vs blow-up") {
  const auto grid = square_grid(-1.5, 2.5, 2048);
  const phase::PhaseSpec spec(phase::PhaseKind::unit_distance, 2);
  const auto c6 = fractal::cantor_middle_thirds(6);
  const double eps[] = {0.04, 0.02, 0.01};

  const auto cc = fractal::product_point_cloud(c6, c6, 1, 0);
  const auto nu_cc = incidence_density(spec, cc, std::vector<double>(cc.size(), 1.0), 0.004, grid).nu;
  const auto m_cc = mollified_l2(nu_cc, eps);
  double max_cc = 0.0;
  for (std::size_t k = 1; k < 3; ++k) {
    const double growth = m_cc[k].norm / m_cc[k - 1].norm;
    CHECK(growth <= 1.25);
    max_cc = std::max(max_cc, growth);
  }

  const auto line = fractal::product_point_cloud(c6, fractal::IntervalSet::singleton(0.0), 1, 0);
  const auto nu_line = incidence_density(spec, line, std::vector<double>(line.size(), 1.0), 0.004, grid).nu;
  const auto m_line = mollified_l2(nu_line, eps);
  // dimension count: growth 2^((2 - 1.631) / 2) = 1.137 per halving
  for (std::size_t k = 1; k < 3; ++k) {
    const double growth = m_line[k].norm / m_line[k - 1].norm;
    CHECK(growth >= 1.10);
    CHECK(growth >= max_cc + 0.05);
  }
}

TEST_CASE("surface measure at zero frequency") {
  const double zero2[] = {0.0, 0.0};
  const double zero3[] = {0.0, 0.0, 0.0};
  CHECK(fourier_magnitude(SurfaceMode::circle_2d, zero2) == doctest::Approx(surface_mass(SurfaceMode::circle_2d)));
  CHECK(fourier_magnitude(SurfaceMode::curve_3d, zero3) == doctest::Approx(surface_mass(SurfaceMode::curve_3d)));
  CHECK(surface_mass(SurfaceMode::circle_2d) > 0);
  CHECK(parse_surface_mode("curve-3d") == SurfaceMode::curve_3d);
  CHECK(to_string(SurfaceMode::circle_2d) == "circle-2d");
  CHECK_THROWS_AS(parse_surface_mode("sphere"), ArgumentError);
}

TEST_CASE("surface Fourier decay") {
  std::vector<double> freqs;
  for (int k = 3; k <= 9; ++k) freqs.push_back(std::ldexp(1.0, k));
  const auto circle = surface_fourier_decay(SurfaceMode::circle_2d, freqs, 256, 0);
  CHECK(std::abs(circle.slope + 0.5) <= 0.07);
  const auto curve = surface_fourier_decay(SurfaceMode::curve_3d, freqs, kDefaultDirections, 0);
  CHECK(std::abs(curve.slope + 1.0 / 3.0) <= 0.07);
  const auto again = surface_fourier_decay(SurfaceMode::curve_3d, freqs, kDefaultDirections, 0);
  CHECK(again.slope == curve.slope);

  const double narrow[] = {8, 16};
  CHECK_THROWS_AS(surface_fourier_decay(SurfaceMode::circle_2d, narrow, 64, 0), FitError);
  CHECK_THROWS_AS(surface_fourier_decay(SurfaceMode::circle_2d, freqs, 8, 0), ArgumentError);
}
