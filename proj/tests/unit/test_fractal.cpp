#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "gmt/errors.hpp"
#include "gmt/fractal.hpp"
#include "gmt/random.hpp"
#include "gmt/raster.hpp"
#include "oracles.hpp"

using namespace gmt;
using namespace gmt::fractal;

TEST_CASE("middle-thirds Cantor intervals") {
  const auto d0 = cantor_middle_thirds(0);
  REQUIRE(d0.intervals.size() == 1);
  CHECK(d0.intervals[0].a == 0.0);
  CHECK(d0.intervals[0].b == 1.0);

  const auto d2 = cantor_middle_thirds(2);
  REQUIRE(d2.intervals.size() == 4);
  const double want[4][2] = {{0, 1.0 / 9}, {2.0 / 9, 1.0 / 3}, {2.0 / 3, 7.0 / 9}, {8.0 / 9, 1}};
  for (int k = 0; k < 4; ++k) {
    CHECK(d2.intervals[k].a == doctest::Approx(want[k][0]).epsilon(1e-14));
    CHECK(d2.intervals[k].b == doctest::Approx(want[k][1]).epsilon(1e-14));
  }

  const auto d7 = cantor_middle_thirds(7);
  CHECK(d7.intervals.size() == 128);
  CHECK(d7.total_length() == doctest::Approx(std::pow(2.0 / 3.0, 7)).epsilon(1e-12));
  CHECK(d7.total_length() == doctest::Approx(0.05853).epsilon(1e-4));

  CHECK_THROWS_AS(cantor_middle_thirds(-1), ArgumentError);
  CHECK_THROWS_AS(cantor_middle_thirds(21), ArgumentError);
}

TEST_CASE("Cantor intervals match exact rational endpoints at every depth") {
  for (int depth = 0; depth <= 12; ++depth) {
    const auto got = cantor_middle_thirds(depth);
    const auto exact = oracle::cantor_numerators(depth);
    REQUIRE(got.intervals.size() == exact.size());
    const double den = std::pow(3.0, depth);
    for (std::size_t k = 0; k < exact.size(); ++k) {
      CHECK(std::abs(got.intervals[k].a - exact[k][0] / den) <= 1e-12);
      CHECK(std::abs(got.intervals[k].b - exact[k][1] / den) <= 1e-12);
    }
    CHECK(std::abs(got.total_length() - std::pow(2.0 / 3.0, depth)) <= 1e-12);
    got.validate();
  }
}

TEST_CASE("fat Cantor lengths") {
  CHECK(fat_cantor(1).total_length() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(fat_cantor(4).total_length() == doctest::Approx(0.53125).epsilon(1e-12));
  CHECK(fat_cantor(20).total_length() == doctest::Approx(0.5).epsilon(1e-5));
  for (int depth = 0; depth <= 20; ++depth) {
    const auto f = fat_cantor(depth);
    CHECK(f.intervals.size() == (std::size_t{1} << depth));
    CHECK(std::abs(f.total_length() - oracle::fat_cantor_length(depth)) <= 1e-12);
    CHECK(std::abs(fat_cantor_length(depth) - oracle::fat_cantor_length(depth)) <= 1e-12);
    f.validate();
  }
  // (1 - 1/4 - 2/16) / 4
  CHECK(fat_cantor(2).max_length() == doctest::Approx(0.15625).epsilon(1e-12));
  CHECK_THROWS_AS(fat_cantor(21), ArgumentError);
}

TEST_CASE("IntervalSet validation") {
  IntervalSet bad{{{0.0, 0.5}, {0.4, 0.9}}, 1};
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  IntervalSet outside{{{0.5, 1.5}}, 0};
  CHECK_THROWS_AS(outside.validate(), ArgumentError);
  CHECK(IntervalSet::singleton(0.0).is_degenerate());
  CHECK_NOTHROW(IntervalSet::singleton(0.0).validate());
}

TEST_CASE("product point clouds") {
  const auto single = product_point_cloud(cantor_middle_thirds(0), cantor_middle_thirds(0), 1, 3);
  REQUIRE(single.size() == 1);
  CHECK(single.weight(0) == 1.0);
  CHECK(single.box().contains(single.point(0)));

  const auto c6 = cantor_middle_thirds(6);
  const auto cc = product_point_cloud(c6, c6, 1, 3);
  CHECK(cc.size() == 4096);
  REQUIRE(cc.claimed_exponent);
  CHECK(*cc.claimed_exponent == doctest::Approx(2 * std::log(2.0) / std::log(3.0)).epsilon(1e-12));
  CHECK(*cc.claimed_exponent == doctest::Approx(1.26186).epsilon(1e-5));
  cc.validate();
  double sum = 0.0;
  for (double w : cc.weights()) sum += w;
  CHECK(std::abs(sum - 1.0) <= 1e-12);

  const auto line = product_point_cloud(c6, IntervalSet::singleton(0.0), 1, 3);
  CHECK(line.size() == 64);
  REQUIRE(line.claimed_exponent);
  CHECK(*line.claimed_exponent == doctest::Approx(0.63093).epsilon(1e-5));
  for (std::size_t i = 0; i < line.size(); ++i) CHECK(line.point(i)[1] == 0.0);

  // every point lies in its product cell
  std::size_t k = 0;
  for (const auto& r : c6.intervals) {
    for (const auto& c : c6.intervals) {
      const auto p = cc.point(k++);
      CHECK((p[0] >= r.a && p[0] <= r.b && p[1] >= c.a && p[1] <= c.b));
    }
  }

  CHECK(product_point_cloud(c6, c6, 2, 9).coords() == product_point_cloud(c6, c6, 2, 9).coords());
  CHECK(product_point_cloud(c6, c6, 2, 9).coords() != product_point_cloud(c6, c6, 2, 10).coords());
  CHECK_THROWS_AS(product_point_cloud(c6, c6, 0, 1), ArgumentError);
}

TEST_CASE("separated lattices") {
  const auto q2 = separated_lattice(2, 0);
  CHECK(q2.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) CHECK(distance(q2.point(i), q2.point(j)) >= 0.5);
  }
  const auto q16 = separated_lattice(16, 1);
  CHECK(q16.size() == 256);
  const auto scaled = q16.scaled(1.0 / 16);
  for (std::size_t i = 0; i < scaled.size(); ++i) CHECK(Box::cube(2, 0, 1).contains(scaled.point(i)));
  CHECK(thickening_radius(16, 1.5) == doctest::Approx(0.02480).epsilon(1e-3));
  CHECK(16 * thickening_radius(16, 1.5) == doctest::Approx(std::pow(16.0, -1.0 / 3)).epsilon(1e-12));
  CHECK_THROWS_AS(separated_lattice(1, 0), ArgumentError);
}

TEST_CASE("separated lattices keep separation for 100 seeds") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = separated_lattice(6, seed);
    REQUIRE(p.min_separation);
    CHECK_NOTHROW(p.validate());
  }
}

TEST_CASE("Frostman ratios") {
  const auto single = PointSet::uniform(2, {0.5, 0.5}, Box::cube(2, 0, 1));
  const double one[] = {1.0};
  CHECK(frostman_ratio(single, 1.0, one) == doctest::Approx(1.0));

  std::vector<double> grid;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      grid.push_back((i + 0.5) / 64);
      grid.push_back((j + 0.5) / 64);
    }
  }
  const auto uni = PointSet::uniform(2, grid, Box::cube(2, 0, 1));
  std::vector<double> radii;
  for (int k = 0; k <= 6; ++k) radii.push_back(std::ldexp(1.0, -k));
  CHECK(frostman_ratio(uni, 2.0, radii) <= 16.0);

  const auto c6 = cantor_middle_thirds(6);
  const auto cc = product_point_cloud(c6, c6, 1, 5);
  std::vector<double> cr;
  for (double r = 1.0; r >= std::pow(3.0, -6) - 1e-12; r /= 2) cr.push_back(r);
  const auto prof_a = frostman_profile(cc, 1.2619, cr);
  const auto prof_b = frostman_profile(cc, 1.6, cr);
  CHECK(*std::max_element(prof_a.begin(), prof_a.end()) < 10.0);
  CHECK(prof_b.back() >= 4.0 * prof_b.front());
  CHECK_THROWS_AS(frostman_ratio(PointSet(2, {}, {}, Box::cube(2, 0, 1)), 1.0, one), ArgumentError);
}

TEST_CASE("box dimension") {
  Rng rng = make_rng(1);
  std::vector<double> coords;
  for (int k = 0; k < 20000; ++k) coords.push_back(uniform01(rng));
  const auto uni = PointSet::uniform(2, coords, Box::cube(2, 0, 1));
  std::vector<double> scales;
  for (int k = 2; k <= 6; ++k) scales.push_back(std::ldexp(1.0, -k));
  CHECK(box_dimension(uni, scales) == doctest::Approx(2.0).epsilon(0.05));

  const auto c7 = cantor_middle_thirds(7);
  std::vector<double> s3;
  for (int k = 1; k <= 6; ++k) s3.push_back(std::pow(3.0, -k));
  CHECK(std::abs(box_dimension(product_point_cloud(c7, c7, 1, 2), s3) - 1.26) <= 0.08);
  CHECK(std::abs(box_dimension(product_point_cloud(c7, IntervalSet::singleton(0.0), 1, 2), s3) - 0.63) <= 0.08);

  const auto single = PointSet::uniform(2, {0.5, 0.5}, Box::cube(2, 0, 1));
  CHECK_THROWS_AS(box_dimension(single, scales), FitError);
  const double two[] = {0.5, 0.25};
  CHECK_THROWS_AS(box_dimension(uni, two), ArgumentError);
}

TEST_CASE("Perron trees") {
  const auto base = base_triangle(1.0);
  CHECK(base.triangles.size() == 1);
  CHECK(base.triangles[0].area() == doctest::Approx(0.5));

  for (int stage = 1; stage <= 6; ++stage) {
    const auto t = perron_tree(stage, 1.0);
    CHECK(t.direction_count == (1 << stage));
    CHECK(t.triangles.size() == static_cast<std::size_t>(1 << stage));
    for (const auto& tri : t.triangles) CHECK(tri.area() > 1e-12);
    const auto segs = t.direction_segments();
    REQUIRE(segs.size() == static_cast<std::size_t>(t.direction_count));
    std::set<long long> slopes;
    for (const auto& s : segs) {
      CHECK(std::hypot(s.b[0] - s.a[0], s.b[1] - s.a[1]) >= 1.0 - 1e-12);
      CHECK(s.b[1] - s.a[1] == doctest::Approx(1.0));
      slopes.insert(std::llround((s.b[0] - s.a[0]) * 1e9));
      for (int k = 0; k < 100; ++k) {
        const double u = k / 99.0;
        CHECK(t.contains({s.a[0] + u * (s.b[0] - s.a[0]), s.a[1] + u * (s.b[1] - s.a[1])}));
      }
    }
    CHECK(slopes.size() == segs.size());
  }
  CHECK_THROWS_AS(perron_tree(0, 1.0), ArgumentError);
  CHECK_THROWS_AS(perron_tree(9, 1.0), ArgumentError);
}

TEST_CASE("Perron union area shrinks") {
  const raster::GridSpec grid(Box({-0.5, -0.25}, {1.0, 1.25}), 1024);
  auto area = [&](const TriangleSet& t) {
    std::vector<raster::Band> bands;
    for (const auto& tri : t.triangles) bands.push_back({raster::TriangleShape{tri}, grid.max_cell_size() / 4});
    return raster::union_of_bands(bands, grid).area();
  };
  const double a0 = area(base_triangle(1.0));
  double prev = a0;
  CHECK(area(perron_tree(1, 1.0)) < a0);
  for (int stage = 1; stage <= 6; ++stage) {
    const double a = area(perron_tree(stage, 1.0));
    CHECK(a <= prev + 1e-12);
    prev = a;
    if (stage == 5) CHECK(a <= 0.35 * a0);
  }
}

TEST_CASE("CSV export") {
  std::ostringstream os;
  write_csv(os, cantor_middle_thirds(1));
  CHECK(os.str().substr(0, 4) == "a,b\n");
  std::ostringstream ps;
  write_csv(ps, separated_lattice(2, 0));
  std::string header;
  std::istringstream in(ps.str());
  std::getline(in, header);
  CHECK(header == "x,y,weight");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 4);
}
