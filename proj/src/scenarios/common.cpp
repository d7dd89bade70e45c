#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "gmt/errors.hpp"
#include "gmt/scenarios.hpp"
#include "internal.hpp"

namespace gmt::scenarios {

namespace detail {

ExperimentReport start_report(const std::string& id, const ParamTable& p, std::uint64_t seed) {
  ExperimentReport r;
  r.scenario_id = id;
  r.params = p;
  r.seed = seed;
  return r;
}

void save_pgm(ExperimentReport& report, const std::filesystem::path& out, const std::string& name,
              const raster::GridRaster& raster) {
  if (out.empty()) return;
  std::filesystem::create_directories(out);
  std::ofstream os(out / name, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + (out / name).string());
  raster::write_pgm(os, raster);
  report.artifacts.push_back(name);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

raster::GridSpec square_grid(const ParamTable& p) {
  return raster::GridSpec(Box::cube(2, p.as_double("box_lo"), p.as_double("box_hi")), p.as_int("n"));
}

double max_relative_step(const std::vector<double>& values) {
  double m = 0.0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    m = std::max(m, std::abs(values[k] - values[k - 1]) / std::abs(values[k - 1]));
  }
  return m;
}

}  // namespace detail

double circle_union_area(const fractal::PointSet& centers, double radius, double delta,
                         const raster::GridSpec& grid) {
  std::vector<raster::Band> bands;
  bands.reserve(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const auto c = centers.point(i);
    bands.push_back({raster::Circle{{c[0], c[1]}, radius}, delta});
  }
  return raster::union_of_bands(bands, grid).area();
}

double square_union_area(const fractal::PointSet& centers, double half_side, double delta,
                         const raster::GridSpec& grid) {
  std::vector<raster::Band> bands;
  bands.reserve(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const auto c = centers.point(i);
    bands.push_back({raster::SquareBoundary{{c[0], c[1]}, half_side}, delta});
  }
  return raster::union_of_bands(bands, grid).area();
}

fractal::PointSet left_endpoint_grid(const fractal::IntervalSet& rows, const fractal::IntervalSet& cols) {
  std::vector<double> coords;
  for (const auto& r : rows.intervals) {
    for (const auto& c : cols.intervals) {
      coords.push_back(r.a);
      coords.push_back(c.a);
    }
  }
  const double lo = std::min(rows.intervals.front().a, cols.intervals.front().a);
  const double hi = std::max({rows.intervals.back().b, cols.intervals.back().b, lo + 1.0});
  return fractal::PointSet::uniform(2, std::move(coords), Box::cube(2, lo, hi));
}

std::vector<raster::Band> swept_circle_bands(const fractal::IntervalSet& f, double delta) {
  std::vector<raster::Band> bands;
  for (const auto& iv : f.intervals) bands.push_back({raster::SweptCircle{iv.a, iv.b, 0.0, 1.0}, delta});
  return bands;
}

int covered_directions(const fractal::TriangleSet& tree, int points_per_segment) {
  if (points_per_segment < 2) throw ArgumentError("covered_directions: need at least two points per segment");
  int covered = 0;
  for (const auto& seg : tree.direction_segments()) {
    bool all = true;
    for (int k = 0; k < points_per_segment && all; ++k) {
      const double s = static_cast<double>(k) / (points_per_segment - 1);
      const fractal::Point2 p{seg.a[0] + s * (seg.b[0] - seg.a[0]), seg.a[1] + s * (seg.b[1] - seg.a[1])};
      all = tree.contains(p);
    }
    covered += all ? 1 : 0;
  }
  return covered;
}

TransversalCurve parse_curve(const std::string& name) {
  if (name == "line") return TransversalCurve::line;
  if (name == "arc") return TransversalCurve::arc;
  throw ArgumentError("unknown curve '" + name + "' (expected line or arc)");
}

namespace {

std::array<double, 2> curve_point(TransversalCurve c, double t) {
  if (c == TransversalCurve::line) return {t, 0.0};
  return {std::sin(t), 1.0 - std::cos(t)};
}

std::array<double, 2> map_f(TransversalCurve c, double t, double u) {
  const auto g = curve_point(c, t);
  return {g[0] + std::cos(u), g[1] + std::sin(u)};
}

}  // namespace

double jacobian_fd(TransversalCurve curve, double t, double u, double h) {
  if (!(h > 0.0)) throw ArgumentError("jacobian_fd: step must be positive");
  const auto tp = map_f(curve, t + h, u), tm = map_f(curve, t - h, u);
  const auto up = map_f(curve, t, u + h), um = map_f(curve, t, u - h);
  const double a = (tp[0] - tm[0]) / (2 * h), b = (up[0] - um[0]) / (2 * h);
  const double c = (tp[1] - tm[1]) / (2 * h), d = (up[1] - um[1]) / (2 * h);
  return std::abs(a * d - b * c);
}

double jacobian_exact(TransversalCurve curve, double t, double u) {
  return curve == TransversalCurve::line ? std::abs(std::cos(u)) : std::abs(std::cos(u - t));
}

const std::vector<ScenarioInfo>& registry() {
  static const std::vector<ScenarioInfo> all = {
      {"fixed-level-positivity", "unit circles over C x C keep positive area; Cantor-line control does not",
       {{"depths", "4,5,6"},
        {"deltas", "0.04,0.02,0.01"},
        {"n", "2048"},
        {"box_lo", "-1.5"},
        {"box_hi", "2.5"},
        {"radius", "1"},
        {"samples_per_cell", "1"},
        {"control_depth", "6"},
        {"min_area", "0.5"},
        {"max_delta_change", "0.05"},
        {"control_max_ratio", "0.5"},
        {"mollify_delta", "0.004"},
        {"mollify_eps", "0.04,0.02,0.01"},
        {"mollify_max_growth", "1.25"}},
       run_fixed_level_positivity},
      {"flat-counterexample", "square boundaries over C x C lose area with depth",
       {{"depths", "3,4,5"},
        {"deltas", "0.04,0.02,0.01"},
        {"n", "2048"},
        {"box_lo", "-1.5"},
        {"box_hi", "2.5"},
        {"half_side", "1"},
        {"decay_delta", "0.01"},
        {"max_depth_ratio", "0.8"},
        {"max_intercept", "0.05"},
        {"single_delta", "0.05"}},
       run_flat_counterexample},
      {"discrete-incidence", "annuli around a separated lattice cover a fixed proportion",
       {{"qs", "8,16,32"},
        {"s", "1.5"},
        {"r", "1"},
        {"n", "2048"},
        {"box_lo", "-1.25"},
        {"box_hi", "2.25"},
        {"c0", "3.85"},
        {"max_ratio", "2"}},
       run_discrete_incidence},
      {"intersection-hypothesis", "band intersections: diffeo spheres vs identical paraboloids",
       {{"deltas", "0.04,0.02"},
        {"separations", "0.5,1,1.5"},
        {"samples", "2000000"},
        {"kappa", "0.3"},
        {"c_pass", "50"},
        {"max_spread", "0.5"},
        {"paraboloid_separation", "1"},
        {"min_growth", "1.8"},
        {"max_rel_error", "0.1"}},
       run_intersection_hypothesis},
      {"interior-failure", "circles over a fat Cantor set: positive area, no interior",
       {{"depths", "2,3,4,5,6"},
        {"deltas", "0.01,0.001"},
        {"n", "4096"},
        {"x_lo", "-1.5"},
        {"x_hi", "2.5"},
        {"y_lo", "-1.5"},
        {"y_hi", "1.5"},
        {"row_limit", "0.9"},
        {"min_area", "0.3"},
        {"monotone_from", "3"},
        {"run_slack_cells", "4"}},
       run_interior_failure},
      {"kakeya-compression", "Perron trees compress area while keeping every direction",
       {{"stages", "0,1,2,3,4,5"},
        {"n", "2048"},
        {"x_lo", "-0.5"},
        {"x_hi", "1"},
        {"y_lo", "-0.25"},
        {"y_hi", "1.25"},
        {"height", "1"},
        {"delta_cells", "0.25"},
        {"points_per_segment", "100"},
        {"max_stage_ratio", "0.35"}},
       run_kakeya_compression},
      {"bourgain-compression", "Bourgain characteristic curves lie on X = YZ",
       {{"samples", "10000"}, {"range", "1"}, {"max_residual", "1e-12"}},
       run_bourgain_compression},
      {"transversality", "Jacobian of gamma(t) + (cos u, sin u)",
       {{"curve", "line"},
        {"t_samples", "100"},
        {"u_samples", "100"},
        {"t_lo", "0"},
        {"t_hi", "1"},
        {"u_lo", "0"},
        {"u_hi", "1.5707963267948966"},
        {"fd_step", "1e-6"},
        {"band_lo", "0.5235987755982988"},
        {"band_hi", "1.0471975511965976"},
        {"min_jacobian", "0.49"},
        {"max_error", "1e-3"}},
       run_transversality},
  };
  return all;
}

const ScenarioInfo& find_scenario(const std::string& id) {
  for (const auto& s : registry()) {
    if (s.id == id) return s;
  }
  throw ArgumentError("unknown scenario '" + id + "'");
}

std::vector<std::string> scenario_ids() {
  std::vector<std::string> ids;
  for (const auto& s : registry()) ids.push_back(s.id);
  return ids;
}

ExperimentReport run_scenario(const std::string& id, const std::map<std::string, std::string>& overrides,
                              std::uint64_t seed, const std::filesystem::path& out_dir) {
  const auto& info = find_scenario(id);
  ParamTable p = info.defaults;
  p.apply(overrides);
  const auto t0 = std::chrono::steady_clock::now();
  auto report = info.run(p, seed, out_dir);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace gmt::scenarios
