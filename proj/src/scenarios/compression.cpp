#include <algorithm>
#include <cmath>
#include <limits>

#include "gmt/errors.hpp"
#include "gmt/phase.hpp"
#include "gmt/random.hpp"
#include "gmt/scenarios.hpp"
#include "internal.hpp"

namespace gmt::scenarios {

namespace {

raster::GridSpec rect_grid(const ParamTable& p) {
  return raster::GridSpec(Box({p.as_double("x_lo"), p.as_double("y_lo")}, {p.as_double("x_hi"), p.as_double("y_hi")}),
                          p.as_int("n"));
}

}  // namespace

ExperimentReport run_interior_failure(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out) {
  auto report = detail::start_report("interior-failure", p, seed);
  const auto grid = rect_grid(p);
  auto depths = p.as_ints("depths");
  auto deltas = p.as_doubles("deltas");
  std::sort(depths.begin(), depths.end());
  std::sort(deltas.rbegin(), deltas.rend());
  const double limit = p.as_double("row_limit");
  const int from = p.as_int("monotone_from");
  const double slack = p.as_double("run_slack_cells") * grid.cell_size(0);

  auto& series = report.add_series("fat_cantor", {"depth", "delta", "area", "max_run", "largest_interval", "run_bound"});
  double min_area = std::numeric_limits<double>::infinity();
  std::vector<double> runs;  // at the smallest delta, per depth
  std::vector<double> bounds;
  for (int depth : depths) {
    const auto f = fractal::fat_cantor(depth);
    const double largest = f.max_length();
    for (double delta : deltas) {
      const auto bands = swept_circle_bands(f, delta);
      const auto u = raster::union_of_bands(bands, grid);
      const double run = raster::max_inscribed_interval(u, 0, fractal::Interval{-limit, limit});
      const double bound = 2.0 * largest + slack;
      series.add({static_cast<double>(depth), delta, u.area(), run, largest, bound});
      min_area = std::min(min_area, u.area());
      if (delta == deltas.back()) {
        runs.push_back(run);
        bounds.push_back(bound);
      }
      if (depth == depths.back() && delta == deltas.front()) {
        detail::save_pgm(report, out, raster::pgm_filename("fat_cantor", grid.n(), delta), u);
      }
    }
  }
  double worst_step = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < depths.size(); ++k) {
    if (depths[k - 1] >= from) worst_step = std::max(worst_step, runs[k] - runs[k - 1]);
  }

  report.add_verdict(make_verdict("area_positive", Comparator::greater_equal, p.as_double("min_area"), min_area,
                                  "smallest union area over depths and deltas"));
  if (std::isfinite(worst_step)) {
    report.add_verdict(make_verdict("run_monotone", Comparator::less_equal, 0.0, worst_step,
                                    "largest increase of the max row run between successive depths"));
  }
  report.add_verdict(make_verdict("run_bound", Comparator::less_equal, bounds.back(), runs.back(),
                                  "max row run at the top depth against 2 x largest interval + slack cells"));
  return report;
}

ExperimentReport run_kakeya_compression(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out) {
  auto report = detail::start_report("kakeya-compression", p, seed);
  const auto grid = rect_grid(p);
  auto stages = p.as_ints("stages");
  std::sort(stages.begin(), stages.end());
  const double height = p.as_double("height");
  const double delta = p.as_double("delta_cells") * grid.max_cell_size();
  const int per_segment = p.as_int("points_per_segment");
  if (stages.back() > 6 || stages.front() < 0) throw ArgumentError("kakeya-compression: stages must lie in [0, 6]");

  auto& series = report.add_series("perron", {"stage", "area", "directions", "covered"});
  std::vector<double> areas;
  double coverage = std::numeric_limits<double>::infinity();
  for (int stage : stages) {
    const auto tree = stage == 0 ? fractal::base_triangle(height) : fractal::perron_tree(stage, height);
    std::vector<raster::Band> bands;
    for (const auto& t : tree.triangles) {
      for (const auto& v : {t.v0, t.v1, t.v2}) {
        if (!grid.box().contains(std::span<const double>(v.data(), 2))) {
          throw ArgumentError("kakeya-compression: stage " + std::to_string(stage) + " leaves the grid box");
        }
      }
      bands.push_back({raster::TriangleShape{t}, delta});
    }
    const auto u = raster::union_of_bands(bands, grid);
    const int covered = covered_directions(tree, per_segment);
    series.add({static_cast<double>(stage), u.area(), static_cast<double>(tree.direction_count),
                static_cast<double>(covered)});
    areas.push_back(u.area());
    coverage = std::min(coverage, static_cast<double>(covered) / (1 << stage));
    if (stage == stages.back()) detail::save_pgm(report, out, raster::pgm_filename("perron", grid.n(), delta), u);
  }
  double worst_step = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < areas.size(); ++k) worst_step = std::max(worst_step, areas[k] - areas[k - 1]);

  if (std::isfinite(worst_step)) {
    report.add_verdict(make_verdict("area_non_increasing", Comparator::less_equal, 0.0, worst_step,
                                    "largest area increase between successive stages"));
  }
  report.add_verdict(make_verdict("compression", Comparator::less_equal, p.as_double("max_stage_ratio"),
                                  areas.back() / areas.front(), "area at the last stage over area at the first"));
  report.add_verdict(make_verdict("direction_coverage", Comparator::greater_equal, 1.0, coverage,
                                  "smallest fraction of the 2^stage directions whose segment lies in the union"));
  return report;
}

ExperimentReport run_bourgain_compression(const ParamTable& p, std::uint64_t seed, const std::filesystem::path&) {
  auto report = detail::start_report("bourgain-compression", p, seed);
  const int samples = p.as_int("samples");
  const double range = p.as_double("range");
  if (samples < 1) throw ArgumentError("bourgain-compression: samples must be positive");

  auto& checks = report.add_series("checks", {"y1", "y2", "t", "X", "Y", "Z", "residual"});
  auto add_check = [&](double y1, double y2, double t) {
    const auto q = phase::bourgain_compressed_point(y1, y2, t);
    const double res = std::abs(q[0] - q[1] * q[2]);
    checks.add({y1, y2, t, q[0], q[1], q[2], res});
    return res;
  };
  add_check(1.0, 2.0, 0.5);
  add_check(1.0, 2.0, 0.0);

  Rng rng = make_rng(seed, 0xb0);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double y1 = uniform(rng, -range, range), y2 = uniform(rng, -range, range), t = uniform(rng, -range, range);
    const auto q = phase::bourgain_compressed_point(y1, y2, t);
    worst = std::max(worst, std::abs(q[0] - q[1] * q[2]));
  }
  auto& summary = report.add_series("summary", {"samples", "max_residual"});
  summary.add({static_cast<double>(samples), worst});
  report.add_verdict(make_verdict("max_residual", Comparator::less_equal, p.as_double("max_residual"), worst,
                                  "largest |X - YZ| over the random samples"));
  return report;
}

ExperimentReport run_transversality(const ParamTable& p, std::uint64_t seed, const std::filesystem::path&) {
  auto report = detail::start_report("transversality", p, seed);
  const auto curve = parse_curve(p.raw("curve"));
  const int nt = p.as_int("t_samples"), nu = p.as_int("u_samples");
  if (nt < 2 || nu < 2) throw ArgumentError("transversality: need at least two samples per axis");
  const double t_lo = p.as_double("t_lo"), t_hi = p.as_double("t_hi");
  const double u_lo = p.as_double("u_lo"), u_hi = p.as_double("u_hi");
  const double h = p.as_double("fd_step");
  const double band_lo = p.as_double("band_lo"), band_hi = p.as_double("band_hi");
  constexpr double kBandTol = 1e-12;

  auto& series = report.add_series("jacobian", {"t", "u", "j_fd", "j_exact"});
  double max_err = 0.0;
  double band_min = std::numeric_limits<double>::infinity();
  for (int a = 0; a < nt; ++a) {
    const double t = t_lo + (t_hi - t_lo) * a / (nt - 1);
    for (int b = 0; b < nu; ++b) {
      const double u = u_lo + (u_hi - u_lo) * b / (nu - 1);
      const double jf = jacobian_fd(curve, t, u, h);
      const double je = jacobian_exact(curve, t, u);
      series.add({t, u, jf, je});
      max_err = std::max(max_err, std::abs(jf - je));
      if (u >= band_lo - kBandTol && u <= band_hi + kBandTol) band_min = std::min(band_min, jf);
    }
  }
  report.add_verdict(make_verdict("band_min_jacobian", Comparator::greater_equal, p.as_double("min_jacobian"),
                                  band_min, "smallest finite-difference Jacobian with u in the band"));
  report.add_verdict(make_verdict("max_jacobian_error", Comparator::less_equal, p.as_double("max_error"), max_err,
                                  "largest |J_fd - J_exact| over the grid"));
  return report;
}

}  // namespace gmt::scenarios
