#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gmt/errors.hpp"
#include "gmt/scenarios.hpp"
#include "gmt/spectral.hpp"
#include "internal.hpp"

namespace gmt::scenarios {

using detail::derive_seed;

ExperimentReport run_fixed_level_positivity(const ParamTable& p, std::uint64_t seed,
                                            const std::filesystem::path& out) {
  auto report = detail::start_report("fixed-level-positivity", p, seed);
  const auto grid = detail::square_grid(p);
  auto depths = p.as_ints("depths");
  auto deltas = p.as_doubles("deltas");
  std::sort(depths.begin(), depths.end());
  std::sort(deltas.rbegin(), deltas.rend());
  const double radius = p.as_double("radius");
  const int spc = p.as_int("samples_per_cell");
  const int control_depth = p.as_int("control_depth");

  auto cloud = [&](int depth, bool line) {
    const auto c = fractal::cantor_middle_thirds(depth);
    return fractal::product_point_cloud(c, line ? fractal::IntervalSet::singleton(0.0) : c, spc,
                                        derive_seed(seed, static_cast<std::uint64_t>(depth) * 2 + (line ? 1 : 0)));
  };

  auto& cxc = report.add_series("cxc_area", {"depth", "delta", "area"});
  std::vector<double> top_areas;
  for (int depth : depths) {
    const auto centers = cloud(depth, false);
    for (double delta : deltas) {
      const double a = circle_union_area(centers, radius, delta, grid);
      cxc.add({static_cast<double>(depth), delta, a});
      if (depth == depths.back()) top_areas.push_back(a);
    }
  }
  {
    const auto centers = cloud(depths.back(), false);
    std::vector<raster::Band> bands;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      bands.push_back({raster::Circle{{centers.point(i)[0], centers.point(i)[1]}, radius}, deltas.back()});
    }
    detail::save_pgm(report, out, raster::pgm_filename("cxc", grid.n(), deltas.back()),
                     raster::union_of_bands(bands, grid));
  }

  auto& control = report.add_series("control_area", {"depth", "delta", "area"});
  std::vector<double> control_areas;
  {
    const auto centers = cloud(control_depth, true);
    for (double delta : deltas) {
      const double a = circle_union_area(centers, radius, delta, grid);
      control.add({static_cast<double>(control_depth), delta, a});
      control_areas.push_back(a);
    }
  }

  // Mollified incidence measures at the top depth.
  auto& moll = report.add_series("mollified", {"family", "eps", "norm", "mass"});
  std::vector<double> growth_cxc;
  const auto eps = p.as_doubles("mollify_eps");
  const double levels[] = {radius};
  const phase::PhaseSpec unit(phase::PhaseKind::unit_distance, 2);
  for (int family = 0; family < 2; ++family) {
    const auto centers = cloud(family == 0 ? depths.back() : control_depth, family == 1);
    const auto nu = spectral::incidence_density(unit, centers, levels, p.as_double("mollify_delta"), grid);
    const auto norms = spectral::mollified_l2(nu.nu, eps);
    for (std::size_t k = 0; k < norms.size(); ++k) {
      moll.add({static_cast<double>(family), norms[k].eps, norms[k].norm, norms[k].mass});
      if (family == 0 && k > 0) growth_cxc.push_back(norms[k].norm / norms[k - 1].norm);
    }
  }

  report.add_verdict(make_verdict("positive_area", Comparator::greater_equal, p.as_double("min_area"),
                                  top_areas.back(), "C x C union area at the top depth and smallest delta"));
  report.add_verdict(make_verdict("delta_stability", Comparator::less_equal, p.as_double("max_delta_change"),
                                  detail::max_relative_step(top_areas),
                                  "largest relative area change between successive deltas"));
  report.add_verdict(make_verdict("control_shrink", Comparator::less_equal, p.as_double("control_max_ratio"),
                                  control_areas.back() / control_areas.front(),
                                  "Cantor-line area at smallest delta over area at largest delta"));
  if (!growth_cxc.empty()) {
    report.add_verdict(make_verdict("mollified_bounded", Comparator::less_equal, p.as_double("mollify_max_growth"),
                                    *std::max_element(growth_cxc.begin(), growth_cxc.end()),
                                    "largest growth of the mollified C x C norm per eps step"));
  }
  return report;
}

ExperimentReport run_flat_counterexample(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out) {
  auto report = detail::start_report("flat-counterexample", p, seed);
  const auto grid = detail::square_grid(p);
  auto depths = p.as_ints("depths");
  auto deltas = p.as_doubles("deltas");
  std::sort(depths.begin(), depths.end());
  std::sort(deltas.rbegin(), deltas.rend());
  const double h = p.as_double("half_side");
  const double decay_delta = p.as_double("decay_delta");

  auto centers_at = [](int depth) {
    const auto c = fractal::cantor_middle_thirds(depth);
    return left_endpoint_grid(c, c);
  };

  auto& sq = report.add_series("square_area", {"depth", "delta", "area"});
  auto& circ = report.add_series("circle_area", {"depth", "delta", "area"});
  std::vector<double> decay_areas, circle_areas, top_delta, top_area;
  for (int depth : depths) {
    const auto centers = centers_at(depth);
    bool have_decay = false;
    for (double delta : deltas) {
      const double a = square_union_area(centers, h, delta, grid);
      sq.add({static_cast<double>(depth), delta, a});
      if (delta == decay_delta) {
        decay_areas.push_back(a);
        have_decay = true;
      }
      if (depth == depths.back()) {
        top_delta.push_back(delta);
        top_area.push_back(a);
      }
    }
    if (!have_decay) {
      const double a = square_union_area(centers, h, decay_delta, grid);
      sq.add({static_cast<double>(depth), decay_delta, a});
      decay_areas.push_back(a);
    }
    const double c = circle_union_area(centers, h, decay_delta, grid);
    circ.add({static_cast<double>(depth), decay_delta, c});
    circle_areas.push_back(c);
  }
  {
    const auto centers = centers_at(depths.back());
    std::vector<raster::Band> bands;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      bands.push_back({raster::SquareBoundary{{centers.point(i)[0], centers.point(i)[1]}, h}, decay_delta});
    }
    detail::save_pgm(report, out, raster::pgm_filename("squares", grid.n(), decay_delta),
                     raster::union_of_bands(bands, grid));
  }

  // Single centre: Euclidean offset of the square boundary.
  auto& single = report.add_series("single_square", {"delta", "area", "exact"});
  {
    const double d = p.as_double("single_delta");
    const auto centers = centers_at(0);
    const double exact = d < h ? 16.0 * h * d + (std::numbers::pi - 4.0) * d * d : 0.0;
    single.add({d, square_union_area(centers, h, d, grid), exact});
  }

  double worst_ratio = 0.0;
  for (std::size_t k = 1; k < decay_areas.size(); ++k) worst_ratio = std::max(worst_ratio, decay_areas[k] / decay_areas[k - 1]);
  double circle_step = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < circle_areas.size(); ++k) circle_step = std::min(circle_step, circle_areas[k] - circle_areas[k - 1]);

  if (decay_areas.size() >= 2) {
    report.add_verdict(make_verdict("depth_ratio", Comparator::less_equal, p.as_double("max_depth_ratio"), worst_ratio,
                                    "largest area(depth+1)/area(depth) at the decay delta"));
  }
  if (top_delta.size() >= 2) {
    const auto fit = least_squares(top_delta, top_area);
    report.params.set("fit.intercept", format_number(fit.intercept));
    report.add_verdict(make_verdict("delta_intercept", Comparator::less_equal, p.as_double("max_intercept"),
                                    fit.intercept, "linear extrapolation of area to delta = 0 at the top depth"));
  }
  if (circle_areas.size() >= 2) {
    report.add_verdict(make_verdict("circle_monotone", Comparator::greater_equal, 0.0, circle_step,
                                    "smallest area increase of the circle contrast between depths"));
  }
  return report;
}

}  // namespace gmt::scenarios
