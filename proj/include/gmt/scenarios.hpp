#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gmt/fractal.hpp"
#include "gmt/raster.hpp"
#include "gmt/report.hpp"

/// Named, reproducible experiments. Every threshold lives in the scenario's
/// parameter table; `out_dir` (may be empty) receives image artifacts.
namespace gmt::scenarios {

using ScenarioFn = std::function<ExperimentReport(const ParamTable& params, std::uint64_t seed,
                                                  const std::filesystem::path& out_dir)>;

struct ScenarioInfo {
  std::string id;
  std::string summary;
  ParamTable defaults;
  ScenarioFn run;
};

const std::vector<ScenarioInfo>& registry();
/// Throws ArgumentError for unknown ids.
const ScenarioInfo& find_scenario(const std::string& id);
std::vector<std::string> scenario_ids();

/// Defaults with overrides applied (unknown keys rejected), run, timed.
ExperimentReport run_scenario(const std::string& id, const std::map<std::string, std::string>& overrides,
                              std::uint64_t seed, const std::filesystem::path& out_dir = {});

ExperimentReport run_fixed_level_positivity(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out);
ExperimentReport run_flat_counterexample(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out);
ExperimentReport run_discrete_incidence(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out);
ExperimentReport run_intersection_hypothesis(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out);
ExperimentReport run_interior_failure(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out);
ExperimentReport run_kakeya_compression(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out);
ExperimentReport run_bourgain_compression(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out);
ExperimentReport run_transversality(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out);

// Building blocks shared with the tests.

/// Area of the union of delta-bands around radius-r circles centred on the points.
double circle_union_area(const fractal::PointSet& centers, double radius, double delta,
                         const raster::GridSpec& grid);
/// Same for square boundaries of half-side h.
double square_union_area(const fractal::PointSet& centers, double half_side, double delta,
                         const raster::GridSpec& grid);

/// Product of the left endpoints of the intervals (nested across depths).
fractal::PointSet left_endpoint_grid(const fractal::IntervalSet& rows, const fractal::IntervalSet& cols);

/// Unit circles centred on F x {0}: one swept circle per interval of F.
std::vector<raster::Band> swept_circle_bands(const fractal::IntervalSet& f, double delta);

/// Directions of the tree whose 100 evenly spaced segment points all lie in the union.
int covered_directions(const fractal::TriangleSet& tree, int points_per_segment = 100);

enum class TransversalCurve { line, arc };
TransversalCurve parse_curve(const std::string& name);
/// Finite-difference |det DF| for F(t, u) = gamma(t) + (cos u, sin u).
double jacobian_fd(TransversalCurve curve, double t, double u, double h);
/// Closed form: |cos u| for the line, |cos(u - t)| for the arc.
double jacobian_exact(TransversalCurve curve, double t, double u);

}  // namespace gmt::scenarios
