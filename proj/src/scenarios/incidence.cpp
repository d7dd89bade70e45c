#include <algorithm>
#include <cmath>
#include <numeric>

#include "gmt/errors.hpp"
#include "gmt/phase.hpp"
#include "gmt/scenarios.hpp"
#include "internal.hpp"

namespace gmt::scenarios {

using detail::derive_seed;

ExperimentReport run_discrete_incidence(const ParamTable& p, std::uint64_t seed, const std::filesystem::path& out) {
  auto report = detail::start_report("discrete-incidence", p, seed);
  const auto grid = detail::square_grid(p);
  const auto qs = p.as_ints("qs");
  const double s = p.as_double("s");
  const double r = p.as_double("r");
  if (!(s > 1.0 && s < 2.0)) throw ArgumentError("discrete-incidence: s must lie in (1, 2)");
  if (!std::is_sorted(qs.begin(), qs.end()) || qs.front() < 1) {
    throw ArgumentError("discrete-incidence: qs must be positive and increasing");
  }

  // Unit frame: lattice scaled by 1/q, radius r, half-width rho_q. Areas in
  // the q-frame divided by q^2 equal unit-frame areas.
  auto& series = report.add_series("incidence", {"q", "thickness_q_frame", "delta", "area_over_q2", "incidence_over_q2"});
  std::vector<double> ratios;
  double min_excess = std::numeric_limits<double>::infinity();
  for (int q : qs) {
    const auto lattice = fractal::separated_lattice(q, derive_seed(seed, static_cast<std::uint64_t>(q))).scaled(1.0 / q);
    const double delta = fractal::thickening_radius(q, s);
    std::vector<raster::Band> bands;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
      bands.push_back({raster::Circle{{lattice.point(i)[0], lattice.point(i)[1]}, r}, delta});
    }
    const auto counts = raster::coverage_counts(bands, grid);
    std::size_t filled = 0, incidences = 0;
    for (auto c : counts) {
      filled += c > 0 ? 1 : 0;
      incidences += c;
    }
    const double area = static_cast<double>(filled) * grid.cell_volume();
    const double integral = static_cast<double>(incidences) * grid.cell_volume();
    series.add({static_cast<double>(q), q * delta, delta, area, integral});
    ratios.push_back(area);
    min_excess = std::min(min_excess, integral - area);
    if (q == qs.back()) {
      detail::save_pgm(report, out, raster::pgm_filename("annuli_q" + std::to_string(q), grid.n(), delta),
                       raster::union_of_bands(bands, grid));
    }
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  report.add_verdict(make_verdict("min_area_ratio", Comparator::greater_equal, p.as_double("c0"), *lo,
                                  "smallest area/q^2 over q (c0 frozen from the q = 8 calibration)"));
  report.add_verdict(make_verdict("q_spread", Comparator::less_equal, p.as_double("max_ratio"), *hi / *lo,
                                  "max/min of area/q^2 across q"));
  report.add_verdict(make_verdict("incidence_excess", Comparator::greater_equal, 0.0, min_excess,
                                  "smallest (integral of I - area)/q^2 over q"));
  return report;
}

namespace {

struct PairResult {
  raster::MonteCarloEstimate mc;
  double ratio;
};

}  // namespace

ExperimentReport run_intersection_hypothesis(const ParamTable& p, std::uint64_t seed,
                                             const std::filesystem::path&) {
  auto report = detail::start_report("intersection-hypothesis", p, seed);
  auto deltas = p.as_doubles("deltas");
  std::sort(deltas.rbegin(), deltas.rend());
  auto seps = p.as_doubles("separations");
  const auto samples = static_cast<std::size_t>(p.as_uint64("samples"));
  const double kappa = p.as_double("kappa");
  const double para_sep = p.as_double("paraboloid_separation");
  if (deltas.back() < 0.01) throw ArgumentError("intersection-hypothesis: deltas must be >= 0.01");
  for (double s : seps) {
    if (s < 0.25 || s > 1.5) throw ArgumentError("intersection-hypothesis: separations must lie in [0.25, 1.5]");
  }
  if (std::find(seps.begin(), seps.end(), para_sep) == seps.end()) seps.push_back(para_sep);
  std::sort(seps.begin(), seps.end());
  std::vector<double> all_seps{0.0};
  all_seps.insert(all_seps.end(), seps.begin(), seps.end());

  const phase::PhaseSpec diffeo(phase::PhaseKind::diffeo_distance, 3, {{"kappa", kappa}});
  const phase::PhaseSpec para(phase::PhaseKind::translated_paraboloid, 3);

  std::uint64_t stream = 0;
  auto measure = [&](const raster::PhaseLevel& a, const raster::PhaseLevel& b, double delta, const Box& box,
                     double sep) {
    const auto mc = raster::monte_carlo_intersection(a, b, delta, box, samples, derive_seed(seed, stream++));
    return PairResult{mc, mc.estimate * (delta + sep) / (delta * delta)};
  };

  const std::vector<std::string> cols = {"delta", "separation", "estimate", "std_error", "ratio", "low_confidence"};
  auto& ds = report.add_series("diffeo", cols);
  auto& ps = report.add_series("paraboloid", cols);

  double max_ratio = 0.0, max_rel = 0.0;
  bool low = false;
  std::map<double, std::vector<double>> diffeo_by_sep;
  std::map<double, std::vector<double>> para_by_sep;
  for (double delta : deltas) {
    for (double sep : all_seps) {
      // Spheres around x = 0 and x' = sep e1; each band lies within 1 + delta + kappa sqrt(3) of its centre.
      const double reach = 1.0 + delta + kappa * std::sqrt(3.0);
      const Box box({std::max(-reach, sep - reach), -reach, -reach}, {std::min(reach, sep + reach), reach, reach});
      const auto d = measure({diffeo, {0.0, 0.0, 0.0}, 1.0}, {diffeo, {sep, 0.0, 0.0}, 1.0}, delta, box, sep);
      ds.add({delta, sep, d.mc.estimate, d.mc.std_error, d.ratio, d.mc.low_confidence ? 1.0 : 0.0});

      // t(x) = 1 - x_d on the segment {(0, 0, x_d)}: both levels are y_d = 1 + |y'|^2.
      const Box pbox({-1.0, -1.0, 0.9}, {1.0, 1.0, 3.1});
      const auto q = measure({para, {0.0, 0.0, 0.0}, 1.0}, {para, {0.0, 0.0, sep}, 1.0 - sep}, delta, pbox, sep);
      ps.add({delta, sep, q.mc.estimate, q.mc.std_error, q.ratio, q.mc.low_confidence ? 1.0 : 0.0});

      if (sep == 0.0) continue;
      diffeo_by_sep[sep].push_back(d.ratio);
      para_by_sep[sep].push_back(q.ratio);
      max_ratio = std::max(max_ratio, d.ratio);
      for (const auto* r : {&d, &q}) {
        low = low || r->mc.low_confidence;
        max_rel = std::max(max_rel, r->mc.estimate > 0 ? r->mc.std_error / r->mc.estimate
                                                       : std::numeric_limits<double>::infinity());
      }
    }
  }

  double spread = 0.0;
  for (const auto& [sep, rs] : diffeo_by_sep) {
    const auto [lo, hi] = std::minmax_element(rs.begin(), rs.end());
    spread = std::max(spread, *hi / *lo - 1.0);
  }
  const auto& pr = para_by_sep.at(para_sep);
  const double halvings = std::log2(deltas.front() / deltas.back());
  const double growth = halvings > 0 ? std::pow(pr.back() / pr.front(), 1.0 / halvings) : 0.0;

  auto verdict = [&](std::string name, Comparator c, double thr, double measured, std::string note) {
    report.add_verdict(low ? withheld_verdict(std::move(name), c, thr, measured, "low-confidence Monte Carlo; " + note)
                           : make_verdict(std::move(name), c, thr, measured, std::move(note)));
  };
  verdict("diffeo_max_ratio", Comparator::less_equal, p.as_double("c_pass"), max_ratio,
          "largest |intersection| (delta + sep) / delta^2 over delta and sep > 0");
  verdict("diffeo_delta_spread", Comparator::less_equal, p.as_double("max_spread"), spread,
          "largest max/min - 1 of the diffeo ratio across deltas at fixed sep");
  verdict("paraboloid_growth", Comparator::greater_equal, p.as_double("min_growth"), growth,
          "paraboloid ratio growth per delta-halving at the configured separation");
  verdict("max_relative_error", Comparator::less_equal, p.as_double("max_rel_error"), max_rel,
          "largest Monte Carlo standard error over estimate");
  return report;
}

}  // namespace gmt::scenarios
