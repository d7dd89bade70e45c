#include "gmt/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "gmt/errors.hpp"
#include "gmt/random.hpp"

namespace gmt::fractal {

namespace {

void check_depth(int depth) {
  if (depth < 0 || depth > kMaxCantorDepth) {
    throw ArgumentError("depth must be in [0, " + std::to_string(kMaxCantorDepth) + "], got " + std::to_string(depth));
  }
}

// Common cell side of a non-degenerate factor, or nullopt if the pieces differ.
std::optional<double> uniform_side(const IntervalSet& s) {
  const double len = s.intervals.front().length();
  for (const auto& iv : s.intervals) {
    if (std::abs(iv.length() - len) > 1e-12) return std::nullopt;
  }
  return len;
}

}  // namespace

IntervalSet IntervalSet::singleton(double x) { return IntervalSet{{Interval{x, x}}, 0}; }

double IntervalSet::total_length() const {
  double s = 0.0;
  for (const auto& iv : intervals) s += iv.length();
  return s;
}

double IntervalSet::max_length() const {
  double m = 0.0;
  for (const auto& iv : intervals) m = std::max(m, iv.length());
  return m;
}

void IntervalSet::validate() const {
  if (intervals.empty()) throw ArgumentError("interval set is empty");
  if (is_degenerate()) return;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    if (!(iv.b > iv.a)) throw ArgumentError("interval set: empty or reversed interval");
    if (iv.a < 0.0 || iv.b > 1.0) throw ArgumentError("interval set: interval outside [0, 1]");
    if (i > 0 && !(iv.a > intervals[i - 1].b)) throw ArgumentError("interval set: intervals overlap or unsorted");
  }
  if (total_length() > 1.0 + 1e-12) throw ArgumentError("interval set: total length exceeds 1");
}

IntervalSet cantor_middle_thirds(int depth) {
  check_depth(depth);
  std::vector<Interval> cur{{0.0, 1.0}};
  for (int k = 0; k < depth; ++k) {
    std::vector<Interval> next;
    next.reserve(cur.size() * 2);
    for (const auto& iv : cur) {
      const double third = iv.length() / 3.0;
      next.push_back({iv.a, iv.a + third});
      next.push_back({iv.b - third, iv.b});
    }
    cur = std::move(next);
  }
  return IntervalSet{std::move(cur), depth};
}

IntervalSet fat_cantor(int depth) {
  check_depth(depth);
  std::vector<Interval> cur{{0.0, 1.0}};
  for (int n = 1; n <= depth; ++n) {
    const double gap = std::pow(4.0, -n);
    std::vector<Interval> next;
    next.reserve(cur.size() * 2);
    for (const auto& iv : cur) {
      const double mid = 0.5 * (iv.a + iv.b);
      next.push_back({iv.a, mid - 0.5 * gap});
      next.push_back({mid + 0.5 * gap, iv.b});
    }
    cur = std::move(next);
  }
  return IntervalSet{std::move(cur), depth};
}

double fat_cantor_length(int depth) { return 1.0 - 0.5 * (1.0 - std::pow(2.0, -depth)); }

PointSet::PointSet(int dim, std::vector<double> coords, std::vector<double> weights, Box box)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)), box_(std::move(box)) {
  if (dim_ < 1) throw ArgumentError("point set: dim must be positive");
  if (coords_.size() != weights_.size() * static_cast<std::size_t>(dim_)) {
    throw ArgumentError("point set: coordinate/weight count mismatch");
  }
  if (box_.dim() != dim_) throw ArgumentError("point set: box dimension mismatch");
}

PointSet PointSet::uniform(int dim, std::vector<double> coords, Box box) {
  if (dim < 1) throw ArgumentError("point set: dim must be positive");
  const std::size_t n = coords.size() / dim;
  std::vector<double> w(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  return PointSet(dim, std::move(coords), std::move(w), std::move(box));
}

void PointSet::validate() const {
  if (empty()) return;
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw ArgumentError("point set: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ArgumentError("point set: weights do not sum to 1");
  for (std::size_t i = 0; i < size(); ++i) {
    if (!box_.contains(point(i), 1e-12)) throw ArgumentError("point set: point outside box");
  }
  if (min_separation) {
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = i + 1; j < size(); ++j) {
        if (distance(point(i), point(j)) < *min_separation) {
          throw ArgumentError("point set: separation below declared minimum");
        }
      }
    }
  }
}

PointSet PointSet::scaled(double factor) const {
  if (!(factor > 0.0)) throw ArgumentError("point set: scale factor must be positive");
  std::vector<double> c = coords_;
  for (auto& v : c) v *= factor;
  Box b = box_;
  for (auto& v : b.lo) v *= factor;
  for (auto& v : b.hi) v *= factor;
  PointSet out(dim_, std::move(c), weights_, std::move(b));
  out.claimed_exponent = claimed_exponent;
  if (min_separation) out.min_separation = *min_separation * factor;
  return out;
}

PointSet product_point_cloud(const IntervalSet& rows, const IntervalSet& cols, int samples_per_cell,
                             std::uint64_t seed) {
  if (samples_per_cell < 1) throw ArgumentError("product_point_cloud: samples_per_cell must be >= 1");
  rows.validate();
  cols.validate();
  Rng rng = make_rng(seed, 0xc0c0);
  const std::size_t n = rows.intervals.size() * cols.intervals.size() * samples_per_cell;
  std::vector<double> coords;
  coords.reserve(2 * n);
  for (const auto& rx : rows.intervals) {
    for (const auto& cy : cols.intervals) {
      for (int s = 0; s < samples_per_cell; ++s) {
        coords.push_back(rx.a + rx.length() * uniform01(rng));
        coords.push_back(cy.a + cy.length() * uniform01(rng));
      }
    }
  }
  PointSet out = PointSet::uniform(2, std::move(coords), Box::cube(2, 0.0, 1.0));

  // claimed exponent = log(#cells) / log(1 / side) when the non-degenerate factors share one side.
  double cells = 1.0;
  std::optional<double> side;
  bool consistent = true;
  for (const IntervalSet* f : {&rows, &cols}) {
    if (f->is_degenerate()) continue;
    const auto s = uniform_side(*f);
    if (!s || (side && std::abs(*side - *s) > 1e-12)) {
      consistent = false;
      break;
    }
    side = s;
    cells *= static_cast<double>(f->intervals.size());
  }
  if (consistent && side && *side < 1.0) out.claimed_exponent = std::log(cells) / std::log(1.0 / *side);
  return out;
}

PointSet separated_lattice(int q, std::uint64_t seed) {
  if (q < 2) throw ArgumentError("separated_lattice: q must be >= 2");
  Rng rng = make_rng(seed, 0x1a77);
  std::vector<double> coords;
  coords.reserve(2 * static_cast<std::size_t>(q) * q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      coords.push_back(i + uniform(rng, 0.25, 0.75));
      coords.push_back(j + uniform(rng, 0.25, 0.75));
    }
  }
  PointSet out = PointSet::uniform(2, std::move(coords), Box::cube(2, 0.0, q));
  out.min_separation = 0.5;
  return out;
}

double thickening_radius(int q, double s) {
  if (q < 1 || !(s > 0.0)) throw ArgumentError("thickening_radius: need q >= 1 and s > 0");
  return std::pow(static_cast<double>(q), -2.0 / s);
}

std::vector<double> frostman_profile(const PointSet& points, double a, std::span<const double> radii) {
  if (points.empty()) throw ArgumentError("frostman_ratio: empty point set");
  if (!(a > 0.0)) throw ArgumentError("frostman_ratio: exponent must be positive");
  if (radii.empty()) throw ArgumentError("frostman_ratio: no radii");
  for (double r : radii) {
    if (!(r > 0.0)) throw ArgumentError("frostman_ratio: radii must be positive");
  }
  std::vector<double> sorted(radii.begin(), radii.end());
  std::sort(sorted.begin(), sorted.end());
  const double rmax = sorted.back();

  // Sweep along the first coordinate so each centre only visits its rmax-slab.
  const std::size_t n = points.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return points.point(i)[0] < points.point(j)[0]; });
  std::vector<double> xs(n);
  for (std::size_t k = 0; k < n; ++k) xs[k] = points.point(order[k])[0];

  std::vector<double> best(sorted.size(), 0.0);
  std::vector<double> mass(sorted.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto c = points.point(order[k]);
    std::fill(mass.begin(), mass.end(), 0.0);
    const auto lo = std::lower_bound(xs.begin(), xs.end(), xs[k] - rmax) - xs.begin();
    const auto hi = std::upper_bound(xs.begin(), xs.end(), xs[k] + rmax) - xs.begin();
    for (auto m = lo; m < hi; ++m) {
      const double dist = distance(c, points.point(order[m]));
      const auto r = std::lower_bound(sorted.begin(), sorted.end(), dist) - sorted.begin();
      if (r < static_cast<std::ptrdiff_t>(sorted.size())) mass[r] += points.weight(order[m]);
    }
    double acc = 0.0;
    for (std::size_t r = 0; r < sorted.size(); ++r) {
      acc += mass[r];
      best[r] = std::max(best[r], acc / std::pow(sorted[r], a));
    }
  }
  // Back to the caller's radius order.
  std::vector<double> out(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const auto r = std::lower_bound(sorted.begin(), sorted.end(), radii[i]) - sorted.begin();
    out[i] = best[r];
  }
  return out;
}

double frostman_ratio(const PointSet& points, double a, std::span<const double> radii) {
  const auto profile = frostman_profile(points, a, radii);
  return *std::max_element(profile.begin(), profile.end());
}

std::vector<BoxCount> box_counts(const PointSet& points, std::span<const double> scales) {
  const int d = points.dim();
  if (d > 3) throw ArgumentError("box_counts: dim must be <= 3");
  std::vector<BoxCount> out;
  for (double s : scales) {
    if (!(s > 0.0)) throw ArgumentError("box_counts: scales must be positive");
    std::vector<std::array<std::int64_t, 3>> keys;
    keys.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::array<std::int64_t, 3> key{};
      const auto p = points.point(i);
      for (int k = 0; k < d; ++k) {
        const auto last = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(points.box().extent(k) / s)) - 1);
        key[k] = std::clamp(static_cast<std::int64_t>(std::floor((p[k] - points.box().lo[k]) / s)), std::int64_t{0}, last);
      }
      keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());
    const auto distinct = std::unique(keys.begin(), keys.end()) - keys.begin();
    out.push_back({s, static_cast<std::size_t>(distinct)});
  }
  return out;
}

double box_dimension(const PointSet& points, std::span<const double> scales) {
  if (scales.size() < 3) throw ArgumentError("box_dimension: need at least 3 scales");
  const auto [mn, mx] = std::minmax_element(scales.begin(), scales.end());
  if (*mx / *mn < 4.0 - 1e-12) throw ArgumentError("box_dimension: scales must span at least 2 octaves");
  const auto counts = box_counts(points, scales);
  std::vector<double> lx, ly;
  for (const auto& c : counts) {
    lx.push_back(std::log(1.0 / c.scale));
    ly.push_back(std::log(static_cast<double>(c.occupied)));
  }
  if (std::all_of(counts.begin(), counts.end(), [&](const BoxCount& c) { return c.occupied == counts.front().occupied; })) {
    throw FitError("box_dimension: all box counts are equal");
  }
  return least_squares(lx, ly).slope;
}

double Triangle::area() const {
  return 0.5 * std::abs((v1[0] - v0[0]) * (v2[1] - v0[1]) - (v2[0] - v0[0]) * (v1[1] - v0[1]));
}

bool Triangle::contains(Point2 p, double tol) const {
  auto cross = [](Point2 a, Point2 b, Point2 c) { return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]); };
  const double d0 = cross(v0, v1, p), d1 = cross(v1, v2, p), d2 = cross(v2, v0, p);
  const bool neg = d0 < -tol || d1 < -tol || d2 < -tol;
  const bool pos = d0 > tol || d1 > tol || d2 > tol;
  return !(neg && pos);
}

std::vector<Segment2> TriangleSet::direction_segments() const {
  std::vector<Segment2> out;
  out.reserve(triangles.size());
  for (const auto& t : triangles) {
    out.push_back({{0.5 * (t.v0[0] + t.v1[0]), 0.5 * (t.v0[1] + t.v1[1])}, t.v2});
  }
  return out;
}

bool TriangleSet::contains(Point2 p) const {
  return std::any_of(triangles.begin(), triangles.end(), [&](const Triangle& t) { return t.contains(p); });
}

TriangleSet base_triangle(double height) {
  if (!(height > 0.0)) throw ArgumentError("base_triangle: height must be positive");
  return TriangleSet{{Triangle{{0.0, 0.0}, {1.0, 0.0}, {0.5, height}}}, 0, 1};
}

TriangleSet perron_tree(int stage, double base_triangle_height) {
  if (stage < 1 || stage > 8) throw ArgumentError("perron_tree: stage must be in [1, 8]");
  if (!(base_triangle_height > 0.0)) throw ArgumentError("perron_tree: height must be positive");
  const int count = 1 << stage;
  const double width = 1.0 / count;
  const double alpha = 1.0 - kPerronOverlap / 2.0;  // similarity ratio of the merged main triangle

  std::vector<double> shift(count, 0.0);
  for (int level = 1; level <= stage; ++level) {
    const int block = 1 << level;
    const int half = block / 2;
    const double half_width = half * width;
    const double scale = std::pow(alpha, level - 1);
    // Close the gap left by the previous level, then overlap by the configured fraction.
    const double slide = half_width * (1.0 - scale) + kPerronOverlap * scale * half_width;
    for (int start = 0; start < count; start += block) {
      for (int i = start + half; i < start + block; ++i) shift[i] += slide;
    }
  }
  TriangleSet out;
  out.stage = stage;
  out.direction_count = count;
  out.triangles.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.triangles.push_back(Triangle{{i * width - shift[i], 0.0},
                                     {(i + 1) * width - shift[i], 0.0},
                                     {0.5 - shift[i], base_triangle_height}});
  }
  return out;
}

void write_csv(std::ostream& os, const PointSet& points) {
  static const char* names[] = {"x", "y", "z"};
  for (int k = 0; k < points.dim(); ++k) os << (k < 3 ? names[k] : ("x" + std::to_string(k)).c_str()) << ',';
  os << "weight\n";
  os.precision(17);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (double c : points.point(i)) os << c << ',';
    os << points.weight(i) << '\n';
  }
}

void write_csv(std::ostream& os, const IntervalSet& set) {
  os << "a,b\n";
  os.precision(17);
  for (const auto& iv : set.intervals) os << iv.a << ',' << iv.b << '\n';
}

}  // namespace gmt::fractal
