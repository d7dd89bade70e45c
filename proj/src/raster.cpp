#include "gmt/raster.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "gmt/errors.hpp"
#include "gmt/random.hpp"

namespace gmt::raster {

namespace {

struct XSpan {
  double lo, hi;
};

using XSpans = std::vector<XSpan>;

// Row-interval form of the band around a shape at height y, if the shape has one.
bool shape_row_spans(const Shape& shape, double y, double delta, XSpans& out) {
  out.clear();
  auto circle_rows = [&](Point2 c, double r, double d) {
    const double dy = y - c[1];
    const double outer2 = (r + d) * (r + d) - dy * dy;
    if (outer2 < 0) return;
    const double so = std::sqrt(outer2);
    const double inner2 = r > d ? (r - d) * (r - d) - dy * dy : -1.0;
    if (inner2 < 0) {
      out.push_back({c[0] - so, c[0] + so});
    } else {
      const double si = std::sqrt(inner2);
      out.push_back({c[0] - so, c[0] - si});
      out.push_back({c[0] + si, c[0] + so});
    }
  };
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          circle_rows(s.center, s.radius, delta);
          return true;
        } else if constexpr (std::is_same_v<T, Annulus>) {
          circle_rows(s.center, s.radius, delta + s.half_width);
          return true;
        } else if constexpr (std::is_same_v<T, SquareBoundary>) {
          const double h = s.half_side;
          const double ady = std::abs(y - s.center[1]);
          if (ady > h + delta) return true;
          if (ady >= h - delta) {
            const double ext = ady <= h ? delta : std::sqrt(std::max(0.0, delta * delta - (ady - h) * (ady - h)));
            out.push_back({s.center[0] - h - ext, s.center[0] + h + ext});
          } else {
            out.push_back({s.center[0] - h - delta, s.center[0] - h + delta});
            out.push_back({s.center[0] + h - delta, s.center[0] + h + delta});
          }
          return true;
        } else if constexpr (std::is_same_v<T, SweptCircle>) {
          const double dy = y - s.y;
          const double outer2 = (s.radius + delta) * (s.radius + delta) - dy * dy;
          if (outer2 < 0) return true;
          const double so = std::sqrt(outer2);
          const double inner2 = s.radius > delta ? (s.radius - delta) * (s.radius - delta) - dy * dy : -1.0;
          if (inner2 < 0) {
            out.push_back({s.a - so, s.b + so});
          } else {
            const double si = std::sqrt(inner2);
            out.push_back({s.a - so, s.b - si});
            out.push_back({s.a + si, s.b + so});
          }
          return true;
        } else {
          return false;
        }
      },
      shape);
}

// Bounding box of the delta-band around a shape: {xlo, xhi, ylo, yhi}.
std::array<double, 4> shape_bounds(const Shape& shape, double delta) {
  return std::visit(
      [&](const auto& s) -> std::array<double, 4> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          const double r = s.radius + delta;
          return {s.center[0] - r, s.center[0] + r, s.center[1] - r, s.center[1] + r};
        } else if constexpr (std::is_same_v<T, Annulus>) {
          const double r = s.radius + s.half_width + delta;
          return {s.center[0] - r, s.center[0] + r, s.center[1] - r, s.center[1] + r};
        } else if constexpr (std::is_same_v<T, SquareBoundary>) {
          const double r = s.half_side + delta;
          return {s.center[0] - r, s.center[0] + r, s.center[1] - r, s.center[1] + r};
        } else if constexpr (std::is_same_v<T, SegmentShape>) {
          return {std::min(s.a[0], s.b[0]) - delta, std::max(s.a[0], s.b[0]) + delta,
                  std::min(s.a[1], s.b[1]) - delta, std::max(s.a[1], s.b[1]) + delta};
        } else if constexpr (std::is_same_v<T, TriangleShape>) {
          const auto& t = s.triangle;
          return {std::min({t.v0[0], t.v1[0], t.v2[0]}) - delta, std::max({t.v0[0], t.v1[0], t.v2[0]}) + delta,
                  std::min({t.v0[1], t.v1[1], t.v2[1]}) - delta, std::max({t.v0[1], t.v1[1], t.v2[1]}) + delta};
        } else {
          const double r = s.radius + delta;
          return {s.a - r, s.b + r, s.y - r, s.y + r};
        }
      },
      shape);
}

double segment_distance(Point2 a, Point2 b, Point2 p) {
  const double vx = b[0] - a[0], vy = b[1] - a[1];
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p[0] - a[0] - t * vx, p[1] - a[1] - t * vy);
}

// Index range [first, last] of cell centres inside [lo, hi] along one axis, clamped to the grid.
std::pair<int, int> center_range(double lo, double hi, double origin, double h, int n) {
  const double a = std::ceil((lo - origin) / h - 0.5);
  const double b = std::floor((hi - origin) / h - 0.5);
  const int first = static_cast<int>(std::clamp(a, 0.0, static_cast<double>(n)));
  const int last = static_cast<int>(std::clamp(b, -1.0, static_cast<double>(n - 1)));
  return {first, last};
}

void check_delta(double delta, const GridSpec& grid) {
  if (!(delta > 0.0)) throw ArgumentError("band: delta must be positive");
  if (delta < grid.max_cell_size() / 4.0) {
    throw ArgumentError("band: grid too coarse for delta = " + std::to_string(delta) +
                        " (cell size " + std::to_string(grid.max_cell_size()) + ")");
  }
}

// Sorted, merged half-open cell spans from closed x-intervals on one row.
void emit_row(std::size_t line, XSpans& xs, const GridSpec& grid, const SpanSink& emit) {
  if (xs.empty()) return;
  std::sort(xs.begin(), xs.end(), [](const XSpan& a, const XSpan& b) { return a.lo < b.lo; });
  const double origin = grid.box().lo[0];
  const double h = grid.cell_size(0);
  int cur0 = -1, cur1 = -1;
  for (const auto& s : xs) {
    const auto [f, l] = center_range(s.lo, s.hi, origin, h, grid.n());
    if (l < f) continue;
    if (cur0 < 0) {
      cur0 = f;
      cur1 = l + 1;
    } else if (f <= cur1) {
      cur1 = std::max(cur1, l + 1);
    } else {
      emit(line, cur0, cur1);
      cur0 = f;
      cur1 = l + 1;
    }
  }
  if (cur0 >= 0) emit(line, cur0, cur1);
}

void visit_shape(const Shape& shape, double delta, const GridSpec& grid, const SpanSink& emit) {
  if (grid.dim() != 2) throw ArgumentError("geometric bands need a 2-D grid");
  const auto bounds = shape_bounds(shape, delta);
  const auto [j0, j1] = center_range(bounds[2], bounds[3], grid.box().lo[1], grid.cell_size(1), grid.n());
  XSpans xs;
  xs.reserve(4);
  for (int j = j0; j <= j1; ++j) {
    const double y = grid.center(1, j);
    if (shape_row_spans(shape, y, delta, xs)) {
      emit_row(static_cast<std::size_t>(j), xs, grid, emit);
      continue;
    }
    // Cellwise distance test inside the bounding box.
    const auto [i0, i1] = center_range(bounds[0], bounds[1], grid.box().lo[0], grid.cell_size(0), grid.n());
    int run = -1;
    for (int i = i0; i <= i1; ++i) {
      const bool in = shape_distance(shape, {grid.center(0, i), y}) <= delta;
      if (in && run < 0) run = i;
      if (!in && run >= 0) {
        emit(static_cast<std::size_t>(j), run, i);
        run = -1;
      }
    }
    if (run >= 0) emit(static_cast<std::size_t>(j), run, i1 + 1);
  }
}

void visit_phase(const PhaseLevel& level, double delta, const GridSpec& grid, const SpanSink& emit) {
  const auto& spec = level.spec;
  if (spec.dim() != grid.dim()) throw ArgumentError("phase band: phase and grid dimensions differ");
  if (static_cast<int>(level.x.size()) != spec.dim()) throw ArgumentError("phase band: centre dimension mismatch");
  if (spec.kind() == phase::PhaseKind::max_norm && grid.dim() == 2) {
    visit_shape(SquareBoundary{{level.x[0], level.x[1]}, level.t}, delta, grid, emit);
    return;
  }
  if (spec.kind() == phase::PhaseKind::unit_distance && grid.dim() == 2 && level.t > 0.0) {
    visit_shape(Circle{{level.x[0], level.x[1]}, level.t}, delta, grid, emit);
    return;
  }
  const int n = grid.n();
  const int d = grid.dim();
  std::vector<double> c(d);
  for (std::size_t line = 0; line < grid.line_count(); ++line) {
    std::size_t rest = line;
    for (int axis = 1; axis < d; ++axis) {
      c[axis] = grid.center(axis, static_cast<int>(rest % n));
      rest /= n;
    }
    int run = -1;
    for (int i = 0; i < n; ++i) {
      c[0] = grid.center(0, i);
      const bool in = std::abs(phase::eval_phase(spec, level.x, c) - level.t) <= delta;
      if (in && run < 0) run = i;
      if (!in && run >= 0) {
        emit(line, run, i);
        run = -1;
      }
    }
    if (run >= 0) emit(line, run, n);
  }
}

bool in_phase_band(const PhaseLevel& level, std::span<const double> y, double delta) {
  return std::abs(phase::eval_phase(level.spec, level.x, y) - level.t) <= delta;
}

}  // namespace

GridSpec::GridSpec(Box box, int cells_per_axis) : box_(std::move(box)), n_(cells_per_axis) {
  const int d = box_.dim();
  if (d != 2 && d != 3) throw ArgumentError("grid: only 2-D and 3-D grids are supported");
  for (int a = 0; a < d; ++a) {
    if (!(box_.hi[a] > box_.lo[a])) throw ArgumentError("grid: box must have hi > lo on every axis");
  }
  const int max_n = d == 2 ? 8192 : 512;
  if (n_ < 16 || n_ > max_n) {
    throw ArgumentError("grid: cells_per_axis must be in [16, " + std::to_string(max_n) + "]");
  }
}

double GridSpec::max_cell_size() const {
  double m = 0.0;
  for (int a = 0; a < dim(); ++a) m = std::max(m, cell_size(a));
  return m;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= cell_size(a);
  return v;
}

std::size_t GridSpec::cell_count() const { return line_count() * static_cast<std::size_t>(n_); }

std::size_t GridSpec::line_count() const {
  std::size_t c = 1;
  for (int a = 1; a < dim(); ++a) c *= static_cast<std::size_t>(n_);
  return c;
}

GridRaster::GridRaster(GridSpec grid)
    : grid_(std::move(grid)),
      words_per_line_((static_cast<std::size_t>(grid_.n()) + 63) / 64),
      bits_(words_per_line_ * grid_.line_count(), 0),
      filled_cache_(0) {}

bool GridRaster::test(std::size_t line, int i) const {
  return (bits_[line * words_per_line_ + i / 64] >> (i % 64)) & 1U;
}

void GridRaster::set(std::size_t line, int i) {
  bits_[line * words_per_line_ + i / 64] |= std::uint64_t{1} << (i % 64);
  filled_cache_.reset();
}

void GridRaster::set_span(std::size_t line, int i0, int i1) {
  if (i1 <= i0) return;
  std::uint64_t* row = bits_.data() + line * words_per_line_;
  const int w0 = i0 / 64, w1 = (i1 - 1) / 64;
  const std::uint64_t first = ~std::uint64_t{0} << (i0 % 64);
  const std::uint64_t last = ~std::uint64_t{0} >> (63 - (i1 - 1) % 64);
  if (w0 == w1) {
    row[w0] |= first & last;
  } else {
    row[w0] |= first;
    for (int w = w0 + 1; w < w1; ++w) row[w] = ~std::uint64_t{0};
    row[w1] |= last;
  }
  filled_cache_.reset();
}

std::size_t GridRaster::popcount() const {
  std::size_t c = 0;
  for (auto w : bits_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::size_t GridRaster::filled_count() const {
  if (!filled_cache_) filled_cache_ = popcount();
  return *filled_cache_;
}

void GridRaster::check_same_grid(const GridRaster& other) const {
  if (!(grid_ == other.grid_)) throw GridMismatch("rasters live on different grids");
}

GridRaster& GridRaster::operator|=(const GridRaster& other) {
  check_same_grid(other);
  for (std::size_t k = 0; k < bits_.size(); ++k) bits_[k] |= other.bits_[k];
  filled_cache_.reset();
  return *this;
}

GridRaster& GridRaster::operator&=(const GridRaster& other) {
  check_same_grid(other);
  for (std::size_t k = 0; k < bits_.size(); ++k) bits_[k] &= other.bits_[k];
  filled_cache_.reset();
  return *this;
}

bool GridRaster::operator==(const GridRaster& other) const { return grid_ == other.grid_ && bits_ == other.bits_; }

bool GridRaster::subset_of(const GridRaster& other) const {
  check_same_grid(other);
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    if (bits_[k] & ~other.bits_[k]) return false;
  }
  return true;
}

double shape_distance(const Shape& shape, Point2 p) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return std::abs(std::hypot(p[0] - s.center[0], p[1] - s.center[1]) - s.radius);
        } else if constexpr (std::is_same_v<T, Annulus>) {
          const double r = std::abs(std::hypot(p[0] - s.center[0], p[1] - s.center[1]) - s.radius);
          return std::max(0.0, r - s.half_width);
        } else if constexpr (std::is_same_v<T, SquareBoundary>) {
          const double dx = std::abs(p[0] - s.center[0]), dy = std::abs(p[1] - s.center[1]);
          const double h = s.half_side;
          if (dx <= h && dy <= h) return std::min(h - dx, h - dy);
          return std::hypot(std::max(dx - h, 0.0), std::max(dy - h, 0.0));
        } else if constexpr (std::is_same_v<T, SegmentShape>) {
          return segment_distance(s.a, s.b, p);
        } else if constexpr (std::is_same_v<T, TriangleShape>) {
          const auto& t = s.triangle;
          if (t.contains(p, 0.0)) return 0.0;
          return std::min({segment_distance(t.v0, t.v1, p), segment_distance(t.v1, t.v2, p),
                           segment_distance(t.v2, t.v0, p)});
        } else {
          // |p - (c, y)| over c in [a, b] sweeps [dmin, dmax].
          const double dy = p[1] - s.y;
          const double dx = p[0] < s.a ? s.a - p[0] : (p[0] > s.b ? p[0] - s.b : 0.0);
          const double dmin = std::hypot(dx, dy);
          const double dmax = std::max(std::hypot(p[0] - s.a, dy), std::hypot(p[0] - s.b, dy));
          if (s.radius >= dmin && s.radius <= dmax) return 0.0;
          return std::min(std::abs(dmin - s.radius), std::abs(dmax - s.radius));
        }
      },
      shape);
}

void visit_band_spans(const Band& band, const GridSpec& grid, const SpanSink& emit) {
  check_delta(band.delta, grid);
  static std::atomic<bool> warned{false};
  if (band.delta < grid.max_cell_size() / 2.0 && !warned.exchange(true)) {
    std::clog << "warning: band delta " << band.delta << " below half the cell size " << grid.max_cell_size() << " (reported once)\n";
  }
  std::visit(
      [&](const auto& src) {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, PhaseLevel>) {
          visit_phase(src, band.delta, grid, emit);
        } else {
          visit_shape(src, band.delta, grid, emit);
        }
      },
      band.source);
}

GridRaster rasterize_band(const Band& band, const GridSpec& grid) {
  GridRaster out(grid);
  visit_band_spans(band, grid, [&](std::size_t line, int i0, int i1) { out.set_span(line, i0, i1); });
  return out;
}

GridRaster rasterize_band(const phase::PhaseSpec& spec, std::span<const double> x, double t, double delta,
                          const GridSpec& grid) {
  return rasterize_band(Band{PhaseLevel{spec, {x.begin(), x.end()}, t}, delta}, grid);
}

GridRaster rasterize_band(const Shape& shape, double delta, const GridSpec& grid) {
  return rasterize_band(Band{shape, delta}, grid);
}

GridRaster union_of_bands(std::span<const Band> bands, const GridSpec& grid) {
  GridRaster out(grid);
  for (const auto& b : bands) {
    visit_band_spans(b, grid, [&](std::size_t line, int i0, int i1) { out.set_span(line, i0, i1); });
  }
  return out;
}

std::vector<std::uint32_t> coverage_counts(std::span<const Band> bands, const GridSpec& grid) {
  std::vector<std::uint32_t> counts(grid.cell_count(), 0);
  const auto n = static_cast<std::size_t>(grid.n());
  for (const auto& b : bands) {
    visit_band_spans(b, grid, [&](std::size_t line, int i0, int i1) {
      for (int i = i0; i < i1; ++i) ++counts[line * n + i];
    });
  }
  return counts;
}

GridRaster union_raster(std::span<const GridRaster> rasters) {
  if (rasters.empty()) throw ArgumentError("union_raster: no rasters");
  GridRaster out = rasters.front();
  for (std::size_t k = 1; k < rasters.size(); ++k) out |= rasters[k];
  return out;
}

GridRaster intersect_raster(const GridRaster& a, const GridRaster& b) {
  GridRaster out = a;
  out &= b;
  return out;
}

double intersection_area(const GridRaster& a, const GridRaster& b) { return intersect_raster(a, b).area(); }

MonteCarloEstimate monte_carlo_measure(const std::function<bool(std::span<const double>)>& predicate,
                                       const Box& box, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw ArgumentError("monte_carlo: samples must be positive");
  Rng rng = make_rng(seed, 0x3c3c);
  std::vector<double> y(box.dim());
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (int a = 0; a < box.dim(); ++a) y[a] = uniform(rng, box.lo[a], box.hi[a]);
    if (predicate(y)) ++hits;
  }
  MonteCarloEstimate r;
  r.samples = samples;
  r.hits = hits;
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  r.estimate = box.volume() * p;
  r.std_error = box.volume() * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  r.low_confidence = hits == 0 || samples < kMinMonteCarloSamples;
  return r;
}

MonteCarloEstimate monte_carlo_intersection(const PhaseLevel& a, const PhaseLevel& b, double delta,
                                            const Box& box, std::size_t samples, std::uint64_t seed) {
  if (box.dim() != 3 || a.spec.dim() != 3 || b.spec.dim() != 3) {
    throw ArgumentError("monte_carlo_intersection: families and box must be 3-D");
  }
  if (!(delta > 0.0)) throw ArgumentError("monte_carlo_intersection: delta must be positive");
  auto r = monte_carlo_measure(
      [&](std::span<const double> y) { return in_phase_band(a, y, delta) && in_phase_band(b, y, delta); }, box,
      samples, seed);
  if (r.hits == 0) {
    r.estimate = 0.0;
    r.std_error = 0.0;
  }
  return r;
}

double max_inscribed_interval(const GridRaster& raster, int axis, std::optional<fractal::Interval> across) {
  const auto& grid = raster.grid();
  if (grid.dim() != 2) throw ArgumentError("max_inscribed_interval: 2-D rasters only");
  if (axis != 0 && axis != 1) throw ArgumentError("max_inscribed_interval: axis must be 0 or 1");
  const int n = grid.n();
  const int other = 1 - axis;
  int best = 0;
  for (int line = 0; line < n; ++line) {
    if (across) {
      const double c = grid.center(other, line);
      if (c < across->a || c > across->b) continue;
    }
    int run = 0;
    for (int k = 0; k < n; ++k) {
      const bool filled = axis == 0 ? raster.test(static_cast<std::size_t>(line), k)
                                    : raster.test(static_cast<std::size_t>(k), line);
      run = filled ? run + 1 : 0;
      best = std::max(best, run);
    }
  }
  return best * grid.cell_size(axis);
}

std::vector<RefinementStep> refinement_series(const std::function<GridRaster(const GridSpec&)>& builder,
                                              std::span<const GridSpec> grids) {
  for (std::size_t k = 1; k < grids.size(); ++k) {
    if (grids[k].n() <= grids[k - 1].n()) throw ArgumentError("refinement_series: grids must be strictly refining");
  }
  std::vector<RefinementStep> out;
  for (const auto& g : grids) {
    RefinementStep step{g.n(), builder(g).area(), 0.0};
    if (!out.empty() && out.back().area > 0.0) step.change = (step.area - out.back().area) / out.back().area;
    out.push_back(step);
  }
  return out;
}

void write_pgm(std::ostream& os, const GridRaster& raster) {
  const auto& grid = raster.grid();
  if (grid.dim() != 2) throw ArgumentError("write_pgm: 2-D rasters only");
  const int n = grid.n();
  os << "P5\n" << n << ' ' << n << "\n255\n";
  std::string row(static_cast<std::size_t>(n), '\0');
  for (int j = n - 1; j >= 0; --j) {
    for (int i = 0; i < n; ++i) row[i] = raster.test(static_cast<std::size_t>(j), i) ? static_cast<char>(255) : '\0';
    os.write(row.data(), n);
  }
}

std::string pgm_filename(const std::string& scenario, int n, double delta) {
  std::ostringstream s;
  s << scenario << '_' << n << '_' << delta << ".pgm";
  return s.str();
}

}  // namespace gmt::raster
