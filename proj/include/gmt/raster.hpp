#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gmt/fractal.hpp"
#include "gmt/geometry.hpp"
#include "gmt/phase.hpp"

/// Grid-based measure engine. Cells are sampled at their centres: a cell
/// belongs to a band iff its centre does.
namespace gmt::raster {

using fractal::Point2;

class GridSpec {
 public:
  /// n per axis; 16 <= n <= 8192 in 2-D and 16 <= n <= 512 in 3-D.
  GridSpec(Box box, int cells_per_axis);

  const Box& box() const { return box_; }
  int dim() const { return box_.dim(); }
  int n() const { return n_; }
  double cell_size(int axis) const { return box_.extent(axis) / n_; }
  double max_cell_size() const;
  double cell_volume() const;
  std::size_t cell_count() const;
  /// Number of grid lines parallel to axis 0 (n^(d-1)).
  std::size_t line_count() const;
  double center(int axis, int index) const { return box_.lo[axis] + (index + 0.5) * cell_size(axis); }
  bool operator==(const GridSpec&) const = default;

 private:
  Box box_;
  int n_;
};

/// Occupancy bitmap. Line `l` (cells along axis 0) has index j + n*k for
/// the 3-D cell (i, j, k); in 2-D the line index is the row j.
class GridRaster {
 public:
  explicit GridRaster(GridSpec grid);

  const GridSpec& grid() const { return grid_; }

  bool test(std::size_t line, int i) const;
  void set(std::size_t line, int i);
  /// Sets cells [i0, i1) of one line.
  void set_span(std::size_t line, int i0, int i1);

  std::size_t filled_count() const;
  /// Recounts the bitmap, bypassing the cache.
  std::size_t popcount() const;
  double area() const { return static_cast<double>(filled_count()) * grid_.cell_volume(); }

  GridRaster& operator|=(const GridRaster& other);
  GridRaster& operator&=(const GridRaster& other);
  bool operator==(const GridRaster& other) const;
  /// Cellwise this ⊆ other.
  bool subset_of(const GridRaster& other) const;

  std::size_t words_per_line() const { return words_per_line_; }

 private:
  void check_same_grid(const GridRaster& other) const;

  GridSpec grid_;
  std::size_t words_per_line_;
  std::vector<std::uint64_t> bits_;
  mutable std::optional<std::size_t> filled_cache_;
};

// Geometric shape descriptors (2-D). Bands are Euclidean delta-neighbourhoods.
struct Circle {
  Point2 center{};
  double radius = 1.0;
};
/// {z : ||z - c| - r| <= half_width}
struct Annulus {
  Point2 center{};
  double radius = 1.0;
  double half_width = 0.0;
};
/// Boundary of the square c + [-h, h]^2 (the unit max-norm sphere for h = 1).
struct SquareBoundary {
  Point2 center{};
  double half_side = 1.0;
};
struct SegmentShape {
  Point2 a{}, b{};
};
/// Solid triangle.
struct TriangleShape {
  fractal::Triangle triangle;
};
/// Union of radius-r circles centred on the horizontal segment [a, b] x {y}.
struct SweptCircle {
  double a = 0.0, b = 0.0, y = 0.0;
  double radius = 1.0;
};

using Shape = std::variant<Circle, Annulus, SquareBoundary, SegmentShape, TriangleShape, SweptCircle>;

/// Euclidean distance from p to the shape (0 inside solids).
double shape_distance(const Shape& shape, Point2 p);

/// {y : phi(x, y) = t}
struct PhaseLevel {
  phase::PhaseSpec spec;
  std::vector<double> x;
  double t = 1.0;
};

struct Band {
  std::variant<PhaseLevel, Shape> source;
  double delta = 0.0;
};

/// Calls `emit(line, i0, i1)` for disjoint, sorted spans [i0, i1) of cells in
/// the band. Phase mode: |phi(x, c) - t| <= delta at the cell centre c
/// (2-D max-norm and unit-distance levels are routed to the geometric
/// square boundary and circle). Geometric
/// mode: distance(c, shape) <= delta. Throws ArgumentError when
/// delta < cell_size / 4.
using SpanSink = std::function<void(std::size_t line, int i0, int i1)>;
void visit_band_spans(const Band& band, const GridSpec& grid, const SpanSink& emit);

GridRaster rasterize_band(const Band& band, const GridSpec& grid);
GridRaster rasterize_band(const phase::PhaseSpec& spec, std::span<const double> x, double t, double delta,
                          const GridSpec& grid);
GridRaster rasterize_band(const Shape& shape, double delta, const GridSpec& grid);

/// Union of many bands rasterised straight into one bitmap.
GridRaster union_of_bands(std::span<const Band> bands, const GridSpec& grid);

/// Per-cell count of bands containing the cell: the discrete incidence
/// function I(z). Indexed line * n + i.
std::vector<std::uint32_t> coverage_counts(std::span<const Band> bands, const GridSpec& grid);

GridRaster union_raster(std::span<const GridRaster> rasters);
GridRaster intersect_raster(const GridRaster& a, const GridRaster& b);
double intersection_area(const GridRaster& a, const GridRaster& b);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t hits = 0;
  std::size_t samples = 0;
  bool low_confidence = false;
};

inline constexpr std::size_t kMinMonteCarloSamples = 100000;

/// Volume of {y in box : predicate(y)} from uniform samples; binomial
/// standard error.
MonteCarloEstimate monte_carlo_measure(const std::function<bool(std::span<const double>)>& predicate,
                                       const Box& box, std::size_t samples, std::uint64_t seed);

/// |band_delta(a) ∩ band_delta(b)| in 3-D. Flagged low-confidence when there
/// are no hits or fewer than 10^5 samples.
MonteCarloEstimate monte_carlo_intersection(const PhaseLevel& a, const PhaseLevel& b, double delta,
                                            const Box& box, std::size_t samples, std::uint64_t seed);

/// Longest run of filled cells along a line parallel to `axis`, times the
/// cell size on that axis. In 2-D `across` restricts the perpendicular
/// cell-centre coordinate.
double max_inscribed_interval(const GridRaster& raster, int axis,
                              std::optional<fractal::Interval> across = std::nullopt);

struct RefinementStep {
  int n = 0;
  double area = 0.0;
  double change = 0.0;  ///< relative change from the previous grid (0 for the first)
};

std::vector<RefinementStep> refinement_series(const std::function<GridRaster(const GridSpec&)>& builder,
                                              std::span<const GridSpec> grids);

/// Binary PGM (P5), one byte per cell, 255 = filled, top row = largest y.
void write_pgm(std::ostream& os, const GridRaster& raster);
std::string pgm_filename(const std::string& scenario, int n, double delta);

}  // namespace gmt::raster
