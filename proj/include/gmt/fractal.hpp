#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gmt/geometry.hpp"

/// Parameter sets: Cantor-type interval sets, weighted point clouds standing
/// in for Frostman measures, separated lattices, and Perron trees.
namespace gmt::fractal {

struct Interval {
  double a = 0.0;
  double b = 0.0;
  double length() const { return b - a; }
};

struct IntervalSet {
  std::vector<Interval> intervals;  ///< sorted, pairwise disjoint
  int depth = 0;

  /// {[x, x]}: a single degenerate interval, used as the trivial factor of a product.
  static IntervalSet singleton(double x);

  double total_length() const;
  double max_length() const;
  bool is_degenerate() const { return intervals.size() == 1 && intervals.front().length() == 0.0; }
  /// Throws ArgumentError if the ordering/disjointness/containment invariants fail.
  void validate() const;
};

inline constexpr int kMaxCantorDepth = 20;

IntervalSet cantor_middle_thirds(int depth);

/// Smith-Volterra-Cantor set: stage n removes an open middle interval of
/// length 4^-n from each of the 2^(n-1) pieces.
IntervalSet fat_cantor(int depth);

/// Closed-form total length of fat_cantor(depth): 1 - (1 - 2^-depth) / 2.
double fat_cantor_length(int depth);

/// Weighted point cloud in a declared box. Coordinates are stored flat,
/// point i occupying coords[i*dim, (i+1)*dim).
class PointSet {
 public:
  PointSet(int dim, std::vector<double> coords, std::vector<double> weights, Box box);

  /// Equal weights 1/n.
  static PointSet uniform(int dim, std::vector<double> coords, Box box);

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)}; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  const std::vector<double>& weights() const { return weights_; }
  const Box& box() const { return box_; }

  std::optional<double> claimed_exponent;
  std::optional<double> min_separation;

  /// Weights sum to 1 within 1e-12, points inside the box, separation honoured.
  void validate() const;

  /// Every coordinate multiplied by `factor`; box scaled alike.
  PointSet scaled(double factor) const;

 private:
  int dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
  Box box_;
};

/// `samples_per_cell` seeded uniform points inside every cell rows[i] x cols[j].
PointSet product_point_cloud(const IntervalSet& rows, const IntervalSet& cols, int samples_per_cell,
                             std::uint64_t seed);

/// One point per unit square of [0, q]^2, offsets drawn from [0.25, 0.75]^2.
PointSet separated_lattice(int q, std::uint64_t seed);

/// rho_q = q^(-2/s).
double thickening_radius(int q, double s);

/// max over data-point centres of mu(B(c, r)) / r^a, one entry per radius.
std::vector<double> frostman_profile(const PointSet& points, double a, std::span<const double> radii);

/// Empirical Frostman constant: maximum of frostman_profile.
double frostman_ratio(const PointSet& points, double a, std::span<const double> radii);

struct BoxCount {
  double scale = 0.0;
  std::size_t occupied = 0;
};

std::vector<BoxCount> box_counts(const PointSet& points, std::span<const double> scales);

/// Least-squares slope of log(occupied boxes) against log(1/scale).
double box_dimension(const PointSet& points, std::span<const double> scales);

using Point2 = std::array<double, 2>;

/// Vertices v0, v1 span the base; v2 is the apex.
struct Triangle {
  Point2 v0{}, v1{}, v2{};
  double area() const;
  bool contains(Point2 p, double tol = 1e-12) const;
};

struct Segment2 {
  Point2 a{}, b{};
};

struct TriangleSet {
  std::vector<Triangle> triangles;
  int stage = 0;
  int direction_count = 1;

  /// For each elementary triangle, the full-height segment from its base
  /// midpoint to its apex; the directions are pairwise distinct.
  std::vector<Segment2> direction_segments() const;
  bool contains(Point2 p) const;
};

/// Base triangle with base [0, 1] x {0} and apex (1/2, height).
TriangleSet base_triangle(double height);

/// Perron tree: 2^stage elementary triangles obtained by subdividing the base,
/// merged pairwise level by level; at each level the right half slides left
/// until its main triangle overlaps the left one by half its base.
TriangleSet perron_tree(int stage, double base_triangle_height);

/// Overlap fraction used by perron_tree.
inline constexpr double kPerronOverlap = 0.5;

void write_csv(std::ostream& os, const PointSet& points);
void write_csv(std::ostream& os, const IntervalSet& set);

}  // namespace gmt::fractal
