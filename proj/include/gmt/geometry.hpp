#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gmt {

/// Axis-aligned box in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lo_, std::vector<double> hi_);

  /// [lo, hi]^dim
  static Box cube(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lo.size()); }
  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double volume() const;
  bool contains(std::span<const double> p, double tol = 0.0) const;
  bool operator==(const Box&) const = default;
};

/// Intersection of two boxes of equal dimension; may be empty (hi < lo on some axis).
Box intersect(const Box& a, const Box& b);

double dot(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace gmt
