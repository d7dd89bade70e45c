#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gmt/geometry.hpp"

/// Phase functions phi(x, y) whose level sets {y : phi(x, y) = t} are the
/// hypersurfaces studied throughout the library, together with their first
/// and mixed second derivatives and the bordered rotational-curvature
/// determinant
///
///     det [[0, grad_x phi], [-(grad_y phi)^T, d2_xy phi]].
namespace gmt::phase {

enum class PhaseKind {
  unit_distance,          ///< |x - y|
  dot_product,            ///< x . y
  translated_paraboloid,  ///< y_d - x_d - |y' - x'|^2
  diffeo_distance,        ///< |Phi(y) - x|, Phi(y) = y + kappa (sin y_2, ..., sin y_d, sin y_1)
  max_norm,               ///< max_i |y_i - x_i|; not smooth
  bourgain_curve,         ///< x . y + t y1 y2 + t^2 y1^2 / 2, frozen parameter t; d = 2
};

std::string_view to_string(PhaseKind kind);
/// Accepts the hyphenated config spelling ("unit-distance") or the enum spelling.
PhaseKind parse_phase_kind(std::string_view name);

inline constexpr double kDefaultKappa = 0.3;
inline constexpr double kFiniteDifferenceStep = 1e-5;
/// Step for the mixed partials; their roundoff scales like eps |phi| / h^2.
inline constexpr double kMixedDifferenceStep = 1e-4;

class PhaseSpec {
 public:
  /// Recognised params: "kappa" (diffeo-distance, default 0.3, |kappa| < 1) and
  /// "t" (bourgain-curve, default 0). Anything else is rejected.
  PhaseSpec(PhaseKind kind, int dim, std::map<std::string, double> params = {});

  static PhaseSpec from_config(std::string_view kind, int dim, const std::map<std::string, double>& params);

  PhaseKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::map<std::string, double>& params() const { return params_; }
  bool is_smooth() const { return kind_ != PhaseKind::max_norm; }

  double kappa() const;
  double bourgain_t() const;

 private:
  PhaseKind kind_;
  int dim_;
  std::map<std::string, double> params_;
};

/// Phi(y) for the diffeo-distance family.
std::vector<double> diffeo_map(const PhaseSpec& spec, std::span<const double> y);

/// Smallest |det D Phi| over `samples` seeded points of `box`.
double min_diffeo_jacobian(const PhaseSpec& spec, const Box& box, int samples, std::uint64_t seed);

double eval_phase(const PhaseSpec& spec, std::span<const double> x, std::span<const double> y);

enum class DerivativeMethod { analytic, finite_difference };

struct PhaseDerivatives {
  Eigen::VectorXd grad_x;
  Eigen::VectorXd grad_y;
  Eigen::MatrixXd mixed;  ///< mixed(i, j) = d^2 phi / dx_i dy_j
};

/// Throws UnsupportedOperation for max-norm and SingularityError where a
/// distance-type phase is not differentiable.
PhaseDerivatives gradients(const PhaseSpec& spec, std::span<const double> x, std::span<const double> y,
                           DerivativeMethod method = DerivativeMethod::analytic);

double bordered_determinant(const PhaseDerivatives& d);

double rotational_curvature(const PhaseSpec& spec, std::span<const double> x, std::span<const double> y,
                            DerivativeMethod method = DerivativeMethod::analytic);

struct CurvatureSample {
  std::vector<double> x;
  std::vector<double> y;
  double det_value = 0.0;
  std::array<double, 2> grad_norms{};  ///< |grad_x phi|, |grad_y phi|
};

CurvatureSample curvature_sample(const PhaseSpec& spec, std::span<const double> x, std::span<const double> y);

/// Samples of {y in box : phi(x, y) = t}, each within 1e-10 of the level.
/// Closed forms for the distance, dot-product, paraboloid and max-norm
/// families; bisection along rays from x otherwise. Rays that miss the level
/// inside the box are skipped; throws EmptyLevelError if all of them miss.
std::vector<std::vector<double>> level_points(const PhaseSpec& spec, std::span<const double> x, double t,
                                              int count, std::uint64_t seed, const Box& box);

/// Characteristic curve of the Bourgain phase: (w1 - t y2 - t^2 y1, w2 - t y1, t).
std::array<double, 3> bourgain_characteristic(double w1, double w2, double y1, double y2, double t);

/// The w1 = 0, w2 = -y2 slice; every point satisfies X = Y Z.
std::array<double, 3> bourgain_compressed_point(double y1, double y2, double t);

}  // namespace gmt::phase
