#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "gmt/fractal.hpp"
#include "gmt/raster.hpp"

/// Frequency-side diagnostics on 2-D gridded densities.
namespace gmt::spectral {

using raster::GridSpec;

/// Per-cell density (mass / cell volume), row-major: values[j * n + i].
struct GriddedDensity {
  GridSpec grid;
  std::vector<double> values;
  double total_mass = 0.0;

  explicit GriddedDensity(GridSpec g);
  double cell_mass(std::size_t k) const { return values[k] * grid.cell_volume(); }
  /// Sum of cell masses.
  double mass() const;
  /// L2 norm, sqrt(sum values^2 * cell volume).
  double l2_norm() const;
  /// Nonnegative values and total_mass consistent with the cells (1e-9 relative).
  void validate() const;
};

/// Deposits each point's weight in its containing cell.
GriddedDensity grid_density_from_points(const fractal::PointSet& points, const GridSpec& grid);

// Littlewood-Paley decomposition. Windows are radial in DFT index units
// (Nyquist = n/2): eta_0 = 1 - step_1, eta_j = step_j - step_{j+1}, and the
// top window eta_jmax = step_jmax, where step_j rises from 0 to 1 with a
// raised cosine of width `width` octaves centred on radius 2^j.
inline constexpr double kDefaultTransitionWidth = 1.0 / 32.0;

double lp_window(int j, int j_max, double radius, double width = kDefaultTransitionWidth);

struct LpNorm {
  int j = 0;
  double norm = 0.0;
};

std::vector<LpNorm> lp_projection_norms(const GriddedDensity& density, int j_max,
                                        double width = kDefaultTransitionWidth);

struct DecayFit {
  std::vector<double> abscissae;
  std::vector<double> norms;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  /// intercept + slope * abscissa, as log2 of the norm.
  double fitted_log2(double abscissa) const { return intercept + slope * abscissa; }
};

/// OLS of log2(norm) on the abscissae.
DecayFit fit_log2(std::vector<double> abscissae, std::vector<double> norms);
/// Fit of log2 ||mu^j|| against j over j_lo..j_hi.
DecayFit fit_lp_decay(std::span<const LpNorm> norms, int j_lo = 3, int j_hi = 8);

/// Columns level,norm,fitted_value.
void write_csv(std::ostream& os, const DecayFit& fit);

// Incidence measure. Each band carries its weight, spread uniformly over
// the band's filled cells.
struct IncidenceDensity {
  GriddedDensity nu;
  std::size_t empty_bands = 0;
};

IncidenceDensity incidence_density(std::span<const raster::Band> bands, std::span<const double> weights,
                                   const GridSpec& grid);
/// Bands {|phi(x_i, .) - t_i| <= delta} for every centre, weighted by the centre weights.
IncidenceDensity incidence_density(const phase::PhaseSpec& spec, const fractal::PointSet& centers,
                                   std::span<const double> levels, double delta, const GridSpec& grid);

/// nu * rho_eps for a normalised C-infinity radial bump of radius eps
/// (periodic convolution on the grid).
GriddedDensity mollify(const GriddedDensity& nu, double eps);

struct MollifiedNorm {
  double eps = 0.0;
  double norm = 0.0;
  double mass = 0.0;
};

std::vector<MollifiedNorm> mollified_l2(const GriddedDensity& nu, std::span<const double> epsilons);

// Fourier transforms of smooth-cutoff surface measures.
enum class SurfaceMode { circle_2d, curve_3d };

std::string_view to_string(SurfaceMode mode);
SurfaceMode parse_surface_mode(std::string_view name);

inline constexpr int kSurfaceNodes = 4096;
inline constexpr int kMinDirections = 16;
/// Enough random directions to land near the worst (binormal) directions at |xi| = 2^9.
inline constexpr int kDefaultDirections = 16384;

/// |sigma_hat(xi)| by midpoint quadrature over s in [-1, 1].
double fourier_magnitude(SurfaceMode mode, std::span<const double> xi);
/// Total mass of the cutoff surface measure (= |sigma_hat(0)|).
double surface_mass(SurfaceMode mode);

/// Max of |sigma_hat(r u)| over seeded random unit directions u, per radius r;
/// slope fitted on log2 max-magnitude against log2 r.
DecayFit surface_fourier_decay(SurfaceMode mode, std::span<const double> freqs, int directions,
                               std::uint64_t seed);

}  // namespace gmt::spectral
