#include "gmt/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>

#include "gmt/errors.hpp"
#include "gmt/random.hpp"

namespace gmt::spectral {

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

using Spectrum = std::unique_ptr<fftw_complex[], FftwFree>;
using RealBuf = std::unique_ptr<double[], FftwFree>;

/// Square n x n real-to-complex transform pair.
class Fft2 {
 public:
  explicit Fft2(int n) : n_(n), half_(n / 2 + 1) {
    real_.reset(fftw_alloc_real(static_cast<std::size_t>(n) * n));
    spec_.reset(fftw_alloc_complex(static_cast<std::size_t>(n) * half_));
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_2d(n, n, real_.get(), spec_.get(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_2d(n, n, spec_.get(), real_.get(), FFTW_ESTIMATE);
  }
  ~Fft2() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  int n() const { return n_; }
  int half() const { return half_; }
  std::size_t spectrum_size() const { return static_cast<std::size_t>(n_) * half_; }
  double* real() { return real_.get(); }
  fftw_complex* spectrum() { return spec_.get(); }

  void forward() { fftw_execute(forward_); }
  /// Unnormalised: the result is n^2 times the true inverse.
  void inverse() { fftw_execute(inverse_); }

  /// Radial frequency of spectrum entry (row a, column b) in index units.
  double radius(int a, int b) const {
    const int ky = a <= n_ / 2 ? a : a - n_;
    return std::hypot(static_cast<double>(ky), static_cast<double>(b));
  }

 private:
  int n_;
  int half_;
  RealBuf real_;
  Spectrum spec_;
  fftw_plan forward_{};
  fftw_plan inverse_{};
};

double raised_step(double u, double width) {
  const double t = std::clamp((u + width / 2.0) / width, 0.0, 1.0);
  return 0.5 - 0.5 * std::cos(std::numbers::pi * t);
}

double step_at(int j, double radius, double width) {
  if (radius <= 0.0) return 0.0;
  return raised_step(std::log2(radius) - j, width);
}

double bump(double u) { return u * u < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

struct SurfaceQuadrature {
  std::vector<double> weights;
  std::vector<double> points;  // flat, dim per node
  int dim;
};

const SurfaceQuadrature& quadrature(SurfaceMode mode) {
  static const SurfaceQuadrature circle = [] {
    SurfaceQuadrature q{{}, {}, 2};
    for (int m = 0; m < kSurfaceNodes; ++m) {
      const double s = -1.0 + (m + 0.5) * 2.0 / kSurfaceNodes;
      q.weights.push_back(bump(s) * 2.0 / kSurfaceNodes);
      q.points.push_back(std::cos(s));
      q.points.push_back(std::sin(s));
    }
    return q;
  }();
  static const SurfaceQuadrature curve = [] {
    SurfaceQuadrature q{{}, {}, 3};
    for (int m = 0; m < kSurfaceNodes; ++m) {
      const double s = -1.0 + (m + 0.5) * 2.0 / kSurfaceNodes;
      // |gamma'(s)| = 1 + s^2 / 2
      q.weights.push_back(bump(s) * (1.0 + s * s / 2.0) * 2.0 / kSurfaceNodes);
      q.points.push_back(s);
      q.points.push_back(s * s / 2.0);
      q.points.push_back(s * s * s / 6.0);
    }
    return q;
  }();
  return mode == SurfaceMode::circle_2d ? circle : curve;
}

double magnitude_along(const SurfaceQuadrature& q, std::span<const double> proj, double r) {
  const double k = -2.0 * std::numbers::pi * r;
  double re = 0.0, im = 0.0;
  for (std::size_t m = 0; m < proj.size(); ++m) {
    const double ph = k * proj[m];
    re += q.weights[m] * std::cos(ph);
    im += q.weights[m] * std::sin(ph);
  }
  return std::hypot(re, im);
}

void require_square(const GridSpec& grid, const char* what) {
  if (grid.dim() != 2) throw ArgumentError(std::string(what) + ": 2-D grids only");
}

}  // namespace

GriddedDensity::GriddedDensity(GridSpec g) : grid(std::move(g)), values(grid.cell_count(), 0.0) {
  require_square(grid, "GriddedDensity");
}

double GriddedDensity::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_volume();
}

double GriddedDensity::l2_norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s * grid.cell_volume());
}

void GriddedDensity::validate() const {
  if (values.size() != grid.cell_count()) throw ArgumentError("density: value count does not match grid");
  for (double v : values) {
    if (!(v >= 0.0)) throw ArgumentError("density: negative or NaN value");
  }
  const double m = mass();
  if (std::abs(m - total_mass) > 1e-9 * std::max(1.0, std::abs(total_mass))) {
    throw ArgumentError("density: total_mass inconsistent with cell values");
  }
}

GriddedDensity grid_density_from_points(const fractal::PointSet& points, const GridSpec& grid) {
  require_square(grid, "grid_density_from_points");
  if (points.dim() != 2) throw ArgumentError("grid_density_from_points: points must be 2-D");
  GriddedDensity out(grid);
  const int n = grid.n();
  const double inv = 1.0 / grid.cell_volume();
  double total = 0.0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto pt = points.point(p);
    if (!grid.box().contains(pt)) throw ArgumentError("grid_density_from_points: point outside grid box");
    int idx[2];
    for (int a = 0; a < 2; ++a) {
      idx[a] = std::min(n - 1, static_cast<int>((pt[a] - grid.box().lo[a]) / grid.cell_size(a)));
    }
    out.values[static_cast<std::size_t>(idx[1]) * n + idx[0]] += points.weight(p) * inv;
    total += points.weight(p);
  }
  out.total_mass = total;
  return out;
}

double lp_window(int j, int j_max, double radius, double width) {
  if (j < 0 || j > j_max) throw ArgumentError("lp_window: j outside [0, j_max]");
  if (!(width > 0.0 && width <= 1.0)) throw ArgumentError("lp_window: width must be in (0, 1]");
  if (j_max == 0) return 1.0;
  if (j == 0) return 1.0 - step_at(1, radius, width);
  if (j == j_max) return step_at(j, radius, width);
  return step_at(j, radius, width) - step_at(j + 1, radius, width);
}

std::vector<LpNorm> lp_projection_norms(const GriddedDensity& density, int j_max, double width) {
  const int n = density.grid.n();
  if (j_max < 0) throw ArgumentError("lp_projection_norms: j_max must be nonnegative");
  if (std::ldexp(1.0, j_max) > n / 2.0) {
    throw ArgumentError("lp_projection_norms: 2^j_max exceeds the Nyquist frequency " + std::to_string(n / 2));
  }
  Fft2 fft(n);
  std::copy(density.values.begin(), density.values.end(), fft.real());
  fft.forward();
  std::vector<std::complex<double>> full(fft.spectrum_size());
  for (std::size_t k = 0; k < full.size(); ++k) full[k] = {fft.spectrum()[k][0], fft.spectrum()[k][1]};

  std::vector<double> radius(full.size());
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < fft.half(); ++b) radius[static_cast<std::size_t>(a) * fft.half() + b] = fft.radius(a, b);
  }

  const double scale = 1.0 / (static_cast<double>(n) * n);
  const double cell = density.grid.cell_volume();
  std::vector<LpNorm> out;
  for (int j = 0; j <= j_max; ++j) {
    for (std::size_t k = 0; k < full.size(); ++k) {
      const double w = lp_window(j, j_max, radius[k], width);
      fft.spectrum()[k][0] = full[k].real() * w;
      fft.spectrum()[k][1] = full[k].imag() * w;
    }
    fft.inverse();
    double s = 0.0;
    const double* r = fft.real();
    for (std::size_t k = 0, total = static_cast<std::size_t>(n) * n; k < total; ++k) {
      const double v = r[k] * scale;
      s += v * v;
    }
    out.push_back({j, std::sqrt(s * cell)});
  }
  return out;
}

DecayFit fit_log2(std::vector<double> abscissae, std::vector<double> norms) {
  if (abscissae.size() != norms.size()) throw FitError("fit: abscissae and norms differ in length");
  if (abscissae.size() < 2) throw FitError("fit: need at least two points");
  std::vector<double> logs;
  for (double v : norms) {
    if (!(v > 0.0)) throw FitError("fit: norms must be positive");
    logs.push_back(std::log2(v));
  }
  const auto lf = least_squares(abscissae, logs);
  DecayFit f;
  f.abscissae = std::move(abscissae);
  f.norms = std::move(norms);
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.residual = lf.rms_residual;
  return f;
}

DecayFit fit_lp_decay(std::span<const LpNorm> norms, int j_lo, int j_hi) {
  std::vector<double> js, vs;
  for (const auto& p : norms) {
    if (p.j >= j_lo && p.j <= j_hi) {
      js.push_back(p.j);
      vs.push_back(p.norm);
    }
  }
  if (js.size() < 2) throw FitError("fit_lp_decay: fewer than two levels in the fit window");
  return fit_log2(std::move(js), std::move(vs));
}

void write_csv(std::ostream& os, const DecayFit& fit) {
  os << "level,norm,fitted_value\n";
  os.precision(17);
  for (std::size_t k = 0; k < fit.abscissae.size(); ++k) {
    os << fit.abscissae[k] << ',' << fit.norms[k] << ',' << std::exp2(fit.fitted_log2(fit.abscissae[k])) << '\n';
  }
}

IncidenceDensity incidence_density(std::span<const raster::Band> bands, std::span<const double> weights,
                                   const GridSpec& grid) {
  require_square(grid, "incidence_density");
  if (bands.size() != weights.size()) throw ArgumentError("incidence_density: one weight per band required");
  for (const auto& b : bands) {
    if (b.delta < grid.max_cell_size()) throw ArgumentError("incidence_density: delta below the cell size");
  }
  std::vector<std::size_t> cells(bands.size(), 0);
  for (std::size_t b = 0; b < bands.size(); ++b) {
    raster::visit_band_spans(bands[b], grid, [&](std::size_t, int i0, int i1) { cells[b] += i1 - i0; });
  }
  IncidenceDensity out{GriddedDensity(grid), 0};
  const auto n = static_cast<std::size_t>(grid.n());
  const double cell = grid.cell_volume();
  double total = 0.0;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    if (cells[b] == 0) {
      ++out.empty_bands;
      continue;
    }
    const double v = weights[b] / (static_cast<double>(cells[b]) * cell);
    raster::visit_band_spans(bands[b], grid, [&](std::size_t line, int i0, int i1) {
      double* row = out.nu.values.data() + line * n;
      for (int i = i0; i < i1; ++i) row[i] += v;
    });
    total += weights[b];
  }
  if (!bands.empty() && out.empty_bands == bands.size()) {
    throw EmptyLevelError("incidence_density: every band is empty in the grid box");
  }
  if (out.empty_bands > 0) {
    std::clog << "warning: incidence_density dropped " << out.empty_bands << " empty band(s)\n";
  }
  out.nu.total_mass = total;
  return out;
}

IncidenceDensity incidence_density(const phase::PhaseSpec& spec, const fractal::PointSet& centers,
                                   std::span<const double> levels, double delta, const GridSpec& grid) {
  if (levels.size() != 1 && levels.size() != centers.size()) {
    throw ArgumentError("incidence_density: give one level or one level per centre");
  }
  std::vector<raster::Band> bands;
  bands.reserve(centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const auto x = centers.point(c);
    const double t = levels.size() == 1 ? levels[0] : levels[c];
    bands.push_back({raster::PhaseLevel{spec, {x.begin(), x.end()}, t}, delta});
  }
  return incidence_density(bands, centers.weights(), grid);
}

GriddedDensity mollify(const GriddedDensity& nu, double eps) {
  const auto& grid = nu.grid;
  const int n = grid.n();
  const double hx = grid.cell_size(0), hy = grid.cell_size(1);
  if (!(eps >= 2.0 * grid.max_cell_size())) {
    throw ArgumentError("mollify: eps = " + std::to_string(eps) + " below twice the cell size");
  }
  if (eps >= std::min(grid.box().extent(0), grid.box().extent(1)) / 2.0) {
    throw ArgumentError("mollify: eps exceeds half the box");
  }
  const double cell = grid.cell_volume();

  Fft2 fft(n);
  // Kernel transform.
  std::fill(fft.real(), fft.real() + static_cast<std::size_t>(n) * n, 0.0);
  const int rx = static_cast<int>(std::ceil(eps / hx)), ry = static_cast<int>(std::ceil(eps / hy));
  double ksum = 0.0;
  for (int dj = -ry; dj <= ry; ++dj) {
    for (int di = -rx; di <= rx; ++di) {
      const double v = bump(std::hypot(di * hx, dj * hy) / eps);
      if (v == 0.0) continue;
      fft.real()[static_cast<std::size_t>((dj + n) % n) * n + (di + n) % n] = v;
      ksum += v;
    }
  }
  for (std::size_t k = 0, total = static_cast<std::size_t>(n) * n; k < total; ++k) fft.real()[k] /= ksum * cell;
  fft.forward();
  std::vector<std::complex<double>> kernel(fft.spectrum_size());
  for (std::size_t k = 0; k < kernel.size(); ++k) kernel[k] = {fft.spectrum()[k][0], fft.spectrum()[k][1]};

  std::copy(nu.values.begin(), nu.values.end(), fft.real());
  fft.forward();
  for (std::size_t k = 0; k < kernel.size(); ++k) {
    const std::complex<double> z = std::complex<double>(fft.spectrum()[k][0], fft.spectrum()[k][1]) * kernel[k];
    fft.spectrum()[k][0] = z.real();
    fft.spectrum()[k][1] = z.imag();
  }
  fft.inverse();

  GriddedDensity out(grid);
  const double scale = cell / (static_cast<double>(n) * n);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = std::max(0.0, fft.real()[k] * scale);
  out.total_mass = out.mass();
  return out;
}

std::vector<MollifiedNorm> mollified_l2(const GriddedDensity& nu, std::span<const double> epsilons) {
  std::vector<MollifiedNorm> out;
  for (double eps : epsilons) {
    const auto lam = mollify(nu, eps);
    out.push_back({eps, lam.l2_norm(), lam.total_mass});
  }
  return out;
}

std::string_view to_string(SurfaceMode mode) { return mode == SurfaceMode::circle_2d ? "circle-2d" : "curve-3d"; }

SurfaceMode parse_surface_mode(std::string_view name) {
  if (name == "circle-2d") return SurfaceMode::circle_2d;
  if (name == "curve-3d") return SurfaceMode::curve_3d;
  throw ArgumentError("unknown surface mode '" + std::string(name) + "'");
}

double fourier_magnitude(SurfaceMode mode, std::span<const double> xi) {
  const auto& q = quadrature(mode);
  if (static_cast<int>(xi.size()) != q.dim) throw ArgumentError("fourier_magnitude: frequency dimension mismatch");
  const double r = std::sqrt(dot(xi, xi));
  if (r == 0.0) return surface_mass(mode);
  std::vector<double> proj(kSurfaceNodes);
  for (int m = 0; m < kSurfaceNodes; ++m) {
    double s = 0.0;
    for (int a = 0; a < q.dim; ++a) s += xi[a] / r * q.points[static_cast<std::size_t>(m) * q.dim + a];
    proj[m] = s;
  }
  return magnitude_along(q, proj, r);
}

double surface_mass(SurfaceMode mode) {
  double s = 0.0;
  for (double w : quadrature(mode).weights) s += w;
  return s;
}

DecayFit surface_fourier_decay(SurfaceMode mode, std::span<const double> freqs, int directions, std::uint64_t seed) {
  if (directions < kMinDirections) {
    throw ArgumentError("surface_fourier_decay: at least " + std::to_string(kMinDirections) + " directions required");
  }
  if (freqs.empty()) throw FitError("surface_fourier_decay: no frequencies");
  for (double f : freqs) {
    if (!(f > 0.0)) throw ArgumentError("surface_fourier_decay: frequencies must be positive");
  }
  const auto [lo, hi] = std::minmax_element(freqs.begin(), freqs.end());
  if (std::log2(*hi / *lo) < 2.0) throw FitError("surface_fourier_decay: frequencies span fewer than 2 octaves");

  const auto& q = quadrature(mode);
  Rng rng = make_rng(seed, 0x5d);
  std::vector<double> best(freqs.size(), 0.0);
  std::vector<double> proj(kSurfaceNodes);
  std::vector<double> u(q.dim);
  for (int d = 0; d < directions; ++d) {
    if (q.dim == 2) {
      const double a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      u = {std::cos(a), std::sin(a)};
    } else {
      double norm = 0.0;
      do {
        norm = 0.0;
        for (auto& c : u) {
          c = standard_normal(rng);
          norm += c * c;
        }
      } while (norm == 0.0);
      for (auto& c : u) c /= std::sqrt(norm);
    }
    for (int m = 0; m < kSurfaceNodes; ++m) {
      double s = 0.0;
      for (int a = 0; a < q.dim; ++a) s += u[a] * q.points[static_cast<std::size_t>(m) * q.dim + a];
      proj[m] = s;
    }
    for (std::size_t k = 0; k < freqs.size(); ++k) best[k] = std::max(best[k], magnitude_along(q, proj, freqs[k]));
  }
  std::vector<double> logf;
  for (double f : freqs) logf.push_back(std::log2(f));
  auto fit = fit_log2(std::move(logf), std::move(best));
  return fit;
}

}  // namespace gmt::spectral
