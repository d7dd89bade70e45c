#include "gmt/phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gmt/errors.hpp"
#include "gmt/random.hpp"

namespace gmt::phase {

namespace {

void check_dims(const PhaseSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (static_cast<int>(x.size()) != spec.dim() || static_cast<int>(y.size()) != spec.dim()) {
    throw ArgumentError("phase: point dimension does not match spec.dim = " + std::to_string(spec.dim()));
  }
}

PhaseDerivatives analytic_derivatives(const PhaseSpec& spec, std::span<const double> x,
                                      std::span<const double> y) {
  const int d = spec.dim();
  PhaseDerivatives r{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  switch (spec.kind()) {
    case PhaseKind::dot_product:
      for (int i = 0; i < d; ++i) {
        r.grad_x(i) = y[i];
        r.grad_y(i) = x[i];
      }
      r.mixed.setIdentity();
      break;
    case PhaseKind::unit_distance: {
      Eigen::VectorXd u(d);
      for (int i = 0; i < d; ++i) u(i) = x[i] - y[i];
      const double dist = u.norm();
      if (dist == 0.0) throw SingularityError("unit-distance: derivatives undefined at x == y");
      u /= dist;
      r.grad_x = u;
      r.grad_y = -u;
      r.mixed = (u * u.transpose() - Eigen::MatrixXd::Identity(d, d)) / dist;
      break;
    }
    case PhaseKind::translated_paraboloid:
      for (int i = 0; i + 1 < d; ++i) {
        r.grad_x(i) = 2.0 * (y[i] - x[i]);
        r.grad_y(i) = -2.0 * (y[i] - x[i]);
        r.mixed(i, i) = 2.0;
      }
      r.grad_x(d - 1) = -1.0;
      r.grad_y(d - 1) = 1.0;
      break;
    case PhaseKind::diffeo_distance: {
      const double kappa = spec.kappa();
      const std::vector<double> phi = diffeo_map(spec, y);
      Eigen::VectorXd u(d);
      for (int i = 0; i < d; ++i) u(i) = phi[i] - x[i];
      const double dist = u.norm();
      if (dist == 0.0) throw SingularityError("diffeo-distance: derivatives undefined at Phi(y) == x");
      u /= dist;
      Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(d, d);
      for (int i = 0; i < d; ++i) {
        const int k = (i + 1) % d;
        jac(i, k) += kappa * std::cos(y[k]);
      }
      r.grad_x = -u;
      r.grad_y = jac.transpose() * u;
      r.mixed = -(Eigen::MatrixXd::Identity(d, d) - u * u.transpose()) * jac / dist;
      break;
    }
    case PhaseKind::bourgain_curve: {
      const double t = spec.bourgain_t();
      r.grad_x << y[0], y[1];
      r.grad_y << x[0] + t * y[1] + t * t * y[0], x[1] + t * y[0];
      r.mixed.setIdentity();
      break;
    }
    case PhaseKind::max_norm:
      throw UnsupportedOperation("max-norm phase is not differentiable");
  }
  return r;
}

PhaseDerivatives finite_difference_derivatives(const PhaseSpec& spec, std::span<const double> x,
                                               std::span<const double> y) {
  const int d = spec.dim();
  const double h = kFiniteDifferenceStep;
  PhaseDerivatives r{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  std::vector<double> xp(x.begin(), x.end()), yp(y.begin(), y.end());
  for (int i = 0; i < d; ++i) {
    xp[i] = x[i] + h;
    const double fp = eval_phase(spec, xp, y);
    xp[i] = x[i] - h;
    const double fm = eval_phase(spec, xp, y);
    xp[i] = x[i];
    r.grad_x(i) = (fp - fm) / (2 * h);

    yp[i] = y[i] + h;
    const double gp = eval_phase(spec, x, yp);
    yp[i] = y[i] - h;
    const double gm = eval_phase(spec, x, yp);
    yp[i] = y[i];
    r.grad_y(i) = (gp - gm) / (2 * h);
  }
  const double h2 = kMixedDifferenceStep;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int sx : {1, -1}) {
        for (int sy : {1, -1}) {
          xp[i] = x[i] + sx * h2;
          yp[j] = y[j] + sy * h2;
          acc += sx * sy * eval_phase(spec, xp, yp);
        }
      }
      xp[i] = x[i];
      yp[j] = y[j];
      r.mixed(i, j) = acc / (4 * h2 * h2);
    }
  }
  return r;
}

// Unit vectors for ray casting: equi-angular with a seeded phase in 2-D,
// normalised Gaussians otherwise.
std::vector<std::vector<double>> ray_directions(int dim, int count, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x9e11);
  std::vector<std::vector<double>> dirs;
  dirs.reserve(count);
  if (dim == 2) {
    const double phase0 = 2.0 * std::numbers::pi * uniform01(rng);
    for (int k = 0; k < count; ++k) {
      const double a = phase0 + 2.0 * std::numbers::pi * k / count;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
    return dirs;
  }
  for (int k = 0; k < count; ++k) {
    std::vector<double> v(dim);
    double n2 = 0.0;
    while (n2 < 1e-12) {
      for (auto& c : v) c = standard_normal(rng);
      n2 = dot(v, v);
    }
    for (auto& c : v) c /= std::sqrt(n2);
    dirs.push_back(std::move(v));
  }
  return dirs;
}

// Largest s with x + s u inside the box (x assumed inside).
double exit_distance(std::span<const double> x, std::span<const double> u, const Box& box) {
  double s = std::numeric_limits<double>::infinity();
  for (int i = 0; i < box.dim(); ++i) {
    if (u[i] > 0) s = std::min(s, (box.hi[i] - x[i]) / u[i]);
    if (u[i] < 0) s = std::min(s, (box.lo[i] - x[i]) / u[i]);
  }
  return std::max(s, 0.0);
}

constexpr double kLevelTolerance = 1e-10;

bool on_level(const PhaseSpec& spec, std::span<const double> x, std::span<const double> y, double t) {
  return std::abs(eval_phase(spec, x, y) - t) <= kLevelTolerance;
}

std::vector<std::vector<double>> level_points_by_rays(const PhaseSpec& spec, std::span<const double> x, double t,
                                                      int count, std::uint64_t seed, const Box& box) {
  constexpr int kScanSteps = 512;
  std::vector<std::vector<double>> out;
  std::vector<double> y(spec.dim());
  for (const auto& u : ray_directions(spec.dim(), count, seed)) {
    const double smax = exit_distance(x, u, box);
    if (smax <= 0.0) continue;
    auto f = [&](double s) {
      for (int i = 0; i < spec.dim(); ++i) y[i] = x[i] + s * u[i];
      return eval_phase(spec, x, y) - t;
    };
    double a = 0.0, fa = f(0.0);
    bool bracketed = false;
    double b = 0.0, fb = fa;
    for (int k = 1; k <= kScanSteps; ++k) {
      b = smax * k / kScanSteps;
      fb = f(b);
      if (fa == 0.0 || (fa < 0) != (fb < 0)) {
        bracketed = true;
        break;
      }
      a = b;
      fa = fb;
    }
    if (!bracketed) continue;
    if (fa != 0.0) {
      for (int it = 0; it < 200 && std::abs(fa) > 1e-13; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm < 0) == (fa < 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
          fb = fm;
        }
        if (b - a < 1e-16) break;
      }
    }
    const double s = std::abs(fa) <= std::abs(fb) ? a : b;
    f(s);
    if (on_level(spec, x, y, t) && box.contains(y)) out.push_back(y);
  }
  return out;
}

}  // namespace

std::string_view to_string(PhaseKind kind) {
  switch (kind) {
    case PhaseKind::unit_distance: return "unit-distance";
    case PhaseKind::dot_product: return "dot-product";
    case PhaseKind::translated_paraboloid: return "translated-paraboloid";
    case PhaseKind::diffeo_distance: return "diffeo-distance";
    case PhaseKind::max_norm: return "max-norm";
    case PhaseKind::bourgain_curve: return "bourgain-curve";
  }
  return "unknown";
}

PhaseKind parse_phase_kind(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '_', '-');
  for (auto k : {PhaseKind::unit_distance, PhaseKind::dot_product, PhaseKind::translated_paraboloid,
                 PhaseKind::diffeo_distance, PhaseKind::max_norm, PhaseKind::bourgain_curve}) {
    if (to_string(k) == s) return k;
  }
  throw ArgumentError("unknown phase kind '" + std::string(name) + "'");
}

PhaseSpec::PhaseSpec(PhaseKind kind, int dim, std::map<std::string, double> params)
    : kind_(kind), dim_(dim), params_(std::move(params)) {
  if (dim_ < 2) throw ArgumentError("phase: dim must be >= 2");
  for (const auto& [key, value] : params_) {
    const bool ok = (kind_ == PhaseKind::diffeo_distance && key == "kappa") ||
                    (kind_ == PhaseKind::bourgain_curve && key == "t");
    if (!ok) throw ArgumentError("phase " + std::string(to_string(kind_)) + ": unknown param '" + key + "'");
    if (!std::isfinite(value)) throw ArgumentError("phase: param '" + key + "' is not finite");
  }
  if (kind_ == PhaseKind::diffeo_distance && std::abs(kappa()) >= 1.0) {
    throw ArgumentError("diffeo-distance: |kappa| must be < 1");
  }
  if (kind_ == PhaseKind::bourgain_curve && dim_ != 2) throw ArgumentError("bourgain-curve: dim must be 2");
}

PhaseSpec PhaseSpec::from_config(std::string_view kind, int dim, const std::map<std::string, double>& params) {
  return PhaseSpec(parse_phase_kind(kind), dim, params);
}

double PhaseSpec::kappa() const {
  auto it = params_.find("kappa");
  return it == params_.end() ? kDefaultKappa : it->second;
}

double PhaseSpec::bourgain_t() const {
  auto it = params_.find("t");
  return it == params_.end() ? 0.0 : it->second;
}

std::vector<double> diffeo_map(const PhaseSpec& spec, std::span<const double> y) {
  const int d = static_cast<int>(y.size());
  const double kappa = spec.kappa();
  std::vector<double> out(d);
  for (int i = 0; i < d; ++i) out[i] = y[i] + kappa * std::sin(y[(i + 1) % d]);
  return out;
}

double min_diffeo_jacobian(const PhaseSpec& spec, const Box& box, int samples, std::uint64_t seed) {
  if (spec.kind() != PhaseKind::diffeo_distance) throw ArgumentError("min_diffeo_jacobian: not a diffeo phase");
  if (box.dim() != spec.dim()) throw ArgumentError("min_diffeo_jacobian: box dimension mismatch");
  const int d = spec.dim();
  Rng rng = make_rng(seed, 0xd1ff);
  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd jac(d, d);
  for (int s = 0; s < samples; ++s) {
    jac.setIdentity();
    for (int i = 0; i < d; ++i) {
      const int k = (i + 1) % d;
      jac(i, k) += spec.kappa() * std::cos(uniform(rng, box.lo[k], box.hi[k]));
    }
    best = std::min(best, std::abs(jac.determinant()));
  }
  return best;
}

double eval_phase(const PhaseSpec& spec, std::span<const double> x, std::span<const double> y) {
  check_dims(spec, x, y);
  const int d = spec.dim();
  switch (spec.kind()) {
    case PhaseKind::unit_distance:
      return distance(x, y);
    case PhaseKind::dot_product:
      return dot(x, y);
    case PhaseKind::translated_paraboloid: {
      double s = 0.0;
      for (int i = 0; i + 1 < d; ++i) s += (y[i] - x[i]) * (y[i] - x[i]);
      return y[d - 1] - x[d - 1] - s;
    }
    case PhaseKind::diffeo_distance: {
      const double kappa = spec.kappa();
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        const double c = y[i] + kappa * std::sin(y[(i + 1) % d]) - x[i];
        s += c * c;
      }
      return std::sqrt(s);
    }
    case PhaseKind::max_norm: {
      double m = 0.0;
      for (int i = 0; i < d; ++i) m = std::max(m, std::abs(y[i] - x[i]));
      return m;
    }
    case PhaseKind::bourgain_curve: {
      const double t = spec.bourgain_t();
      return x[0] * y[0] + x[1] * y[1] + t * y[0] * y[1] + 0.5 * t * t * y[0] * y[0];
    }
  }
  return 0.0;
}

PhaseDerivatives gradients(const PhaseSpec& spec, std::span<const double> x, std::span<const double> y,
                           DerivativeMethod method) {
  check_dims(spec, x, y);
  if (!spec.is_smooth()) throw UnsupportedOperation("max-norm phase is not differentiable");
  if (method == DerivativeMethod::analytic) return analytic_derivatives(spec, x, y);
  // Same singular set as the analytic path.
  if (spec.kind() == PhaseKind::unit_distance && distance(x, y) == 0.0) {
    throw SingularityError("unit-distance: derivatives undefined at x == y");
  }
  if (spec.kind() == PhaseKind::diffeo_distance && distance(diffeo_map(spec, y), x) == 0.0) {
    throw SingularityError("diffeo-distance: derivatives undefined at Phi(y) == x");
  }
  return finite_difference_derivatives(spec, x, y);
}

double bordered_determinant(const PhaseDerivatives& d) {
  const auto n = d.grad_x.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
  m.block(0, 1, 1, n) = d.grad_x.transpose();
  m.block(1, 0, n, 1) = -d.grad_y;
  m.block(1, 1, n, n) = d.mixed;
  return m.partialPivLu().determinant();
}

double rotational_curvature(const PhaseSpec& spec, std::span<const double> x, std::span<const double> y,
                            DerivativeMethod method) {
  return bordered_determinant(gradients(spec, x, y, method));
}

CurvatureSample curvature_sample(const PhaseSpec& spec, std::span<const double> x, std::span<const double> y) {
  const PhaseDerivatives d = gradients(spec, x, y);
  CurvatureSample s;
  s.x.assign(x.begin(), x.end());
  s.y.assign(y.begin(), y.end());
  s.det_value = bordered_determinant(d);
  s.grad_norms = {d.grad_x.norm(), d.grad_y.norm()};
  return s;
}

std::vector<std::vector<double>> level_points(const PhaseSpec& spec, std::span<const double> x, double t,
                                              int count, std::uint64_t seed, const Box& box) {
  if (count < 1) throw ArgumentError("level_points: count must be >= 1");
  if (static_cast<int>(x.size()) != spec.dim() || box.dim() != spec.dim()) {
    throw ArgumentError("level_points: dimension mismatch");
  }
  const int d = spec.dim();
  std::vector<std::vector<double>> out;
  auto keep = [&](std::vector<double> y) {
    if (box.contains(y) && on_level(spec, x, y, t)) out.push_back(std::move(y));
  };
  Rng rng = make_rng(seed, 0x1e7e1);

  switch (spec.kind()) {
    case PhaseKind::unit_distance:
      if (t < 0) break;
      for (const auto& u : ray_directions(d, count, seed)) {
        std::vector<double> y(d);
        for (int i = 0; i < d; ++i) y[i] = x[i] + t * u[i];
        keep(std::move(y));
      }
      break;
    case PhaseKind::dot_product: {
      const double xx = dot(x, x);
      if (xx == 0.0) break;
      double diag = 0.0;
      for (int i = 0; i < d; ++i) diag += box.extent(i) * box.extent(i);
      diag = std::sqrt(diag);
      for (int k = 0; k < count; ++k) {
        // Foot of the hyperplane plus a random tangent offset; a few retries to land in the box.
        for (int attempt = 0; attempt < 64; ++attempt) {
          std::vector<double> v(d);
          for (auto& c : v) c = standard_normal(rng);
          const double proj = dot(v, x) / xx;
          for (int i = 0; i < d; ++i) v[i] -= proj * x[i];
          const double vn = std::sqrt(dot(v, v));
          if (vn == 0.0) continue;
          const double radius = uniform(rng, 0.0, diag);
          std::vector<double> y(d);
          for (int i = 0; i < d; ++i) y[i] = t * x[i] / xx + radius * v[i] / vn;
          if (box.contains(y)) {
            keep(std::move(y));
            break;
          }
        }
      }
      break;
    }
    case PhaseKind::translated_paraboloid: {
      const double room = box.hi[d - 1] - x[d - 1] - t;
      if (room < 0) break;
      const double rmax = std::sqrt(room);
      for (int k = 0; k < count; ++k) {
        std::vector<double> v(d - 1);
        double vn2 = 0.0;
        while (vn2 < 1e-24) {
          for (auto& c : v) c = standard_normal(rng);
          vn2 = dot(v, v);
        }
        const double radius = rmax * uniform01(rng);
        std::vector<double> y(d);
        double r2 = 0.0;
        for (int i = 0; i + 1 < d; ++i) {
          const double off = radius * v[i] / std::sqrt(vn2);
          y[i] = x[i] + off;
          r2 += off * off;
        }
        y[d - 1] = x[d - 1] + t + r2;
        keep(std::move(y));
      }
      break;
    }
    case PhaseKind::max_norm:
      if (t < 0) break;
      for (int k = 0; k < count; ++k) {
        std::vector<double> y(d);
        const int face = static_cast<int>(rng() % static_cast<std::uint64_t>(d));
        const double side = (rng() & 1U) ? 1.0 : -1.0;
        for (int i = 0; i < d; ++i) y[i] = x[i] + t * (i == face ? side : uniform(rng, -1.0, 1.0));
        keep(std::move(y));
      }
      break;
    case PhaseKind::diffeo_distance:
    case PhaseKind::bourgain_curve:
      out = level_points_by_rays(spec, x, t, count, seed, box);
      break;
  }
  if (out.empty()) {
    throw EmptyLevelError("level_points: no point of {phi = " + std::to_string(t) + "} found in the box");
  }
  return out;
}

std::array<double, 3> bourgain_characteristic(double w1, double w2, double y1, double y2, double t) {
  return {w1 - t * y2 - t * t * y1, w2 - t * y1, t};
}

std::array<double, 3> bourgain_compressed_point(double y1, double y2, double t) {
  return bourgain_characteristic(0.0, -y2, y1, y2, t);
}

}  // namespace gmt::phase
