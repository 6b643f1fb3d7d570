#pragma once

// Joint phase-space densities F(x, p), the tau-conservation (Liouville)
// residual, and the infinitesimal Wigner-Moyal transform
//
//   rho(x + dx/2, x - dx/2) = int F(x, p) exp(i p^b dx_b) d^4p
//
// with the optional electromagnetic phase factor built from two straight-line
// integrals of A^l du_l from the origin.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "relqm/em.hpp"
#include "relqm/errors.hpp"
#include "relqm/geometry.hpp"
#include "relqm/grid.hpp"
#include "relqm/numerics.hpp"

namespace relqm {

/// exp(i p^b dx_b) (default) or the half-phase exp(i p^b dx_b / 2) variant.
enum class KernelConvention { full_phase, half_phase };

inline double kernel_scale(KernelConvention k) { return k == KernelConvention::full_phase ? 1.0 : 0.5; }

/// One product-Gaussian term. A position sigma of zero leaves that component
/// unlocalized; a momentum sigma of zero is a sharp (delta) momentum.
struct GaussianComponent {
  double weight = 1.0;
  FourVector mean_x;
  FourVector mean_p;
  FourVector sigma_x;
  FourVector sigma_p;
};

/// Closed-form carrier: nonnegative mixture of product Gaussians.
class GaussianCarrier {
public:
  explicit GaussianCarrier(std::vector<GaussianComponent> components) : comps_(std::move(components)) {
    if (comps_.empty()) throw IntegrationError("Gaussian carrier has no components");
    for (const auto& c : comps_) {
      if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) throw DomainError("Gaussian weight must be >= 0");
      for (std::size_t mu = 0; mu < 4; ++mu) {
        if (!(c.sigma_x[mu] >= 0.0) || !(c.sigma_p[mu] >= 0.0)) throw DomainError("Gaussian sigma must be >= 0");
        if (!std::isfinite(c.mean_x[mu]) || !std::isfinite(c.mean_p[mu])) throw DomainError("Gaussian mean not finite");
      }
    }
  }

  const std::vector<GaussianComponent>& components() const { return comps_; }

  static double normal(double x, double mean, double sigma) {
    const double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  }

  /// Position marginal of one component: product over localized components.
  static double position_density(const GaussianComponent& c, const FourVector& x) {
    double v = 1.0;
    for (std::size_t mu = 0; mu < 4; ++mu) {
      if (c.sigma_x[mu] > 0.0) v *= normal(x[mu], c.mean_x[mu], c.sigma_x[mu]);
    }
    return v;
  }

  double marginal(const FourVector& x) const {
    double s = 0.0;
    for (const auto& c : comps_) s += c.weight * position_density(c, x);
    return s;
  }

  /// F(x, p) (momentum components with zero sigma are not evaluated).
  double value(const FourVector& x, const FourVector& p) const {
    double s = 0.0;
    for (const auto& c : comps_) {
      double v = c.weight * position_density(c, x);
      for (std::size_t mu = 0; mu < 4; ++mu) {
        if (c.sigma_p[mu] > 0.0) v *= normal(p[mu], c.mean_p[mu], c.sigma_p[mu]);
      }
      s += v;
    }
    return s;
  }

private:
  std::vector<GaussianComponent> comps_;
};

/// Real samples over (spacetime or spatial grid) x (p^1 axis). Mass-shell
/// reduction: p^0 = sqrt(p^2 + m^2) is implied, the momentum measure is dp^1.
class PhaseSpaceSamples {
public:
  PhaseSpaceSamples(Grid grid, Axis momentum, double mass, std::vector<double> values)
      : grid_(std::move(grid)), momentum_(momentum), mass_(mass), values_(std::move(values)) {
    if (momentum_.count < min_axis_points || !(momentum_.spacing > 0.0)) {
      throw DomainError("momentum axis needs >= 8 points and positive spacing");
    }
    if (values_.size() != grid_.size() * momentum_.count) throw DomainError("phase-space sample size mismatch");
  }

  template <class Fn>
  static PhaseSpaceSamples sample(const Grid& grid, const Axis& momentum, double mass, Fn&& fn) {
    std::vector<double> v(grid.size() * momentum.count);
    for (std::size_t it = 0; it < grid.nt(); ++it) {
      for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
        for (std::size_t ip = 0; ip < momentum.count; ++ip) {
          v[grid.index(it, ix) * momentum.count + ip] = fn(grid.t(it), grid.x(ix), momentum.coord(ip));
        }
      }
    }
    return PhaseSpaceSamples(grid, momentum, mass, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  const Axis& momentum() const { return momentum_; }
  double mass() const { return mass_; }
  double energy(std::size_t ip) const {
    const double p = momentum_.coord(ip);
    return std::sqrt(p * p + mass_ * mass_);
  }
  std::size_t np() const { return momentum_.count; }

  double operator()(std::size_t it, std::size_t ix, std::size_t ip) const {
    return values_[grid_.index(it, ix) * momentum_.count + ip];
  }
  double& operator()(std::size_t it, std::size_t ix, std::size_t ip) {
    return values_[grid_.index(it, ix) * momentum_.count + ip];
  }
  std::span<const double> momentum_line(std::size_t it, std::size_t ix) const {
    return std::span<const double>(values_).subspan(grid_.index(it, ix) * momentum_.count, momentum_.count);
  }
  std::span<const double> values() const { return values_; }

private:
  Grid grid_;
  Axis momentum_;
  double mass_;
  std::vector<double> values_;
};

/// Sampled carrier; enforces F >= 0 and finiteness.
class SampledDistribution : public PhaseSpaceSamples {
public:
  explicit SampledDistribution(PhaseSpaceSamples s) : PhaseSpaceSamples(std::move(s)) {
    for (double v : values()) {
      if (!std::isfinite(v) || v < 0.0) throw DomainError("phase-space density must be finite and >= 0");
    }
  }
};

using PhaseSpaceDistribution = std::variant<GaussianCarrier, SampledDistribution>;

/// Spatial force f^1(t, x). LinearForce derives from a quadratic potential and
/// is the only kind the closed-form carrier supports.
struct LinearForce {
  double constant = 0.0;
  double slope = 0.0;
  double operator()(double /*t*/, double x) const { return constant + slope * x; }
};
using Force = std::variant<LinearForce, RealField>;

inline double force_at(const Force& f, double t, double x) {
  if (const auto* lin = std::get_if<LinearForce>(&f)) return (*lin)(t, x);
  const auto v = numerics::interpolate(std::get<RealField>(f), t, x);
  if (!v) throw DomainError("force sampled outside its grid");
  return *v;
}

/// (p^a/m) dF/dx^a + f^a dF/dp^a on the mass-shell carrier, second-order
/// stencils on every axis (one-sided at edges).
inline PhaseSpaceSamples liouville_residual(const SampledDistribution& F, const Force& force, double mass) {
  const Grid& g = F.grid();
  const Axis& pax = F.momentum();
  if (g.nx() < 3 || pax.count < 3 || (g.has_time() && g.nt() < 3)) {
    throw DomainError("liouville_residual needs >= 3 points per axis");
  }
  std::vector<double> out(F.values().size(), 0.0);
  const std::size_t np = pax.count;
  // Same stencils as numerics::first_derivative, read through an accessor.
  auto d1 = [](auto&& at, std::size_t i, std::size_t n, double h) {
    if (i == 0) return (3.0 * (at(1) - at(0)) - (at(2) - at(1))) / (2.0 * h);
    if (i == n - 1) return (3.0 * (at(n - 1) - at(n - 2)) - (at(n - 2) - at(n - 3))) / (2.0 * h);
    return (at(i + 1) - at(i - 1)) / (2.0 * h);
  };
  for (std::size_t it = 0; it < g.nt(); ++it) {
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      const double fx = force_at(force, g.t(it), g.x(ix));
      for (std::size_t ip = 0; ip < np; ++ip) {
        const double p1 = pax.coord(ip);
        const double p0 = F.energy(ip);
        double r = (p1 / mass) * d1([&](std::size_t k) { return F(it, k, ip); }, ix, g.nx(), g.space().spacing);
        if (g.has_time()) {
          r += (p0 / mass) * d1([&](std::size_t k) { return F(k, ix, ip); }, it, g.nt(), g.time().spacing);
        }
        r += fx * d1([&](std::size_t k) { return F(it, ix, k); }, ip, np, pax.spacing);
        out[g.index(it, ix) * np + ip] = r;
      }
    }
  }
  return PhaseSpaceSamples(g, pax, F.mass(), std::move(out));
}

struct PhasePoint {
  FourVector x;
  FourVector p;
};

/// Closed-form residual on the Gaussian carrier at the given phase points.
inline std::vector<double> liouville_residual(const GaussianCarrier& F, const Force& force, double mass,
                                              std::span<const PhasePoint> points) {
  const auto* lin = std::get_if<LinearForce>(&force);
  if (!lin) throw UnsupportedCarrierError("closed-form carrier supports only linear (quadratic-potential) forces");
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& pt : points) {
    double r = 0.0;
    for (const auto& c : F.components()) {
      double base = c.weight * GaussianCarrier::position_density(c, pt.x);
      for (std::size_t mu = 0; mu < 4; ++mu) {
        if (c.sigma_p[mu] > 0.0) base *= GaussianCarrier::normal(pt.p[mu], c.mean_p[mu], c.sigma_p[mu]);
      }
      double dlog = 0.0;
      for (std::size_t mu = 0; mu < 4; ++mu) {
        if (c.sigma_x[mu] > 0.0) {
          const double s2 = c.sigma_x[mu] * c.sigma_x[mu];
          dlog += (pt.p[mu] / mass) * (-(pt.x[mu] - c.mean_x[mu]) / s2);
        }
      }
      if (c.sigma_p[1] > 0.0) {
        const double s2 = c.sigma_p[1] * c.sigma_p[1];
        dlog += (*lin)(pt.x[0], pt.x[1]) * (-(pt.p[1] - c.mean_p[1]) / s2);
      }
      r += base * dlog;
    }
    out.push_back(r);
  }
  return out;
}

struct GaugeOptions {
  bool enabled = false;
  double charge = 0.0;
  int panels = 1;  // composite panels of 32-node Gauss-Legendre
};

/// int_0^X A^l du_l along the straight segment u = s X, s in [0, 1].
inline double straight_line_potential_integral(const EMPotential& em, const FourVector& X, int panels = 1) {
  if (panels < 1) throw DomainError("gauge quadrature needs >= 1 panel");
  const bool has_t = em.grid().has_time();
  auto integrand = [&](double s) {
    const double t = has_t ? s * X[0] : 0.0;
    const auto v = em.at(t, s * X[1]);
    if (!v) throw DomainError("gauge path leaves the potential's grid");
    // A^l du_l = phi du^0 - A^1 du^1 (flat lowering).
    return v->first * X[0] - v->second * X[1];
  };
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = static_cast<double>(k) / panels;
    const double b = static_cast<double>(k + 1) / panels;
    sum += boost::math::quadrature::gauss<double, 32>::integrate(integrand, a, b);
  }
  return sum;
}

/// exp[i e (int_0^{x+dx/2} + int_0^{x-dx/2}) A^l du_l], unit modulus.
inline complex gauge_factor(const EMPotential& em, const FourVector& x, const FourVector& dx,
                            const GaugeOptions& opt) {
  if (!opt.enabled) return {1.0, 0.0};
  const FourVector y = x + 0.5 * dx;
  const FourVector yp = x - 0.5 * dx;
  const double phase =
      opt.charge * (straight_line_potential_integral(em, y, opt.panels) +
                    straight_line_potential_integral(em, yp, opt.panels));
  return std::polar(1.0, phase);
}

struct TransformOptions {
  KernelConvention kernel = KernelConvention::full_phase;
  GaugeOptions gauge;
  double tolerance = 1e-10;  // sampled-carrier quadrature error bound
};

namespace detail {

inline complex gaussian_transform(const GaussianCarrier& F, const FourVector& x, const FourVector& dx,
                                  double kscale) {
  complex sum{0.0, 0.0};
  for (const auto& c : F.components()) {
    const double pos = c.weight * GaussianCarrier::position_density(c, x);
    double phase = 0.0;
    double damp = 0.0;
    for (std::size_t mu = 0; mu < 4; ++mu) {
      const double d = kscale * minkowski_diag[mu] * dx[mu];
      phase += c.mean_p[mu] * d;
      damp += 0.5 * c.sigma_p[mu] * c.sigma_p[mu] * d * d;
    }
    sum += pos * std::exp(-damp) * std::polar(1.0, phase);
  }
  return sum;
}

inline GridPoint nearest_point(const Grid& g, const FourVector& x) {
  auto snap = [](const Axis& a, double c) -> std::size_t {
    const double s = (c - a.origin) / a.spacing;
    const double r = std::round(s);
    if (std::abs(s - r) > 1e-9 || r < 0 || r > static_cast<double>(a.count - 1)) {
      throw DomainError("sampled carrier evaluated off its grid nodes");
    }
    return static_cast<std::size_t>(r);
  };
  GridPoint p;
  p.ix = snap(g.space(), x[1]);
  if (g.has_time()) p.it = snap(g.time(), x[0]);
  return p;
}

inline complex sampled_transform(const SampledDistribution& F, const FourVector& x, const FourVector& dx,
                                 double kscale, double tolerance) {
  const GridPoint gp = nearest_point(F.grid(), x);
  const Axis& pax = F.momentum();
  const std::size_t np = pax.count;
  auto line = F.momentum_line(gp.it, gp.ix);
  double peak = 0.0;
  for (double v : line) peak = std::max(peak, v);
  if (peak > 0.0 && std::max(line.front(), line.back()) > 1e-10 * peak) {
    throw IntegrationError("phase-space density does not decay at the momentum-axis ends");
  }
  std::vector<complex> integrand(np);
  for (std::size_t ip = 0; ip < np; ++ip) {
    const double p1 = pax.coord(ip);
    const double p0 = F.energy(ip);
    const double phase = kscale * (p0 * dx[0] - p1 * dx[1]);
    integrand[ip] = line[ip] * std::polar(1.0, phase);
  }
  const complex fine = numerics::trapezoid<complex>(integrand, pax.spacing);
  // Coarse rule on every other node (the last interval is dropped when the count is even).
  std::vector<complex> coarse;
  const std::size_t last = (np % 2 == 1) ? np : np - 1;
  for (std::size_t ip = 0; ip < last; ip += 2) coarse.push_back(integrand[ip]);
  complex fine_sub = fine;
  if (last != np) {
    fine_sub = numerics::trapezoid<complex>(std::span<const complex>(integrand).first(last), pax.spacing);
  }
  const complex rough = numerics::trapezoid<complex>(coarse, 2.0 * pax.spacing);
  const double estimate = std::abs(fine_sub - rough) / 3.0;
  if (estimate > tolerance * std::max(1.0, std::abs(fine))) {
    throw AccuracyError("momentum quadrature error estimate " + std::to_string(estimate) + " above tolerance");
  }
  return fine;
}

}  // namespace detail

/// rho(x + dx/2, x - dx/2) for a phase-space density. Sampled carriers must be
/// evaluated at their grid nodes; dx components outside (t, x) are ignored there.
inline complex wigner_moyal_transform(const PhaseSpaceDistribution& F, const FourVector& x, const FourVector& dx,
                                      const EMPotential* em = nullptr, const TransformOptions& opt = {}) {
  const double kscale = kernel_scale(opt.kernel);
  complex value = std::visit(
      [&](const auto& carrier) -> complex {
        using C = std::decay_t<decltype(carrier)>;
        if constexpr (std::is_same_v<C, GaussianCarrier>) {
          return detail::gaussian_transform(carrier, x, dx, kscale);
        } else {
          return detail::sampled_transform(carrier, x, dx, kscale, opt.tolerance);
        }
      },
      F);
  if (opt.gauge.enabled) {
    if (!em) throw ConfigurationError("gauge factor requested without an electromagnetic potential");
    value *= gauge_factor(*em, x, dx, opt.gauge);
  }
  return value;
}

struct MeanMomentum {
  FourVector value;
  double max_imag = 0.0;  // largest discarded imaginary part
};

/// p^a = int -i d rho / d(dx_a) d^nx, the derivative taken at dx = 0 by a
/// centred difference with one Richardson level. `rho(t, x, dx)` supplies the
/// density; the integral runs over every active axis of `grid`.
template <class Density>
MeanMomentum mean_momentum_from_density(const Density& rho, const Grid& grid, double h_delta = 0.0) {
  if (h_delta <= 0.0) h_delta = grid.space().spacing / 16.0;
  MeanMomentum out;
  std::vector<std::size_t> comps{1};
  if (grid.has_time()) comps.insert(comps.begin(), 0);

  RealField norm(grid);
  for (std::size_t it = 0; it < grid.nt(); ++it) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      norm(it, ix) = std::abs(rho(grid.t(it), grid.x(ix), FourVector{}));
    }
  }
  const double scale = numerics::integrate(norm);

  for (std::size_t mu : comps) {
    ComplexField integrand(grid);
    for (std::size_t it = 0; it < grid.nt(); ++it) {
      for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
        const double t = grid.t(it);
        const double x = grid.x(ix);
        auto central = [&](double h) {
          FourVector e;
          e[mu] = h;
          return (rho(t, x, e) - rho(t, x, -1.0 * e)) / (2.0 * h);
        };
        const complex d = (4.0 * central(0.5 * h_delta) - central(h_delta)) / 3.0;
        // d/d(dx_mu) = g^{mu mu} d/d(dx^mu)
        integrand(it, ix) = complex(0.0, -1.0) * minkowski_diag[mu] * d;
      }
    }
    const complex p = numerics::integrate(integrand);
    out.value[mu] = p.real();
    out.max_imag = std::max(out.max_imag, std::abs(p.imag()));
    if (std::abs(p.imag()) > 1e-6 * (std::abs(p.real()) + scale)) {
      throw InconsistentDensityError("mean momentum has imaginary part " + std::to_string(p.imag()));
    }
  }
  return out;
}

/// Direct moment int p^a F d^4p d^nx over `grid` (independent of the transform).
inline FourVector direct_momentum_moment(const GaussianCarrier& F, const Grid& grid) {
  FourVector out;
  for (const auto& c : F.components()) {
    RealField marg(grid);
    for (std::size_t it = 0; it < grid.nt(); ++it) {
      for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
        FourVector x;
        x[0] = grid.t(it);
        x[1] = grid.x(ix);
        marg(it, ix) = c.weight * GaussianCarrier::position_density(c, x);
      }
    }
    const double mass = numerics::integrate(marg);
    for (std::size_t mu = 0; mu < 4; ++mu) out[mu] += c.mean_p[mu] * mass;
  }
  return out;
}

inline FourVector direct_momentum_moment(const SampledDistribution& F) {
  const Grid& g = F.grid();
  RealField e(g), p(g);
  std::vector<double> we(F.np()), wp(F.np());
  for (std::size_t it = 0; it < g.nt(); ++it) {
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      auto line = F.momentum_line(it, ix);
      for (std::size_t ip = 0; ip < F.np(); ++ip) {
        we[ip] = F.energy(ip) * line[ip];
        wp[ip] = F.momentum().coord(ip) * line[ip];
      }
      e(it, ix) = numerics::trapezoid<double>(we, F.momentum().spacing);
      p(it, ix) = numerics::trapezoid<double>(wp, F.momentum().spacing);
    }
  }
  FourVector out;
  out[0] = numerics::integrate(e);
  out[1] = numerics::integrate(p);
  return out;
}

}  // namespace relqm
