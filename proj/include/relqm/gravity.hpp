#pragma once

// Static, spherically symmetric coupling of a stationary scalar state to a
// weak-field metric. The state's quantum stress tensor rho' u_mu u_nu (plus
// optional external dust) sources the potential; the Klein-Gordon-type
// eigenproblem is then re-solved on the updated metric until both agree.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "relqm/errors.hpp"
#include "relqm/geometry.hpp"
#include "relqm/grid.hpp"
#include "relqm/madelung.hpp"

namespace relqm {

/// Diagonal-plus-(0,1) covariant stress tensor T_{mu nu} per grid point.
struct StressTensor {
  Grid grid;
  std::array<std::vector<double>, 4> diag;
  std::vector<double> t01;

  explicit StressTensor(const Grid& g) : grid(g), t01(g.size(), 0.0) {
    for (auto& d : diag) d.assign(g.size(), 0.0);
  }

  /// Pressureless dust at rest in flat coordinates: T_00 = rho.
  static StressTensor dust(const RealField& rho) {
    StressTensor t(rho.grid());
    for (std::size_t i = 0; i < rho.size(); ++i) t.diag[0][i] = rho[i];
    return t;
  }

  StressTensor& operator+=(const StressTensor& o) {
    if (!(grid == o.grid)) throw DomainError("stress tensors on different grids");
    for (std::size_t mu = 0; mu < 4; ++mu) {
      for (std::size_t i = 0; i < grid.size(); ++i) diag[mu][i] += o.diag[mu][i];
    }
    for (std::size_t i = 0; i < grid.size(); ++i) t01[i] += o.t01[i];
    return *this;
  }
};

/// T_{mu nu} = rho' u_mu u_nu with rho' = m R^2 and u_mu = -d_mu S / m.
struct QuantumStressTensor {
  RealField density;  // rho'
  RealField u0;       // u_0
  RealField u1;       // u_1

  const Grid& grid() const { return density.grid(); }

  double component(std::size_t mu, std::size_t nu, std::size_t index) const {
    auto u = [&](std::size_t a) { return a == 0 ? u0[index] : (a == 1 ? u1[index] : 0.0); };
    return density[index] * (u(mu) * u(nu));
  }

  StressTensor tensor() const {
    StressTensor t(grid());
    for (std::size_t i = 0; i < grid().size(); ++i) {
      for (std::size_t mu = 0; mu < 4; ++mu) t.diag[mu][i] = component(mu, mu, i);
      t.t01[i] = component(0, 1, i);
    }
    return t;
  }
};

inline QuantumStressTensor matter_tensor(const MadelungPair& mp, double mass) {
  const auto ds = detail::action_gradient(mp);
  const Grid& g = mp.grid();
  QuantumStressTensor q{RealField(g), RealField(g), RealField(g)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    q.density[i] = mass * mp.r[i] * mp.r[i];
    q.u0[i] = -ds[0][i] / mass;
    q.u1[i] = -ds[1][i] / mass;
  }
  return q;
}

struct GravityConfig {
  double newton_g = 0.0;
  double mass = 1.0;
  double boundary_radius = 10.0;
  std::size_t cells = 200;
  /// External potential V(r) and dust density rho_M(r); empty means zero.
  std::function<double(double)> potential;
  std::function<double(double)> dust_density;
  std::size_t max_iterations = 50;
  double tolerance = 1e-11;
  double relaxation = 0.5;
  /// The source must fall below this fraction of its peak at the outer cell.
  double boundary_tolerance = 1e-3;
};

namespace detail {

inline void require_radial(const Grid& g, const char* who) {
  if (!g.is_radial() || g.has_time()) throw DomainError(std::string(who) + ": needs a static radial grid");
}

}  // namespace detail

/// Weak-field potential Phi for the source T^00 + sum_i T^ii, normalised so
/// that nabla^2 Phi = 4 pi G rho_eff. The source is piecewise constant per
/// cell and integrated exactly by shells; Phi(R_b) = -G M / R_b.
inline RealField solve_potential_weak_field(const StressTensor& t, double newton_g,
                                            double boundary_tolerance = 1e-3) {
  const Grid& g = t.grid;
  detail::require_radial(g, "solve_metric_weak_field");
  const std::size_t n = g.nx();
  std::vector<double> rho(n);
  double peak = 0.0, tmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Flat raising: T^00 = T_00, T^ii = T_ii.
    rho[i] = t.diag[0][i] + t.diag[1][i] + t.diag[2][i] + t.diag[3][i];
    if (!std::isfinite(rho[i])) throw DomainError("non-finite stress tensor");
    peak = std::max(peak, std::abs(rho[i]));
    tmax = std::max({tmax, std::abs(t.diag[0][i]), std::abs(t.diag[1][i])});
  }
  for (double v : t.t01) {
    if (std::abs(v) > 1e-12 * std::max(tmax, 1e-300)) throw ConfigurationError("source is not static: T_0r is non-zero");
  }
  if (peak > 0.0 && std::abs(rho[n - 1]) > boundary_tolerance * peak) {
    throw BoundaryConditionError("source does not decay before the outer boundary");
  }
  const double h = g.space().spacing;
  const double pi = std::numbers::pi;
  auto face = [&](std::size_t i) { return static_cast<double>(i) * h; };

  // Enclosed mass up to each cell's lower face.
  std::vector<double> below(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = face(i), b = face(i + 1);
    below[i + 1] = below[i] + 4.0 * pi / 3.0 * rho[i] * (b * b * b - a * a * a);
  }
  // int_{b_i}^{R_b} 4 pi r rho dr, accumulated from the outside in.
  std::vector<double> above(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    const double a = face(k), b = face(k + 1);
    above[k] = above[k + 1] + 2.0 * pi * rho[k] * (b * b - a * a);
  }
  RealField phi(g);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = g.x(i), a = face(i), b = face(i + 1);
    const double m_r = below[i] + 4.0 * pi / 3.0 * rho[i] * (r * r * r - a * a * a);
    const double outer = 2.0 * pi * rho[i] * (b * b - r * r) + above[i + 1];
    phi[i] = -newton_g * (m_r / r + outer);
  }
  return phi;
}

inline MetricField solve_metric_weak_field(const StressTensor& t, double newton_g,
                                           double boundary_tolerance = 1e-3) {
  return MetricField::weak_field(solve_potential_weak_field(t, newton_g, boundary_tolerance));
}

struct CovariantState {
  double energy = 0.0;
  MadelungPair state;
  double residual = 0.0;  // max |(L + m^2 - 2 m V) R - E^2 R / g_00| over cells
};

struct CovariantSolveResult {
  std::optional<CovariantState> ground;
  std::string diagnostic;
};

namespace detail {

/// A = W (L + m^2 - 2 m V) and B = W / g_00 with W = r^2 sqrt|g|, L the
/// radial flux-form Laplacian on the metric and R = 0 at the outer face
/// (ghost cell R_n = -R_{n-1}).
struct RadialOperator {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  std::vector<double> w;
};

inline RadialOperator radial_operator(const MetricField& g, const RealField& v, double mass) {
  const Grid& grid = g.grid();
  require_radial(grid, "covariant_stationary_solve");
  if (!(v.grid() == grid)) throw DomainError("potential and metric grids differ");
  const std::size_t n = grid.nx();
  const double h = grid.space().spacing;
  std::vector<double> c(n);
  RadialOperator op{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
                    Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
                    std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.x(i);
    op.w[i] = r * r * g.sqrt_abs_det(i);
    c[i] = g.sqrt_abs_det(i) * std::abs(g.inverse(1, i));
  }
  auto face_weight = [&](std::size_t i) {  // face between cell i and i+1
    const double rf = static_cast<double>(i + 1) * h;
    const double ci = i + 1 < n ? 0.5 * (c[i] + c[i + 1]) : c[i];
    return rf * rf * ci / (h * h);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    op.a(ii, ii) += op.w[i] * (mass * mass - 2.0 * mass * v[i]);
    op.b(ii, ii) = op.w[i] / g.g(0, i);
    const double fp = face_weight(i);
    if (i + 1 < n) {
      op.a(ii, ii) += fp;
      op.a(ii + 1, ii + 1) += fp;
      op.a(ii, ii + 1) -= fp;
      op.a(ii + 1, ii) -= fp;
    } else {
      op.a(ii, ii) += 2.0 * fp;
    }
  }
  return op;
}

}  // namespace detail

/// Pointwise (L + m^2 - 2 m V) R - E^2 R / g_00 for a trial radial profile.
inline RealField covariant_residual(const MetricField& g, const RealField& v, double mass, const RealField& r,
                                    double energy) {
  const detail::RadialOperator op = detail::radial_operator(g, v, mass);
  const Eigen::Map<const Eigen::VectorXd> rv(r.values().data(), static_cast<Eigen::Index>(r.size()));
  const Eigen::VectorXd res = op.a * rv - energy * energy * (op.b * rv);
  RealField out(g.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = res(static_cast<Eigen::Index>(i)) / op.w[i];
  return out;
}

/// Ground state of E^2 R / g_00 = [L + m^2 - 2 m V] R, solved as the symmetric
/// generalised problem A R = E^2 B R. Normalised to
/// 4 pi (E/m) int R^2 g^00 sqrt|g| r^2 dr = 1.
inline CovariantSolveResult covariant_stationary_solve(const MetricField& g, const RealField& v, double mass) {
  const Grid& grid = g.grid();
  const detail::RadialOperator op = detail::radial_operator(g, v, mass);
  const std::size_t n = grid.nx();
  const double h = grid.space().spacing;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(op.a, op.b);
  CovariantSolveResult out;
  if (es.info() != Eigen::Success) {
    out.diagnostic = "generalised eigensolver failed";
    return out;
  }
  const double lambda = es.eigenvalues()(0);
  if (!(lambda > 0.0)) {
    std::ostringstream os;
    os << "no bound state: lowest eigenvalue E^2 = " << lambda;
    out.diagnostic = os.str();
    return out;
  }
  const double e = std::sqrt(lambda);
  Eigen::VectorXd r = es.eigenvectors().col(0);
  if (r.sum() < 0.0) r = -r;
  const double norm = 4.0 * std::numbers::pi * (e / mass) * h * r.dot(op.b * r);
  r /= std::sqrt(norm);
  const Eigen::VectorXd res = op.a * r - lambda * (op.b * r);

  CovariantState st{e, MadelungPair{RealField(grid), RealField(grid), std::vector<bool>(n, false), e}, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    st.state.r[i] = r(static_cast<Eigen::Index>(i));
    st.residual = std::max(st.residual, std::abs(res(static_cast<Eigen::Index>(i))) / op.w[i]);
  }
  out.ground = std::move(st);
  return out;
}

struct IterationRecord {
  std::size_t iteration = 0;
  double energy = 0.0;
  double potential_change = 0.0;  // max |Phi_{k} - Phi_{k-1}|
  double state_residual = 0.0;
  double field_residual = 0.0;    // max |Phi - Phi[T(state)]|
};

struct CoupledResult {
  MetricField metric;
  RealField phi;
  MadelungPair state;
  double energy = 0.0;
  std::vector<IterationRecord> trace;
  bool converged = false;
};

/// Picard iteration Phi <- (1 - w) Phi + w Phi[T(state(Phi))] starting from
/// flat space. Three consecutive growths of the potential change raise
/// NonconvergenceError carrying the history; running out of iterations
/// returns the last iterate with converged = false.
inline CoupledResult coupled_solve(const GravityConfig& cfg) {
  if (!(cfg.relaxation > 0.0 && cfg.relaxation <= 1.0)) throw ConfigurationError("relaxation must lie in (0, 1]");
  if (cfg.max_iterations == 0) throw ConfigurationError("max_iterations must be positive");
  if (!(cfg.newton_g >= 0.0)) throw ConfigurationError("newton_g must be >= 0");
  if (!(cfg.tolerance > 0.0)) throw ConfigurationError("tolerance must be > 0");
  if (!(cfg.mass > 0.0) || !(cfg.boundary_radius > 0.0) || cfg.cells < 8) {
    throw ConfigurationError("mass and boundary_radius must be > 0 and cells >= 8");
  }
  const Grid grid = Grid::radial(cfg.boundary_radius / static_cast<double>(cfg.cells), cfg.cells);
  const RealField v = RealField::sample(grid, [&](double, double r) { return cfg.potential ? cfg.potential(r) : 0.0; });
  const RealField dust = RealField::sample(grid, [&](double, double r) { return cfg.dust_density ? cfg.dust_density(r) : 0.0; });

  std::vector<double> history;
  auto solve_on = [&](const MetricField& g) {
    CovariantSolveResult s = covariant_stationary_solve(g, v, cfg.mass);
    if (!s.ground) throw NonconvergenceError("coupled solve lost the bound state: " + s.diagnostic, history);
    return std::move(*s.ground);
  };
  auto source_potential = [&](const MadelungPair& st) {
    StressTensor t = matter_tensor(st, cfg.mass).tensor();
    t += StressTensor::dust(dust);
    return solve_potential_weak_field(t, cfg.newton_g, cfg.boundary_tolerance);
  };

  RealField phi(grid);
  MetricField g = MetricField::flat(grid);
  CovariantState st = solve_on(g);
  std::vector<IterationRecord> trace;
  int growth = 0;
  for (std::size_t k = 1; k <= cfg.max_iterations; ++k) {
    const RealField target = source_potential(st.state);
    double change = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double next = (1.0 - cfg.relaxation) * phi[i] + cfg.relaxation * target[i];
      change = std::max(change, std::abs(next - phi[i]));
      phi[i] = next;
    }
    history.push_back(change);
    try {
      g = MetricField::weak_field(phi);
    } catch (const DomainError& e) {
      throw NonconvergenceError(std::string("coupled solve left the weak-field regime: ") + e.what(), history);
    }
    st = solve_on(g);
    const RealField check = source_potential(st.state);
    double field_res = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) field_res = std::max(field_res, std::abs(check[i] - phi[i]));
    trace.push_back({k, st.energy, change, st.residual, field_res});
    if (trace.size() > 1 && change > trace[trace.size() - 2].potential_change) {
      if (++growth >= 3) throw NonconvergenceError("coupled solve diverging", history);
    } else {
      growth = 0;
    }
    if (change <= cfg.tolerance && field_res <= cfg.tolerance / cfg.relaxation) {
      return {g, phi, st.state, st.energy, trace, true};
    }
  }
  return {g, phi, st.state, st.energy, trace, false};
}

}  // namespace relqm
