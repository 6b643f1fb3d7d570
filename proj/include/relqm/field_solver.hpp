#pragma once

// Second-order amplitude equation in flat 1+1 spacetime,
//
//   { (1/2m) [i d_a + e A_a]^2 + V + pi.E + mu.B - m/2 } Psi = 0,
//
// expanded once as
//
//   Psi_tt - 2 i e phi Psi_t = D^2 Psi
//                             + [ i e d_t phi + e^2 phi^2 + 2m (V + M) - m^2 ] Psi,
//
// where D = d_x + i e A^1 is discretized with link phases exp(i e A h) on the
// half-cell midpoints and M = pi^1 E^1 is the moment scalar (mu.B = 0 in 1+1).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relqm/em.hpp"
#include "relqm/errors.hpp"
#include "relqm/geometry.hpp"
#include "relqm/grid.hpp"
#include "relqm/numerics.hpp"

namespace relqm {

enum class Boundary { periodic, dirichlet };

struct EMFields {
  std::array<RealField, 3> e;
  std::array<RealField, 3> b;
};

/// E = -grad phi - dA/dt, B = curl A by centred differences. In 1+1 only E^1
/// survives and B is zero.
inline EMFields em_fields_from_potential(const EMPotential& em) {
  em.validate();
  const Grid& g = em.grid();
  EMFields out{{RealField(g), RealField(g), RealField(g)}, {RealField(g), RealField(g), RealField(g)}};
  const RealField dphi = numerics::partial(em.phi, AxisKind::x);
  for (std::size_t i = 0; i < g.size(); ++i) out.e[0][i] = -dphi[i];
  if (g.has_time()) {
    const RealField da = numerics::partial(em.a1, AxisKind::t);
    for (std::size_t i = 0; i < g.size(); ++i) out.e[0][i] -= da[i];
  }
  return out;
}

/// External fields felt by the amplitude.
struct PotentialConfig {
  RealField v;
  EMPotential em;
  std::array<double, 3> electric_moment{0.0, 0.0, 0.0};
  std::array<double, 3> magnetic_moment{0.0, 0.0, 0.0};

  static PotentialConfig free(const Grid& grid) { return {RealField(grid), EMPotential::zero(grid), {}, {}}; }
  static PotentialConfig scalar(RealField v) {
    const Grid g = v.grid();
    return {std::move(v), EMPotential::zero(g), {}, {}};
  }

  const Grid& grid() const { return v.grid(); }
  bool is_static() const { return !grid().has_time(); }

  void validate() const {
    if (!(v.grid() == em.grid())) throw ConfigurationError("potential fields on different grids");
    em.validate();
    for (double x : v.values()) {
      if (!std::isfinite(x)) throw ConfigurationError("non-finite scalar potential");
    }
    for (std::size_t k = 0; k < 3; ++k) {
      if (!std::isfinite(electric_moment[k]) || !std::isfinite(magnetic_moment[k])) {
        throw ConfigurationError("non-finite moment");
      }
    }
  }

  /// V + pi.E + mu.B on the potential's grid.
  RealField scalar_total() const {
    const EMFields f = em_fields_from_potential(em);
    RealField w(grid());
    for (std::size_t i = 0; i < w.size(); ++i) {
      double m = 0.0;
      for (std::size_t k = 0; k < 3; ++k) m += electric_moment[k] * f.e[k][i] + magnetic_moment[k] * f.b[k][i];
      w[i] = v[i] + m;
    }
    return w;
  }
};

namespace detail {

/// Potential rows seen by the time stepper at step n.
struct PotentialRows {
  std::vector<double> w, phi, a, dphi_dt;
};

inline PotentialRows potential_row(const PotentialConfig& pot, const RealField& w_total, std::size_t n) {
  const Grid& g = pot.grid();
  const std::size_t row = g.has_time() ? n : 0;
  auto copy = [&](const RealField& f) {
    auto r = f.row(row);
    return std::vector<double>(r.begin(), r.end());
  };
  PotentialRows out{copy(w_total), copy(pot.em.phi), copy(pot.em.a1), std::vector<double>(g.nx(), 0.0)};
  if (g.has_time()) {
    const double h = g.time().spacing;
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      std::vector<double> col(g.nt());
      for (std::size_t it = 0; it < g.nt(); ++it) col[it] = pot.em.phi(it, ix);
      out.dphi_dt[ix] = numerics::first_derivative<double>(col, row, h);
    }
  }
  return out;
}

/// Link-covariant Laplacian D^2 psi at node j.
inline complex covariant_laplacian(std::span<const complex> psi, std::span<const double> a, double charge, double h,
                                   std::size_t j, Boundary bc) {
  const std::size_t n = psi.size();
  std::size_t jp, jm;
  if (bc == Boundary::periodic) {
    jp = (j + 1) % n;
    jm = (j + n - 1) % n;
  } else {
    if (j == 0 || j == n - 1) return {0.0, 0.0};
    jp = j + 1;
    jm = j - 1;
  }
  const double ap = 0.5 * (a[j] + a[jp]);
  const double am = 0.5 * (a[j] + a[jm]);
  const complex up = charge == 0.0 ? complex(1.0) : std::polar(1.0, charge * ap * h);
  const complex um = charge == 0.0 ? complex(1.0) : std::polar(1.0, -charge * am * h);
  return ((up * psi[jp] - psi[j]) - (psi[j] - um * psi[jm])) / (h * h);
}

inline void check_finite(std::span<const complex> psi, std::size_t step) {
  for (const auto& z : psi) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InstabilityError("non-finite amplitude", step);
  }
}

}  // namespace detail

struct EvolveOptions {
  std::size_t steps = 100;
  double dt = 0.01;
  Boundary boundary = Boundary::periodic;
  std::size_t snapshot_stride = 1;
};

/// Snapshots on a (t, x) grid (uniform spacing dt * stride) plus the
/// staggered charge int j^0 dx evaluated between every pair of steps.
struct EvolutionHistory {
  ComplexField field;
  std::vector<double> charge;
  double dt = 0.0;
};

/// Explicit leapfrog on the second-order-in-time equation. The first step uses
/// a Taylor start psi^1 = psi^0 + dt psi_t + dt^2/2 psi_tt with psi_tt from the
/// equation itself. With Dirichlet boundaries the end nodes are held at zero.
inline EvolutionHistory evolve(const ComplexField& psi0, const ComplexField& psidot0, const PotentialConfig& pot,
                               const Physics& phys, const EvolveOptions& opt) {
  const Grid& g = psi0.grid();
  if (g.has_time() || g.is_radial()) throw ConfigurationError("evolve needs a spatial (x) grid");
  if (!(psidot0.grid() == g)) throw ConfigurationError("initial data on different grids");
  pot.validate();
  if (!(pot.grid().space().origin == g.space().origin && pot.grid().space().spacing == g.space().spacing &&
        pot.grid().nx() == g.nx())) {
    throw ConfigurationError("potential grid does not match the amplitude grid");
  }
  if (pot.grid().has_time()) {
    const Axis& ta = pot.grid().time();
    if (std::abs(ta.spacing - opt.dt) > 1e-12 * opt.dt || ta.count < opt.steps + 1) {
      throw ConfigurationError("time-dependent potential must be sampled at dt for every step");
    }
  }
  const double h = g.space().spacing;
  if (!(opt.dt > 0.0) || opt.dt > h) {
    throw ConfigurationError("CFL violated: dt = " + std::to_string(opt.dt) + " > dx = " + std::to_string(h));
  }
  if (opt.snapshot_stride == 0) throw ConfigurationError("snapshot stride must be >= 1");
  const std::size_t snaps = opt.steps / opt.snapshot_stride + 1;
  if (snaps < min_axis_points) throw ConfigurationError("too few snapshots for a history grid (need >= 8)");

  const std::size_t n = g.nx();
  const double m = phys.mass;
  const double e = phys.charge;
  const double dt = opt.dt;
  const RealField w_total = pot.scalar_total();

  std::vector<complex> prev(psi0.values().begin(), psi0.values().end());
  std::vector<complex> rate(psidot0.values().begin(), psidot0.values().end());
  if (opt.boundary == Boundary::dirichlet) {
    prev.front() = prev.back() = 0.0;
    rate.front() = rate.back() = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(std::abs(prev[j])) || !std::isfinite(std::abs(rate[j]))) {
      throw DomainError("initial data must be finite");
    }
  }

  auto rhs = [&](const std::vector<complex>& psi, const detail::PotentialRows& row, std::size_t j) {
    const complex lap = detail::covariant_laplacian(psi, row.a, e, h, j, opt.boundary);
    const complex coeff(e * e * row.phi[j] * row.phi[j] + 2.0 * m * row.w[j] - m * m, e * row.dphi_dt[j]);
    return lap + coeff * psi[j];
  };

  auto weight = [&](std::size_t j) {
    if (opt.boundary == Boundary::periodic) return h;
    return (j == 0 || j == n - 1) ? 0.5 * h : h;
  };

  EvolutionHistory hist;
  hist.dt = dt;
  std::vector<complex> snapshots;
  snapshots.reserve(snaps * n);
  snapshots.insert(snapshots.end(), prev.begin(), prev.end());

  auto staggered_charge = [&](const std::vector<complex>& a, const std::vector<complex>& b,
                              const detail::PotentialRows& row) {
    double q = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const complex z = std::conj(a[j]) * b[j];
      q += weight(j) * (-z.imag() / dt + e * row.phi[j] * z.real()) / m;
    }
    return q;
  };

  // Taylor start.
  std::vector<complex> cur(n);
  {
    const auto row = detail::potential_row(pot, w_total, 0);
    for (std::size_t j = 0; j < n; ++j) {
      const complex acc = rhs(prev, row, j) + complex(0.0, 2.0 * e * row.phi[j]) * rate[j];
      cur[j] = prev[j] + dt * rate[j] + 0.5 * dt * dt * acc;
    }
    if (opt.boundary == Boundary::dirichlet) cur.front() = cur.back() = 0.0;
    detail::check_finite(cur, 1);
    hist.charge.push_back(staggered_charge(prev, cur, row));
  }
  if (opt.snapshot_stride == 1) snapshots.insert(snapshots.end(), cur.begin(), cur.end());

  std::vector<complex> next(n);
  for (std::size_t step = 1; step < opt.steps; ++step) {
    const auto row = detail::potential_row(pot, w_total, step);
    for (std::size_t j = 0; j < n; ++j) {
      const complex a(0.0, e * row.phi[j] * dt);
      next[j] = (2.0 * cur[j] - (1.0 + a) * prev[j] + dt * dt * rhs(cur, row, j)) / (1.0 - a);
    }
    if (opt.boundary == Boundary::dirichlet) next.front() = next.back() = 0.0;
    detail::check_finite(next, step + 1);
    hist.charge.push_back(staggered_charge(cur, next, row));
    std::swap(prev, cur);
    std::swap(cur, next);
    if ((step + 1) % opt.snapshot_stride == 0) snapshots.insert(snapshots.end(), cur.begin(), cur.end());
  }
  snapshots.resize(snaps * n);
  hist.field = ComplexField(Grid::spacetime(Axis{AxisKind::t, 0.0, dt * static_cast<double>(opt.snapshot_stride), snaps},
                                            g.space()),
                            std::move(snapshots));
  return hist;
}

struct StationaryState {
  double energy = 0.0;
  ComplexField profile;
  double residual = 0.0;
};

struct EnergyWindow {
  double lo = 0.0;
  double hi = 0.0;
};

namespace detail {

/// H = -D^2 + m^2 - 2m (V + M) on the free nodes (all nodes when periodic,
/// interior nodes for Dirichlet).
inline Eigen::MatrixXcd stationary_operator(const PotentialConfig& pot, const RealField& w_total, const Physics& phys,
                                            Boundary bc, std::size_t& offset) {
  const Grid& g = pot.grid();
  const std::size_t n = g.nx();
  const double h = g.space().spacing;
  const double e = phys.charge;
  const double m = phys.mass;
  offset = bc == Boundary::periodic ? 0 : 1;
  const std::size_t nu = bc == Boundary::periodic ? n : n - 2;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nu), static_cast<Eigen::Index>(nu));
  const auto a = pot.em.a1.row(0);
  for (std::size_t k = 0; k < nu; ++k) {
    const std::size_t j = k + offset;
    const auto ki = static_cast<Eigen::Index>(k);
    H(ki, ki) = 2.0 / (h * h) + m * m - 2.0 * m * w_total[j];
    // Right neighbour link.
    std::size_t jp = j + 1;
    bool has_p = true;
    if (bc == Boundary::periodic) {
      jp %= n;
    } else if (jp >= n - 1) {
      has_p = false;
    }
    if (has_p) {
      const double ap = 0.5 * (a[j] + a[jp]);
      const complex link = std::polar(1.0, e * ap * h);
      const auto kp = static_cast<Eigen::Index>(jp - offset);
      H(ki, kp) += -link / (h * h);
      H(kp, ki) += -std::conj(link) / (h * h);
    }
  }
  return H;
}

inline double potential_phi_constant(const RealField& phi, bool& constant) {
  constant = true;
  const double v0 = phi[0];
  for (double v : phi.values()) {
    if (v != v0) constant = false;
  }
  return v0;
}

/// Inverse iteration with a shift just off the eigenvalue estimate; skipped
/// when the dense solve already meets the residual target.
inline void shift_invert_polish(const Eigen::MatrixXcd& H, double& lambda, Eigen::VectorXcd& v, int iterations = 2,
                                double target = 1e-10) {
  const auto n = H.rows();
  for (int it = 0; it < iterations; ++it) {
    if ((H * v - lambda * v).cwiseAbs().maxCoeff() <= target) return;
    const double shift = lambda + 1e-9 * (1.0 + std::abs(lambda));
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(H - shift * Eigen::MatrixXcd::Identity(n, n));
    Eigen::VectorXcd y = lu.solve(v);
    const double norm = y.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) return;
    v = y / norm;
    lambda = (v.adjoint() * H * v)(0, 0).real();
  }
}

}  // namespace detail

/// Eigenpairs of the static amplitude equation with Psi = psi(x) exp(-i E t):
///
///   (E + e phi)^2 psi = [ -D^2 + m^2 - 2m (V + M) ] psi,
///
/// for every E in the window, sorted by E. Profiles are normalized so that
/// int |E + e phi| / m |psi|^2 dx = 1 (charge density divided by +-m).
inline std::vector<StationaryState> stationary_solve(const PotentialConfig& pot, EnergyWindow window,
                                                     const Physics& phys, Boundary bc = Boundary::periodic) {
  pot.validate();
  if (!pot.is_static()) throw ConfigurationError("stationary_solve needs static potentials");
  if (pot.grid().is_radial()) throw ConfigurationError("stationary_solve works on Cartesian x grids");
  if (window.hi < window.lo) std::swap(window.lo, window.hi);
  const Grid& g = pot.grid();
  const std::size_t n = g.nx();
  const double e = phys.charge;
  const double m = phys.mass;
  const RealField w_total = pot.scalar_total();
  std::size_t offset = 0;
  const Eigen::MatrixXcd H = detail::stationary_operator(pot, w_total, phys, bc, offset);
  const auto nu = H.rows();

  bool phi_const = true;
  const double phi0 = detail::potential_phi_constant(pot.em.phi, phi_const);
  const bool linear_in_e2 = (e == 0.0) || phi_const;
  const double shift = e * phi0;

  struct Candidate {
    double energy;
    Eigen::VectorXcd vec;
  };
  std::vector<Candidate> found;

  if (linear_in_e2) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::VectorXd lam = es.eigenvalues();
    for (Eigen::Index k = 0; k < nu; ++k) {
      if (lam(k) < 0.0) continue;
      const double root = std::sqrt(lam(k));
      for (double sgn : {1.0, -1.0}) {
        if (sgn < 0.0 && root == 0.0) continue;
        const double E = -shift + sgn * root;
        if (E < window.lo || E > window.hi) continue;
        double l = lam(k);
        Eigen::VectorXcd v = es.eigenvectors().col(k);
        detail::shift_invert_polish(H, l, v);
        const double r = std::sqrt(std::max(l, 0.0));
        found.push_back({-shift + sgn * r, v});
      }
    }
  } else {
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(2 * nu, 2 * nu);
    C.topRightCorner(nu, nu) = Eigen::MatrixXcd::Identity(nu, nu);
    Eigen::MatrixXcd lower = H;
    for (Eigen::Index k = 0; k < nu; ++k) {
      const double ph = pot.em.phi[static_cast<std::size_t>(k) + offset];
      lower(k, k) -= e * e * ph * ph;
      C(nu + k, nu + k) = -2.0 * e * ph;
    }
    C.bottomLeftCorner(nu, nu) = lower;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C);
    for (Eigen::Index k = 0; k < 2 * nu; ++k) {
      const complex E = es.eigenvalues()(k);
      if (std::abs(E.imag()) > 1e-8 * (1.0 + std::abs(E.real()))) continue;
      if (E.real() < window.lo || E.real() > window.hi) continue;
      Eigen::VectorXcd v = es.eigenvectors().col(k).head(nu);
      v.normalize();
      found.push_back({E.real(), v});
    }
  }

  std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) { return a.energy < b.energy; });

  std::vector<StationaryState> out;
  for (auto& c : found) {
    // Fix the global phase: largest component real and positive.
    Eigen::Index imax = 0;
    c.vec.cwiseAbs().maxCoeff(&imax);
    const complex ph = c.vec(imax) / std::abs(c.vec(imax));
    c.vec /= ph;

    std::vector<complex> psi(n, complex(0.0));
    for (Eigen::Index k = 0; k < nu; ++k) psi[static_cast<std::size_t>(k) + offset] = c.vec(k);
    std::vector<double> dens(n);
    for (std::size_t j = 0; j < n; ++j) {
      dens[j] = std::abs(c.energy + e * pot.em.phi[j]) / m * std::norm(psi[j]);
    }
    double norm = bc == Boundary::periodic
                      ? [&] {
                          double s = 0.0;
                          for (double d : dens) s += d;
                          return s * g.space().spacing;
                        }()
                      : numerics::trapezoid<double>(dens, g.space().spacing);
    if (!(norm > 0.0)) continue;
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& z : psi) z *= scale;

    double res = 0.0;
    for (Eigen::Index k = 0; k < nu; ++k) {
      complex hv{0.0, 0.0};
      for (Eigen::Index l = 0; l < nu; ++l) hv += H(k, l) * psi[static_cast<std::size_t>(l) + offset];
      const std::size_t j = static_cast<std::size_t>(k) + offset;
      const double ee = c.energy + e * pot.em.phi[j];
      res = std::max(res, std::abs(ee * ee * psi[j] - hv));
    }
    out.push_back({c.energy, ComplexField(g, std::move(psi)), res});
  }
  return out;
}

/// Psi(t, x) = psi(x) exp(-i E t) sampled on a spacetime grid.
inline ComplexField expand_stationary(const StationaryState& s, const Axis& time) {
  const Grid& sg = s.profile.grid();
  const Grid g = Grid::spacetime(time, sg.space());
  ComplexField out(g);
  for (std::size_t it = 0; it < g.nt(); ++it) {
    const complex phase = std::polar(1.0, -s.energy * g.t(it));
    for (std::size_t ix = 0; ix < g.nx(); ++ix) out(it, ix) = s.profile(0, ix) * phase;
  }
  return out;
}

/// Amplitude-consistent form (default) conjugates the y' operator and carries
/// +[W(y) - W(y')]; as_printed uses the unconjugated y' operator and -[W(y) - W(y')].
enum class DensityConvention { amplitude_consistent, as_printed };

namespace detail {

/// Fourth-order first and second differences along one axis, written in
/// difference form so constants give exact zeros. Within two cells of an edge
/// they fall back to the second-order stencils.
template <class T>
Field<T> partial4(const Field<T>& f, AxisKind axis, int order) {
  const Grid& g = f.grid();
  const bool along_t = axis == AxisKind::t;
  const std::size_t n = along_t ? g.nt() : g.nx();
  const std::size_t m = along_t ? g.nx() : g.nt();
  const double h = along_t ? g.time().spacing : g.space().spacing;
  Field<T> out = order == 1 ? numerics::partial(f, axis) : numerics::second_partial(f, axis);
  auto at = [&](std::size_t i, std::size_t j) -> const T& { return along_t ? f(i, j) : f(j, i); };
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 2; i + 2 < n; ++i) {
      const T a = at(i + 1, j) - at(i, j), b = at(i, j) - at(i - 1, j);
      const T c = at(i + 2, j) - at(i + 1, j), d = at(i - 1, j) - at(i - 2, j);
      T v;
      if (order == 1) {
        v = (T(7.0) * (a + b) - (c + d)) / (12.0 * h);
      } else {
        v = (T(15.0) * (a - b) - (c - d)) / (12.0 * h * h);
      }
      (along_t ? out(i, j) : out(j, i)) = v;
    }
  }
  return out;
}

/// [i d + s e A]_a [i d + s e A]^a Psi on a flat spacetime grid (s = +-1 on the linear terms).
inline ComplexField gauge_square(const ComplexField& psi, const RealField& phi, const RealField& a, double charge,
                                 double sign) {
  const ComplexField dtt = partial4(psi, AxisKind::t, 2);
  const ComplexField dxx = partial4(psi, AxisKind::x, 2);
  ComplexField out(psi.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dxx[i] - dtt[i];
  if (charge == 0.0) return out;
  const ComplexField dpt = partial4(psi, AxisKind::t, 1);
  const ComplexField dpx = partial4(psi, AxisKind::x, 1);
  const RealField dphit = partial4(phi, AxisKind::t, 1);
  const RealField dax = partial4(a, AxisKind::x, 1);
  const complex ie(0.0, sign * charge);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += ie * (dphit[i] + dax[i]) * psi[i] + 2.0 * ie * (phi[i] * dpt[i] + a[i] * dpx[i]) +
              charge * charge * (phi[i] * phi[i] - a[i] * a[i]) * psi[i];
  }
  return out;
}

inline RealField broadcast(const RealField& f, const Grid& target) {
  if (f.grid() == target) return f;
  if (f.grid().has_time() || f.grid().nx() != target.nx()) throw DomainError("potential grid incompatible with field");
  RealField out(target);
  for (std::size_t it = 0; it < target.nt(); ++it) {
    for (std::size_t ix = 0; ix < target.nx(); ++ix) out(it, ix) = f(0, ix);
  }
  return out;
}

inline long offset_steps(double d, double spacing) {
  const double s = d / (2.0 * spacing);
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-9) throw DomainError("dx/2 must be a whole number of grid steps");
  return static_cast<long>(r);
}

}  // namespace detail

/// Left side of the density-function equation for rho(y, y') = Psi*(y') Psi(y),
/// y = x + dx/2, y' = x - dx/2, evaluated with fourth-order stencils so that
/// the second-order error of solver output is visible. Base points whose y or
/// y' fall within two cells of an edge are masked.
inline MaskedField<complex> density_equation_residual(const ComplexField& psi, const PotentialConfig& pot,
                                                      const FourVector& dx, const Physics& phys,
                                                      DensityConvention conv = DensityConvention::amplitude_consistent) {
  const Grid& g = psi.grid();
  if (!g.has_time()) throw DomainError("density_equation_residual needs a spacetime field");
  if (std::abs(dx[0]) > 0.5 * g.time().extent() || std::abs(dx[1]) > 0.5 * g.space().extent()) {
    throw DomainError("separation larger than half the grid extent");
  }
  const long kt = detail::offset_steps(dx[0], g.time().spacing);
  const long kx = detail::offset_steps(dx[1], g.space().spacing);
  pot.validate();
  const RealField w = detail::broadcast(pot.scalar_total(), g);
  const RealField phi = detail::broadcast(pot.em.phi, g);
  const RealField a = detail::broadcast(pot.em.a1, g);
  const double e = phys.charge;
  const double m = phys.mass;

  const ComplexField k_plus = detail::gauge_square(psi, phi, a, e, +1.0);
  const ComplexField k_minus = conv == DensityConvention::as_printed ? detail::gauge_square(psi, phi, a, e, -1.0)
                                                                     : ComplexField();
  const ComplexField& k_prime = conv == DensityConvention::as_printed ? k_minus : k_plus;
  const double wsign = conv == DensityConvention::as_printed ? -1.0 : 1.0;

  MaskedField<complex> out{ComplexField(g), std::vector<bool>(g.size(), false)};
  const long nt = static_cast<long>(g.nt());
  const long nx = static_cast<long>(g.nx());
  auto inside = [](long i, long n) { return i >= 2 && i <= n - 3; };
  for (long it = 0; it < nt; ++it) {
    for (long ix = 0; ix < nx; ++ix) {
      const long yt = it + kt, yx = ix + kx, pt = it - kt, px = ix - kx;
      if (!inside(yt, nt) || !inside(yx, nx) || !inside(pt, nt) || !inside(px, nx)) continue;
      const std::size_t y = g.index(static_cast<std::size_t>(yt), static_cast<std::size_t>(yx));
      const std::size_t yp = g.index(static_cast<std::size_t>(pt), static_cast<std::size_t>(px));
      const complex rho = std::conj(psi[yp]) * psi[y];
      const complex r = (std::conj(psi[yp]) * k_plus[y] - psi[y] * std::conj(k_prime[yp])) / (2.0 * m) +
                        wsign * (w[y] - w[yp]) * rho;
      const std::size_t base = g.index(static_cast<std::size_t>(it), static_cast<std::size_t>(ix));
      out.values[base] = r;
      out.valid[base] = true;
    }
  }
  return out;
}

// ---- initial-data and potential generators ------------------------------

/// exp(i (p x - E t)) on any Cartesian grid.
inline ComplexField plane_wave(const Grid& g, double p, double energy, complex amplitude = 1.0) {
  return ComplexField::sample(g, [&](double t, double x) { return amplitude * std::polar(1.0, p * x - energy * t); });
}

struct InitialData {
  ComplexField psi;
  ComplexField psidot;
};

/// Single-branch Gaussian packet on a periodic box, built as an exact
/// superposition of box modes exp(i k x) with amplitudes exp(-(k - p)^2 sigma^2)
/// and time derivative -i (+-E_k) per mode. Normalized to int j^0 dx = +-1.
inline InitialData gaussian_packet(const Grid& g, double x0, double p_mean, double sigma, const Physics& phys,
                                   int branch = +1) {
  if (g.has_time()) throw ConfigurationError("gaussian_packet needs a spatial grid");
  if (!(sigma > 0.0)) throw ConfigurationError("packet width must be > 0");
  const std::size_t n = g.nx();
  const double h = g.space().spacing;
  const double L = h * static_cast<double>(n);
  const double dk = 2.0 * std::numbers::pi / L;
  const double kmax = std::numbers::pi / h;
  const double reach = 8.6 / sigma;
  const long lo = static_cast<long>(std::floor((p_mean - reach) / dk));
  const long hi = static_cast<long>(std::ceil((p_mean + reach) / dk));
  std::vector<complex> psi(n), rate(n);
  const double m = phys.mass;
  const double s = branch >= 0 ? 1.0 : -1.0;
  for (long q = lo; q <= hi; ++q) {
    const double k = dk * static_cast<double>(q);
    if (std::abs(k) >= kmax) continue;
    const double amp = std::exp(-(k - p_mean) * (k - p_mean) * sigma * sigma);
    if (amp < 1e-300) continue;
    const double ek = s * std::sqrt(k * k + m * m);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = g.x(j);
      const complex mode = amp * std::polar(1.0, k * (x - x0));
      psi[j] += mode;
      rate[j] += complex(0.0, -ek) * mode;
    }
  }
  double q = 0.0;
  for (std::size_t j = 0; j < n; ++j) q += -(std::conj(psi[j]) * rate[j]).imag() / m * h;
  const double scale = 1.0 / std::sqrt(std::abs(q));
  for (std::size_t j = 0; j < n; ++j) {
    psi[j] *= scale;
    rate[j] *= scale;
  }
  return {ComplexField(g, std::move(psi)), ComplexField(g, std::move(rate))};
}

/// V = depth on |x - center| < width/2, zero elsewhere (positive depth binds).
inline RealField square_well(const Grid& g, double center, double width, double depth) {
  return RealField::sample(g, [&](double, double x) { return std::abs(x - center) < 0.5 * width ? depth : 0.0; });
}

}  // namespace relqm
