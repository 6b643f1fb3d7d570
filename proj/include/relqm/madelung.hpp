#pragma once

// Polar (R, S) decomposition of amplitudes and the hydrodynamic quantities
// derived from it: statistical potential, continuity and Hamilton-Jacobi
// residuals, four-current, the t-conserved probability density, the
// second-order expansion of the two-point density and guided trajectories.
//
// Sign convention: positive-energy amplitudes are exp(i(p x - E t)), so the
// mechanical momentum is p_a = -d_a S (p^0 = -d_t S, p^1 = d_x S).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relqm/errors.hpp"
#include "relqm/geometry.hpp"
#include "relqm/grid.hpp"
#include "relqm/numerics.hpp"

namespace relqm {

struct MadelungPair {
  RealField r;
  RealField s;
  std::vector<bool> node;
  /// Set for spatial-only fields of a stationary state S = -E t + s(x).
  std::optional<double> stationary_energy;

  const Grid& grid() const { return r.grid(); }
  bool is_node(std::size_t i) const { return !node.empty() && node[i]; }
};

namespace detail {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Unwrap one line of raw phases in place; node samples are interpolated
// linearly from the surrounding unwrapped values.
inline void unwrap_line(std::span<double> phase, std::span<const bool> node) {
  const std::size_t n = phase.size();
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < n; ++i) {
    if (node[i]) continue;
    if (last) {
      double d = phase[i] - phase[*last];
      phase[i] -= two_pi * std::round(d / two_pi);
    }
    last = i;
  }
  // Fill nodes.
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < n; ++i) {
    if (!node[i]) {
      prev = i;
      continue;
    }
    std::size_t j = i;
    while (j < n && node[j]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (prev && j < n) {
        const double f = static_cast<double>(k - *prev) / static_cast<double>(j - *prev);
        phase[k] = (1.0 - f) * phase[*prev] + f * phase[j];
      } else if (prev) {
        phase[k] = phase[*prev];
      } else if (j < n) {
        phase[k] = phase[j];
      } else {
        phase[k] = 0.0;
      }
    }
    i = j - 1;
  }
}

}  // namespace detail

/// R = |Psi|, S = unwrapped arg(Psi). Nodes are points with
/// R < eps_rel * max R; S is interpolated across them. Rows (fixed t) are
/// unwrapped along x, then whole rows are shifted by multiples of 2 pi to
/// match the previous row at its largest-amplitude point.
inline MadelungPair decompose(const ComplexField& psi, double eps_rel = 1e-8) {
  const Grid& g = psi.grid();
  MadelungPair mp{RealField(g), RealField(g), std::vector<bool>(g.size(), false), std::nullopt};
  double rmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    mp.r[i] = std::abs(psi[i]);
    if (!std::isfinite(mp.r[i])) throw DomainError("decompose: non-finite amplitude");
    rmax = std::max(rmax, mp.r[i]);
  }
  const double eps = eps_rel * rmax;
  std::size_t live = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    mp.node[i] = !(mp.r[i] > eps) || rmax == 0.0;
    live += mp.node[i] ? 0 : 1;
    mp.s[i] = mp.node[i] ? 0.0 : std::arg(psi[i]);
  }
  if (live == 0) throw DegenerateFieldError("every point lies below the node threshold");

  const std::size_t nx = g.nx();
  std::vector<bool> row_nodes(nx);
  std::vector<double> row_phase(nx);
  std::optional<std::size_t> prev_row;
  for (std::size_t it = 0; it < g.nt(); ++it) {
    std::size_t alive = 0, best = 0;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t k = g.index(it, ix);
      row_nodes[ix] = mp.node[k];
      row_phase[ix] = mp.s[k];
      if (!mp.node[k]) {
        ++alive;
        if (mp.r[k] > mp.r[g.index(it, best)] || mp.node[g.index(it, best)]) best = ix;
      }
    }
    if (alive == 0) {
      if (prev_row) {
        for (std::size_t ix = 0; ix < nx; ++ix) mp.s(it, ix) = mp.s(*prev_row, ix);
      }
      continue;
    }
    std::vector<char> nodes_c(row_nodes.begin(), row_nodes.end());
    std::span<const bool> node_span(reinterpret_cast<const bool*>(nodes_c.data()), nodes_c.size());
    detail::unwrap_line(row_phase, node_span);
    if (prev_row) {
      const double shift = detail::two_pi * std::round((mp.s(*prev_row, best) - row_phase[best]) / detail::two_pi);
      for (auto& v : row_phase) v += shift;
    }
    for (std::size_t ix = 0; ix < nx; ++ix) mp.s(it, ix) = row_phase[ix];
    prev_row = it;
  }
  return mp;
}

inline ComplexField recompose(const MadelungPair& mp) {
  const Grid& g = mp.grid();
  ComplexField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::polar(mp.r[i], mp.s[i]);
  return out;
}

namespace detail {

/// d_mu S per storage index for mu = 0, 1, including the stationary -E.
inline std::array<RealField, 2> action_gradient(const MadelungPair& mp) {
  const Grid& g = mp.grid();
  std::array<RealField, 2> out{RealField(g), RealField(g)};
  if (g.has_time()) {
    out[0] = numerics::partial(mp.s, AxisKind::t);
  } else if (mp.stationary_energy) {
    for (std::size_t i = 0; i < g.size(); ++i) out[0][i] = -*mp.stationary_energy;
  }
  out[1] = numerics::partial(mp.s, g.space().kind);
  return out;
}

}  // namespace detail

/// V_Q = -box R / (2 m R); node points are masked.
inline MaskedField<double> quantum_potential(const MadelungPair& mp, const MetricField& g, double mass) {
  const RealField box = dalembertian(mp.r, g);
  MaskedField<double> out{RealField(mp.grid()), std::vector<bool>(mp.grid().size(), true)};
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (mp.is_node(i) || mp.r[i] == 0.0) {
      out.valid[i] = false;
      continue;
    }
    out.values[i] = -box[i] / (2.0 * mass * mp.r[i]);
  }
  return out;
}

/// V_eff = V + V_Q.
inline MaskedField<double> effective_potential(const MadelungPair& mp, const RealField& v, const MetricField& g,
                                               double mass) {
  MaskedField<double> q = quantum_potential(mp, g, mass);
  for (std::size_t i = 0; i < q.values.size(); ++i) {
    if (q.valid[i]) q.values[i] += v[i];
  }
  return q;
}

/// nabla_mu (R^2 nabla^mu S / m) in flux form (1/w) d_a (w R^2 g^{aa} d_a S) / m.
inline RealField continuity_residual(const MadelungPair& mp, const MetricField& g, double mass) {
  const Grid& grid = mp.grid();
  const auto ds = detail::action_gradient(mp);
  RealField out(grid);
  for (const Axis& a : grid.axes()) {
    const std::size_t mu = static_cast<std::size_t>(component_of(a.kind));
    RealField flux(grid);
    for (std::size_t it = 0; it < grid.nt(); ++it) {
      for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
        const std::size_t k = grid.index(it, ix);
        const double measure = grid.is_radial() ? grid.x(ix) * grid.x(ix) : 1.0;
        flux[k] = measure * g.sqrt_abs_det(k) * mp.r[k] * mp.r[k] * g.inverse(mu, k) * ds[mu][k];
      }
    }
    const RealField div = numerics::partial(flux, a.kind);
    for (std::size_t it = 0; it < grid.nt(); ++it) {
      for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
        const std::size_t k = grid.index(it, ix);
        const double measure = grid.is_radial() ? grid.x(ix) * grid.x(ix) : 1.0;
        out[k] += div[k] / (measure * g.sqrt_abs_det(k) * mass);
      }
    }
  }
  return out;
}

/// Pointwise -box R/(2mR) + V - m/2 + g^{mm} d_m S d_m S / (2m) from
/// supplied derivatives (analytic sampling or any stencil).
inline double hamilton_jacobi_pointwise(double r, double box_r, const FourVector& ds_lower,
                                        const std::array<double, 4>& g_diag, double v, double mass) {
  double dsds = 0.0;
  for (std::size_t mu = 0; mu < 4; ++mu) dsds += ds_lower[mu] * ds_lower[mu] / g_diag[mu];
  return -box_r / (2.0 * mass * r) + v - 0.5 * mass + dsds / (2.0 * mass);
}

/// Hamilton-Jacobi residual on the grid; node points are masked.
inline MaskedField<double> hamilton_jacobi_residual(const MadelungPair& mp, const RealField& v, const MetricField& g,
                                                    double mass) {
  const Grid& grid = mp.grid();
  const RealField box = dalembertian(mp.r, g);
  const auto ds = detail::action_gradient(mp);
  MaskedField<double> out{RealField(grid), std::vector<bool>(grid.size(), true)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (mp.is_node(i) || mp.r[i] == 0.0) {
      out.valid[i] = false;
      continue;
    }
    FourVector dsl;
    dsl[0] = ds[0][i];
    dsl[1] = ds[1][i];
    const std::array<double, 4> gd{g.g(0, i), g.g(1, i), g.g(2, i), g.g(3, i)};
    out.values[i] = hamilton_jacobi_pointwise(mp.r[i], box[i], dsl, gd, v[i], mass);
  }
  return out;
}

struct FourCurrentField {
  RealField j0;
  RealField j1;
  RealField divergence;  // d_a j^a
};

namespace detail {

// Im(conj(a) * b) written out so that swapping a -> conj(a), b -> conj(b) flips
// the sign exactly.
inline double im_conj_product(const complex& a, const complex& b) { return a.real() * b.imag() - a.imag() * b.real(); }

inline FourCurrentField current_from_derivatives(const ComplexField& psi, const ComplexField& dt,
                                                 const ComplexField& dx, double mass) {
  const Grid& g = psi.grid();
  FourCurrentField out{RealField(g), RealField(g), RealField(g)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    // j^a = (i/2m)[psi* d^a psi - psi d^a psi*] = -Im(psi* d^a psi)/m, d^0 = d_t, d^1 = -d_x.
    out.j0[i] = -im_conj_product(psi[i], dt[i]) / mass;
    out.j1[i] = im_conj_product(psi[i], dx[i]) / mass;
  }
  return out;
}

}  // namespace detail

/// j^a = (i/2m)[psi* d^a psi - psi d^a psi*] on a flat spacetime grid, with
/// d_a j^a as a diagnostic.
inline FourCurrentField four_current(const ComplexField& psi, double mass) {
  const Grid& g = psi.grid();
  if (!g.has_time()) throw DomainError("four_current needs a spacetime field (or pass a stationary energy)");
  const ComplexField dt = numerics::partial(psi, AxisKind::t);
  const ComplexField dx = numerics::partial(psi, AxisKind::x);
  FourCurrentField out = detail::current_from_derivatives(psi, dt, dx, mass);
  const RealField d0 = numerics::partial(out.j0, AxisKind::t);
  const RealField d1 = numerics::partial(out.j1, AxisKind::x);
  for (std::size_t i = 0; i < g.size(); ++i) out.divergence[i] = d0[i] + d1[i];
  return out;
}

/// Stationary profile psi(x) of Psi = psi exp(-i E t).
inline FourCurrentField four_current(const ComplexField& psi, double energy, double mass) {
  const Grid& g = psi.grid();
  if (g.has_time()) return four_current(psi, mass);
  ComplexField dt(g);
  for (std::size_t i = 0; i < g.size(); ++i) dt[i] = complex(0.0, -energy) * psi[i];
  const ComplexField dx = numerics::partial(psi, g.space().kind);
  FourCurrentField out = detail::current_from_derivatives(psi, dt, dx, mass);
  const RealField d1 = numerics::partial(out.j1, g.space().kind);
  for (std::size_t i = 0; i < g.size(); ++i) out.divergence[i] = d1[i];
  return out;
}

enum class Branch { automatic, particle, antiparticle };

struct ProbabilityDensity {
  RealField p;
  std::vector<double> integral;  // int P dx per time row
  double sign = 1.0;             // +1 particle, -1 antiparticle
  bool branch_mismatch = false;
  double positive_integral = 0.0;  // int max(P, 0) dx over the first row
  double negative_integral = 0.0;  // int min(P, 0) dx over the first row
};

/// P = +-j^0: the charge density divided by +-m (natural units). The automatic
/// branch takes the sign of int j^0 dx on the first row.
inline ProbabilityDensity probability_density(const FourCurrentField& j, Branch branch = Branch::automatic,
                                              double tolerance = 1e-10) {
  const Grid& g = j.j0.grid();
  ProbabilityDensity out{RealField(g), {}, 1.0, false, 0.0, 0.0};
  if (branch == Branch::automatic) {
    out.sign = numerics::trapezoid<double>(j.j0.row(0), g.space().spacing) >= 0.0 ? 1.0 : -1.0;
  } else {
    out.sign = branch == Branch::particle ? 1.0 : -1.0;
  }
  double pmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.p[i] = out.sign * j.j0[i];
    pmax = std::max(pmax, std::abs(out.p[i]));
  }
  for (std::size_t it = 0; it < g.nt(); ++it) out.integral.push_back(numerics::trapezoid<double>(out.p.row(it), g.space().spacing));
  std::vector<double> pos(g.nx()), neg(g.nx());
  for (std::size_t ix = 0; ix < g.nx(); ++ix) {
    pos[ix] = std::max(out.p(0, ix), 0.0);
    neg[ix] = std::min(out.p(0, ix), 0.0);
  }
  out.positive_integral = numerics::trapezoid<double>(pos, g.space().spacing);
  out.negative_integral = numerics::trapezoid<double>(neg, g.space().spacing);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (out.p[i] < -tolerance * pmax) out.branch_mismatch = true;
  }
  return out;
}

/// Second-order expansion data of R and S at a point (coordinate derivatives,
/// components 0 = t, 1 = x; inactive components zero).
struct LocalJet {
  double r = 0.0;
  FourVector dr;
  std::array<FourVector, 4> ddr{};
  FourVector ds;
};

/// exp[i d_b S dx^b] { R^2 - [ (h.dR)^2 - R (h.d)^2 R ] }, h = dx/2.
inline complex expansion_value(const LocalJet& jet, const FourVector& dx) {
  double phase = 0.0, hdr = 0.0, hhr = 0.0;
  for (std::size_t mu = 0; mu < 4; ++mu) {
    const double h = 0.5 * dx[mu];
    phase += jet.ds[mu] * dx[mu];
    hdr += h * jet.dr[mu];
    for (std::size_t nu = 0; nu < 4; ++nu) hhr += h * 0.5 * dx[nu] * jet.ddr[mu][nu];
  }
  return std::polar(jet.r * jet.r - (hdr * hdr - jet.r * hhr), phase);
}

/// |Psi*(x - dx/2) Psi(x + dx/2) - expansion|, given the exact product.
inline double expansion_error(const LocalJet& jet, const FourVector& dx, complex exact) {
  return std::abs(exact - expansion_value(jet, dx));
}

/// Grid form: dx/2 must land on grid nodes; jets use fourth-order centred
/// differences, so the point needs two neighbours on each side per axis.
inline double expansion_check(const MadelungPair& mp, GridPoint x, const FourVector& dx) {
  const Grid& g = mp.grid();
  g.require(x);
  auto steps = [](double d, double h) {
    const double s = d / (2.0 * h);
    const double r = std::round(s);
    if (std::abs(s - r) > 1e-9) throw DomainError("dx/2 must be a whole number of grid steps");
    return static_cast<long>(r);
  };
  const long kt = g.has_time() ? steps(dx[0], g.time().spacing) : 0;
  const long kx = steps(dx[1], g.space().spacing);
  if (!g.has_time() && dx[0] != 0.0) throw DomainError("time separation on a spatial grid");
  auto ok = [](long i, long n) { return i >= 0 && i < n; };
  const long it = static_cast<long>(x.it), ix = static_cast<long>(x.ix);
  const long nt = static_cast<long>(g.nt()), nx = static_cast<long>(g.nx());
  if (!ok(it + kt, nt) || !ok(it - kt, nt) || !ok(ix + kx, nx) || !ok(ix - kx, nx)) {
    throw DomainError("expansion separation leaves the grid");
  }
  if (ix < 2 || ix + 2 >= nx || (g.has_time() && (it < 2 || it + 2 >= nt))) {
    throw DomainError("expansion point needs two neighbours per axis");
  }
  const ComplexField psi = recompose(mp);
  auto at = [&](long a, long b) { return static_cast<std::size_t>(a) * g.nx() + static_cast<std::size_t>(b); };
  const complex exact = std::conj(psi[at(it - kt, ix - kx)]) * psi[at(it + kt, ix + kx)];

  auto d1 = [](const RealField& f, auto idx, double h) {
    return (-f[idx(2)] + 8.0 * f[idx(1)] - 8.0 * f[idx(-1)] + f[idx(-2)]) / (12.0 * h);
  };
  auto d2 = [](const RealField& f, auto idx, double h) {
    return (-f[idx(2)] + 16.0 * f[idx(1)] - 30.0 * f[idx(0)] + 16.0 * f[idx(-1)] - f[idx(-2)]) / (12.0 * h * h);
  };
  auto along_x = [&](long s) { return at(it, ix + s); };
  auto along_t = [&](long s) { return at(it + s, ix); };
  LocalJet jet;
  const std::size_t c = at(it, ix);
  jet.r = mp.r[c];
  const double hx = g.space().spacing;
  jet.dr[1] = d1(mp.r, along_x, hx);
  jet.ddr[1][1] = d2(mp.r, along_x, hx);
  jet.ds[1] = d1(mp.s, along_x, hx);
  if (g.has_time()) {
    const double ht = g.time().spacing;
    jet.dr[0] = d1(mp.r, along_t, ht);
    jet.ddr[0][0] = d2(mp.r, along_t, ht);
    jet.ds[0] = d1(mp.s, along_t, ht);
    auto mixed = [&](long a, long b) { return mp.r[at(it + a, ix + b)]; };
    jet.ddr[0][1] = jet.ddr[1][0] =
        (mixed(1, 1) - mixed(1, -1) - mixed(-1, 1) + mixed(-1, -1)) / (4.0 * ht * hx);
  }
  return expansion_error(jet, dx, exact);
}

/// int (1/2i)[Psi d^a Psi* - Psi* d^a Psi] over the grid, alongside
/// m * int j^a computed from the four-current.
struct MeanFourMomentum {
  FourVector value;
  FourVector via_current;
};

inline MeanFourMomentum mean_four_momentum_amplitude(const ComplexField& psi, double mass,
                                                     std::optional<double> stationary_energy = std::nullopt) {
  const Grid& g = psi.grid();
  ComplexField dt(g);
  if (g.has_time()) {
    dt = numerics::partial(psi, AxisKind::t);
  } else {
    if (!stationary_energy) throw DomainError("spatial field needs a stationary energy for the time component");
    for (std::size_t i = 0; i < g.size(); ++i) dt[i] = complex(0.0, -*stationary_energy) * psi[i];
  }
  const ComplexField dx = numerics::partial(psi, g.space().kind);
  ComplexField e0(g), e1(g);
  const complex inv2i(0.0, -0.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    // d^0 = d_t, d^1 = -d_x
    e0[i] = inv2i * (psi[i] * std::conj(dt[i]) - std::conj(psi[i]) * dt[i]);
    e1[i] = inv2i * (-psi[i] * std::conj(dx[i]) + std::conj(psi[i]) * dx[i]);
  }
  MeanFourMomentum out;
  out.value[0] = numerics::integrate(e0).real();
  out.value[1] = numerics::integrate(e1).real();
  const FourCurrentField j = detail::current_from_derivatives(psi, dt, dx, mass);
  out.via_current[0] = mass * numerics::integrate(j.j0);
  out.via_current[1] = mass * numerics::integrate(j.j1);
  return out;
}

struct TrajectoryState {
  double tau = 0.0;
  FourVector x;
  FourVector p;
};

struct TrajectoryPath {
  std::vector<TrajectoryState> states;
  bool exited_grid = false;
  bool node_crossing = false;
};

struct TrajectoryOptions {
  double tau_span = 1.0;
  double dtau = 0.01;
  double node_eps_rel = 1e-8;
};

/// dp^a/dtau = -d^a V_eff, dx^a/dtau = p^a/m by classical RK4 with
/// p^a(0) = -d^a S(x0). Gradients of V_eff are centred differences, sampled
/// bilinearly. On spatial-only stationary fields t advances freely.
inline TrajectoryPath integrate_trajectory(const FourVector& x0, const MadelungPair& mp, const RealField& v,
                                           double mass, const TrajectoryOptions& opt) {
  const Grid& g = mp.grid();
  const MetricField flat = MetricField::flat(g);
  MaskedField<double> veff = effective_potential(mp, v, flat, mass);
  RealField ve = veff.values;
  const RealField dvx = numerics::partial(ve, g.space().kind);
  const RealField dvt = g.has_time() ? numerics::partial(ve, AxisKind::t) : RealField(g);
  const auto ds = detail::action_gradient(mp);
  double rmax = 0.0;
  for (double r : mp.r.values()) rmax = std::max(rmax, r);
  const double eps = opt.node_eps_rel * rmax;

  TrajectoryPath path;
  auto sample = [&](const RealField& f, const FourVector& x) { return numerics::interpolate(f, x[0], x[1]); };
  auto r0 = sample(mp.r, x0);
  if (!r0) {
    path.exited_grid = true;
    return path;
  }
  if (*r0 < eps) {
    path.node_crossing = true;
    return path;
  }
  TrajectoryState st;
  st.x = x0;
  st.p[0] = -*sample(ds[0], x0);
  st.p[1] = *sample(ds[1], x0);
  path.states.push_back(st);

  struct Deriv {
    FourVector dx, dp;
  };
  auto rhs = [&](const FourVector& x, const FourVector& p) -> std::optional<Deriv> {
    auto gx = sample(dvx, x);
    auto gt = sample(dvt, x);
    if (!gx || !gt) return std::nullopt;
    Deriv d;
    d.dx[0] = p[0] / mass;
    d.dx[1] = p[1] / mass;
    d.dp[0] = -*gt;  // -d^0 V = -d_t V
    d.dp[1] = *gx;   // -d^1 V = +d_x V
    return d;
  };

  const auto steps = static_cast<std::size_t>(std::llround(opt.tau_span / opt.dtau));
  const double h = opt.dtau;
  for (std::size_t n = 0; n < steps; ++n) {
    const auto k1 = rhs(st.x, st.p);
    if (!k1) break;
    const auto k2 = rhs(st.x + 0.5 * h * k1->dx, st.p + 0.5 * h * k1->dp);
    if (!k2) break;
    const auto k3 = rhs(st.x + 0.5 * h * k2->dx, st.p + 0.5 * h * k2->dp);
    if (!k3) break;
    const auto k4 = rhs(st.x + h * k3->dx, st.p + h * k3->dp);
    if (!k4) break;
    TrajectoryState next;
    next.tau = st.tau + h;
    next.x = st.x + (h / 6.0) * (k1->dx + 2.0 * k2->dx + 2.0 * k3->dx + k4->dx);
    next.p = st.p + (h / 6.0) * (k1->dp + 2.0 * k2->dp + 2.0 * k3->dp + k4->dp);
    const auto rn = sample(mp.r, next.x);
    if (!rn) {
      path.exited_grid = true;
      return path;
    }
    st = next;
    path.states.push_back(st);
    if (*rn < eps) {
      path.node_crossing = true;
      return path;
    }
  }
  if (path.states.size() < steps + 1) path.exited_grid = true;
  return path;
}

/// -d^a S at a point (the guidance momentum), bilinear sampling.
inline std::optional<FourVector> guidance_momentum(const MadelungPair& mp, const FourVector& x) {
  const auto ds = detail::action_gradient(mp);
  auto a = numerics::interpolate(ds[0], x[0], x[1]);
  auto b = numerics::interpolate(ds[1], x[0], x[1]);
  if (!a || !b) return std::nullopt;
  FourVector p;
  p[0] = -*a;
  p[1] = *b;
  return p;
}

}  // namespace relqm
