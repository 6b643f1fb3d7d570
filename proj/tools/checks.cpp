#include "checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "relqm/relqm.hpp"

namespace relqm::checks {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

constexpr double pi = std::numbers::pi;

FourVector vec(double t, double x) {
  FourVector v;
  v[0] = t;
  v[1] = x;
  return v;
}

Grid periodic_box(double length, std::size_t n) {
  const double h = length / static_cast<double>(n);
  return Grid::spatial(-0.5 * length, h, n);
}

// Largest |value| over valid points with R > frac * max R, `collar` cells
// away from every edge.
template <class T>
double masked_max(const MaskedField<T>& f, const RealField* r, double frac, std::size_t collar) {
  const Grid& g = f.values.grid();
  double rmax = 0.0;
  if (r) {
    for (double v : r->values()) rmax = std::max(rmax, v);
  }
  const std::size_t ct = g.has_time() ? collar : 0;
  double out = 0.0;
  for (std::size_t it = ct; it + ct < g.nt(); ++it) {
    for (std::size_t ix = collar; ix + collar < g.nx(); ++ix) {
      const std::size_t k = g.index(it, ix);
      if (!f.valid[k]) continue;
      if (r && !((*r)[k] > frac * rmax)) continue;
      out = std::max(out, std::abs(f.values[k]));
    }
  }
  return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

GaussianComponent component(double w, double x0, double sx, double p0, double p1, double sp) {
  GaussianComponent c;
  c.weight = w;
  c.mean_x = vec(0.0, x0);
  c.sigma_x = vec(0.0, sx);
  c.mean_p = vec(p0, p1);
  c.sigma_p = vec(0.0, sp);
  return c;
}

// int N(p; pbar, sp) exp(-i p dx) dp by a midpoint sum, independent of the
// closed form used by the library.
std::complex<double> momentum_integral(double pbar, double sp, double dx) {
  const int n = 20000;
  const double lo = pbar - 12.0 * sp, hi = pbar + 12.0 * sp;
  const double h = (hi - lo) / n;
  std::complex<double> s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = lo + (i + 0.5) * h;
    const double z = (p - pbar) / sp;
    s += std::exp(-0.5 * z * z) / (sp * std::sqrt(2.0 * pi)) * std::polar(1.0, -p * dx);
  }
  return s * h;
}

GravityConfig gravity_fixture(double newton_g) {
  GravityConfig cfg;
  cfg.newton_g = newton_g;
  cfg.mass = 1.0;
  cfg.boundary_radius = 10.0;
  cfg.cells = 100;
  cfg.potential = [](double r) { return 0.3 * std::exp(-r * r); };
  return cfg;
}

}  // namespace

CheckResult make_check(std::string suite, std::string name, double measured, Relation rel, double bound,
                       double target) {
  CheckResult c;
  c.suite = std::move(suite);
  c.name = std::move(name);
  c.measured = measured;
  c.relation = rel;
  c.bound = bound;
  c.target = target;
  switch (rel) {
    case Relation::at_most: c.passed = measured <= bound; break;
    case Relation::at_least: c.passed = measured >= bound; break;
    case Relation::greater_than: c.passed = measured > bound; break;
    case Relation::within: c.passed = std::abs(measured - target) <= bound; break;
  }
  return c;
}

const char* relation_symbol(Relation r) {
  switch (r) {
    case Relation::at_most: return "<=";
    case Relation::at_least: return ">=";
    case Relation::greater_than: return ">";
    case Relation::within: return "~=";
  }
  return "?";
}

const std::vector<Suite>& suites() {
  static const std::vector<Suite> all{
      {1, "mass-shell", 5.0},
      {2, "derivation-closure", 60.0},
      {3, "transform-positivity", 30.0},
      {4, "operator-correspondence", 10.0},
      {5, "nonrelativistic-limit", 30.0},
      {6, "branch-normalization", 5.0},
      {7, "expansion-order", 10.0},
      {8, "trajectories", 10.0},
      {9, "gravity-coupling", 120.0},
  };
  return all;
}

// ---- 1 ------------------------------------------------------------------------

std::vector<CheckResult> mass_shell() {
  const std::string s = "mass-shell";
  std::vector<CheckResult> out;
  const Physics phys{1.0, 0.0, 0.0};

  const Grid box = periodic_box(20.0, 200);
  const auto states = stationary_solve(PotentialConfig::free(box), {0.0, 1.2}, phys);
  if (states.empty()) throw AccuracyError("free box has no state below 1.2 m");
  out.push_back(make_check(s, "rest_energy_relative_error", std::abs(states.front().energy - phys.mass) / phys.mass,
                           Relation::at_most, 1e-8));

  const std::array<double, 4> flat{1.0, -1.0, -1.0, -1.0};
  double worst = 0.0;
  for (double m : {0.5, 1.0, 3.0}) {
    for (double p : {-2.0, 0.0, 0.3, 5.0}) {
      const double e = std::sqrt(p * p + m * m);
      const double r = hamilton_jacobi_pointwise(1.0, 0.0, vec(-e, p), flat, 0.0, m);
      worst = std::max(worst, std::abs(r) / std::max(1.0, e * e / m));
    }
  }
  out.push_back(make_check(s, "hj_plane_wave_analytic", worst, Relation::at_most, 1e-10));

  // Grid-sampled residual divided by h^2 must stay below C = 1.
  const double p = 0.9, e = std::sqrt(1.0 + p * p);
  double ratio = 0.0;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto n = static_cast<std::size_t>(std::llround(2.0 / h)) + 1;
    const Grid g = Grid::spacetime(0.0, h, n, -1.0, h, n);
    const MadelungPair mp = decompose(plane_wave(g, p, e));
    const auto res = hamilton_jacobi_residual(mp, RealField(g), MetricField::flat(g), 1.0);
    ratio = std::max(ratio, masked_max(res, nullptr, 0.0, 0) / (h * h));
  }
  out.push_back(make_check(s, "hj_plane_wave_grid_over_h2", ratio, Relation::at_most, 1.0));
  return out;
}

// ---- 2 ------------------------------------------------------------------------

ConvergenceStudy packet_convergence(int levels) {
  if (levels < 2) throw ConfigurationError("a refinement study needs at least 2 levels");
  const Physics phys{1.0, 0.0, 0.0};
  const double t_end = 2.0;
  ConvergenceStudy study;
  for (int level = 0; level < levels; ++level) {
    const std::size_t n = std::size_t{200} << level;
    const Grid g = periodic_box(20.0, n);
    const double h = g.space().spacing;
    const InitialData init = gaussian_packet(g, -2.0, 1.0, 1.0, phys);
    EvolveOptions opt;
    opt.dt = 0.5 * h;
    opt.snapshot_stride = 2;
    opt.steps = 2 * static_cast<std::size_t>(std::llround(t_end / h));
    const ComplexField psi = evolve(init.psi, init.psidot, PotentialConfig::free(g), phys, opt).field;
    const Grid& gt = psi.grid();

    const auto dens = density_equation_residual(psi, PotentialConfig::free(gt), vec(0.2, 0.8), phys);
    const MadelungPair mp = decompose(psi);
    const RealField cont = continuity_residual(mp, MetricField::flat(gt), phys.mass);
    const MaskedField<double> all{cont, std::vector<bool>(cont.size(), true)};
    // Near-nodes in the far tail make S ill-conditioned; the bulk is measured.
    study.rows.push_back({h, masked_max(dens, nullptr, 0.0, 2), masked_max(all, &mp.r, 0.01, 2)});
  }
  std::vector<double> hs, d, c;
  for (const auto& r : study.rows) {
    hs.push_back(r.h);
    d.push_back(r.density);
    c.push_back(r.continuity);
  }
  study.density_slope = numerics::loglog_slope(hs, d);
  study.continuity_slope = numerics::loglog_slope(hs, c);
  return study;
}

std::vector<CheckResult> derivation_closure(int levels, ConvergenceStudy* study) {
  const std::string s = "derivation-closure";
  std::vector<CheckResult> out;
  out.push_back(make_check(s, "refinement_levels", levels, Relation::at_least, 4.0));

  const ConvergenceStudy packet = packet_convergence(levels);
  out.push_back(make_check(s, "density_residual_order_evolved_packet", packet.density_slope, Relation::within, 0.2, 2.0));
  out.push_back(make_check(s, "continuity_order_evolved_packet", packet.continuity_slope, Relation::within, 0.2, 2.0));
  if (study) *study = packet;

  // Bound state of the eigen solver, expanded in time.
  const Physics phys{1.0, 0.0, 0.0};
  const double width = 8.0;
  auto well = [](double, double x) { return 0.3 * std::exp(-x * x); };
  std::vector<double> hs, errs;
  for (int level = 0; level < levels; ++level) {
    const std::size_t n = (std::size_t{40} << level) + 1;
    const double h = width / static_cast<double>(n - 1);
    const Grid g = Grid::spatial(-0.5 * width, h, n);
    const auto states =
        stationary_solve(PotentialConfig::scalar(RealField::sample(g, well)), {0.0, 1.0}, phys, Boundary::dirichlet);
    if (states.empty()) throw AccuracyError("Gaussian well lost its bound state");
    const std::size_t nt = static_cast<std::size_t>(std::llround(2.0 / h)) + 1;
    const ComplexField psi = expand_stationary(states.front(), Axis{AxisKind::t, 0.0, h, nt});
    const PotentialConfig pot = PotentialConfig::scalar(RealField::sample(psi.grid(), well));
    hs.push_back(h);
    errs.push_back(masked_max(density_equation_residual(psi, pot, vec(0.4, 0.8), phys), nullptr, 0.0, 2));
  }
  out.push_back(make_check(s, "density_residual_order_bound_state", numerics::loglog_slope(hs, errs), Relation::within,
                           0.2, 2.0));
  return out;
}

// ---- 3 ------------------------------------------------------------------------

std::vector<CheckResult> transform_positivity(std::uint64_t seed) {
  const std::string s = "transform-positivity";
  std::vector<CheckResult> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double min_real = inf, max_imag = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<GaussianComponent> comps;
    const int n = 1 + static_cast<int>(u(rng) * 4);
    for (int k = 0; k < n; ++k) {
      const double w = u(rng), x0 = 4.0 * u(rng) - 2.0, sx = 0.1 + u(rng);
      const double p0 = 1.0 + u(rng), p1 = 2.0 * u(rng) - 1.0, sp = 0.05 + u(rng);
      comps.push_back(component(w, x0, sx, p0, p1, sp));
    }
    const GaussianCarrier F(comps);
    const double x = 6.0 * u(rng) - 3.0;
    const complex v = wigner_moyal_transform(F, vec(0.0, x), FourVector{});
    min_real = std::min(min_real, v.real());
    max_imag = std::max(max_imag, std::abs(v.imag()));
  }
  out.push_back(make_check(s, "min_real_part_1000_mixtures", min_real, Relation::at_least, -1e-12));
  out.push_back(make_check(s, "max_imag_part_1000_mixtures", max_imag, Relation::at_most, 1e-12));

  double err = 0.0;
  for (double pbar : {0.0, 0.3, -1.1}) {
    const double sp = 0.6;
    const GaussianCarrier F({component(1.0, 0.0, 1.0, 1.0, pbar, sp)});
    for (double d : {0.0, 0.2, 0.9, 2.5}) {
      const FourVector x = vec(0.0, 0.3);
      const complex got = wigner_moyal_transform(F, x, vec(0.0, d));
      err = std::max(err, std::abs(got - F.marginal(x) * momentum_integral(pbar, sp, d)));
    }
  }
  out.push_back(make_check(s, "gaussian_closed_form_max_error", err, Relation::at_most, 1e-8));
  return out;
}

// ---- 4 ------------------------------------------------------------------------

std::vector<CheckResult> operator_correspondence() {
  const std::string s = "operator-correspondence";
  std::vector<CheckResult> out;
  {
    GaussianComponent c = component(1.0, 0.2, 0.8, 1.0, 0.3, 0.5);
    c.sigma_x[0] = 1.0;  // localized in t so the time integral converges
    const GaussianCarrier F({c});
    const Grid g = Grid::spacetime(-4.0, 0.1, 81, -8.0, 0.05, 321);
    const auto rho = [&](double t, double x, const FourVector& d) { return wigner_moyal_transform(F, vec(t, x), d); };
    const MeanMomentum mm = mean_momentum_from_density(rho, g);
    const FourVector direct = direct_momentum_moment(F, g);
    double rel = 0.0;
    for (std::size_t mu = 0; mu < 2; ++mu) rel = std::max(rel, std::abs(mm.value[mu] - direct[mu]) / std::abs(direct[mu]));
    out.push_back(make_check(s, "mean_momentum_gaussian_relative", rel, Relation::at_most, 1e-6));
  }
  {
    const double pbar = 0.3;
    const Grid g = Grid::spatial(-6.0, 0.1, 121);
    const Axis pax{AxisKind::x, pbar - 4.0, 0.01, 801};
    const SampledDistribution F(PhaseSpaceSamples::sample(g, pax, 1.0, [&](double, double x, double p) {
      return GaussianCarrier::normal(x, 0.0, 1.0) * GaussianCarrier::normal(p, pbar, 0.4);
    }));
    const auto rho = [&](double t, double x, const FourVector& d) { return wigner_moyal_transform(F, vec(t, x), d); };
    const MeanMomentum mm = mean_momentum_from_density(rho, g);
    const FourVector direct = direct_momentum_moment(F);
    out.push_back(make_check(s, "mean_momentum_sampled_relative", std::abs(mm.value[1] - direct[1]) / std::abs(direct[1]),
                             Relation::at_most, 1e-6));
  }
  {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Grid g = Grid::spacetime(0.0, 0.05, 41, -5.0, 0.05, 201);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const double p = u(rng), w = 1.0 + 0.5 * u(rng), m = 1.0 + 0.5 * u(rng);
      const ComplexField psi = ComplexField::sample(g, [&](double t, double x) {
        return std::polar(std::exp(-w * x * x), p * x - std::sqrt(p * p + m * m) * t + 0.1 * x * x);
      });
      const MeanFourMomentum mf = mean_four_momentum_amplitude(psi, m);
      for (std::size_t mu = 0; mu < 2; ++mu) {
        worst = std::max(worst, std::abs(mf.value[mu] - mf.via_current[mu]) / std::max(1.0, std::abs(mf.value[mu])));
      }
    }
    out.push_back(make_check(s, "four_momentum_equals_m_int_j", worst, Relation::at_most, 1e-10));
  }
  return out;
}

// ---- 5 ------------------------------------------------------------------------

std::vector<CheckResult> nonrelativistic_limit() {
  const std::string s = "nonrelativistic-limit";
  const Physics phys{1.0, 0.0, 0.0};
  const Grid g = periodic_box(400.0, 800);
  // Mean momentum 0.01 m, i.e. v/c = 1e-2.
  const InitialData init = gaussian_packet(g, 0.0, 0.01, 40.0, phys);
  EvolveOptions opt;
  opt.dt = 0.01;
  opt.steps = 8;
  const ComplexField psi = evolve(init.psi, init.psidot, PotentialConfig::free(g), phys, opt).field;
  const ProbabilityDensity d = probability_density(four_current(psi, phys.mass), Branch::particle);
  // Interior rows only: the end rows use one-sided time differences.
  double worst = 0.0;
  for (std::size_t it = 1; it + 1 < psi.grid().nt(); ++it) {
    double dev = 0.0, peak = 0.0;
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      const std::size_t k = psi.grid().index(it, ix);
      dev = std::max(dev, std::abs(d.p[k] - std::norm(psi[k])));
      peak = std::max(peak, std::norm(psi[k]));
    }
    worst = std::max(worst, dev / peak);
  }
  return {make_check(s, "max_density_deviation_over_peak", worst, Relation::at_most, 1e-3)};
}

// ---- 6 ------------------------------------------------------------------------

std::vector<CheckResult> branch_normalization() {
  const std::string s = "branch-normalization";
  const Physics phys{1.0, 0.0, 0.0};
  const double length = 10.0, p = 2.0 * pi * 2.0 / length, e = std::sqrt(1.0 + p * p);
  const Grid g = periodic_box(length, 200);
  const double h = g.space().spacing;
  // Negative-energy wave exp(i (p x + E t)).
  const ComplexField psi0 = plane_wave(g, p, 0.0);
  const ComplexField rate = psi0.map([&](const complex& z) { return complex(0.0, e) * z; });
  EvolveOptions opt;
  opt.dt = 0.5 * h;
  opt.steps = 400;
  opt.snapshot_stride = 2;
  EvolutionHistory hist = evolve(psi0, rate, PotentialConfig::free(g), phys, opt);

  // Normalize by the conserved discrete charge, then follow it over the run.
  const double q0 = hist.charge.front();
  const double scale = 1.0 / std::sqrt(std::abs(q0));
  for (std::size_t i = 0; i < hist.field.size(); ++i) hist.field[i] *= scale;
  const ProbabilityDensity d = probability_density(four_current(hist.field, phys.mass), Branch::antiparticle);
  double min_p = inf;
  for (double v : d.p.values()) min_p = std::min(min_p, v);
  double drift = 0.0;
  for (double q : hist.charge) drift = std::max(drift, std::abs(-q / std::abs(q0) - 1.0));
  return {make_check(s, "min_P_antiparticle_branch", min_p, Relation::greater_than, 0.0),
          make_check(s, "branch_mismatch", d.branch_mismatch ? 1.0 : 0.0, Relation::at_most, 0.0),
          make_check(s, "int_P_minus_one_over_run", drift, Relation::at_most, 1e-6)};
}

// ---- 7 ------------------------------------------------------------------------

std::vector<CheckResult> expansion_order() {
  const std::string s = "expansion-order";
  std::vector<CheckResult> out;
  {
    const double a = 0.7, b = 0.4, x0 = 0.3;
    auto psi = [&](double x) { return std::polar(std::exp(-x * x), a * x + b * x * x * x); };
    LocalJet jet;
    jet.r = std::exp(-x0 * x0);
    jet.dr[1] = -2.0 * x0 * jet.r;
    jet.ddr[1][1] = (4.0 * x0 * x0 - 2.0) * jet.r;
    jet.ds[1] = a + 3.0 * b * x0 * x0;
    std::vector<double> ds, errs;
    for (double d = 0.2; d > 0.01; d *= 0.5) {
      ds.push_back(d);
      errs.push_back(expansion_error(jet, vec(0.0, d), std::conj(psi(x0 - 0.5 * d)) * psi(x0 + 0.5 * d)));
    }
    out.push_back(make_check(s, "slope_analytic_jet", numerics::loglog_slope(ds, errs), Relation::within, 0.3, 3.0));
  }
  {
    const double h = 0.0025;
    const Grid g = Grid::spacetime(0.0, h, 321, -0.4, h, 321);
    const ComplexField psi = ComplexField::sample(g, [](double t, double x) {
      return std::polar(std::exp(-x * x - 0.5 * t * t), 0.7 * x + 0.4 * x * x * x - 1.2 * t - 0.3 * t * t * t);
    });
    const MadelungPair mp = decompose(psi);
    std::vector<double> ds, errs;
    for (long k : {4L, 8L, 16L, 32L}) {
      const double d = 2.0 * h * static_cast<double>(k);
      ds.push_back(d);
      errs.push_back(expansion_check(mp, {160, 160}, vec(0.5 * d, d)));
    }
    out.push_back(make_check(s, "slope_grid_field", numerics::loglog_slope(ds, errs), Relation::within, 0.3, 3.0));
  }
  return out;
}

// ---- 8 ------------------------------------------------------------------------

std::vector<CheckResult> trajectories() {
  const std::string s = "trajectories";
  std::vector<CheckResult> out;
  {
    const double p = 0.6, e = std::sqrt(1.0 + p * p), m = 1.0;
    const Grid g = Grid::spacetime(0.0, 0.05, 81, -2.0, 0.05, 81);
    TrajectoryOptions opt;
    opt.tau_span = 1.0;
    opt.dtau = 0.01;
    const FourVector x0 = vec(0.5, -1.0);
    const TrajectoryPath path = integrate_trajectory(x0, decompose(plane_wave(g, p, e)), RealField(g), m, opt);
    double dev = path.exited_grid || path.states.size() != 101 ? inf : 0.0;
    for (const auto& st : path.states) {
      dev = std::max({dev, std::abs(st.x[0] - (x0[0] + e * st.tau / m)), std::abs(st.x[1] - (x0[1] + p * st.tau / m)),
                      std::abs(st.p[0] - e), std::abs(st.p[1] - p)});
    }
    out.push_back(make_check(s, "plane_wave_straight_line_deviation", dev, Relation::at_most, 1e-9));
  }
  // |p - guidance| / (dtau^4 + h^2) must stay below C = 1.
  auto consistency = [](const TrajectoryPath& path, const MadelungPair& mp, double dtau, double h) {
    if (path.node_crossing || path.states.size() < 10) return inf;
    double worst = 0.0;
    for (const auto& st : path.states) {
      const auto guide = guidance_momentum(mp, st.x);
      if (!guide) return inf;
      for (std::size_t mu = 0; mu < 2; ++mu) worst = std::max(worst, std::abs(st.p[mu] - (*guide)[mu]));
    }
    return worst / (std::pow(dtau, 4) + h * h);
  };
  {
    const Physics phys{1.0, 0.0, 0.0};
    const double h = 0.05, dtau = 0.05;
    const Grid g = Grid::spatial(-6.0, h, 241);
    const RealField v = RealField::sample(g, [](double, double x) { return 0.3 * std::exp(-x * x); });
    const auto states = stationary_solve(PotentialConfig::scalar(v), {0.0, 1.0}, phys, Boundary::dirichlet);
    if (states.empty()) throw AccuracyError("Gaussian well lost its bound state");
    MadelungPair mp = decompose(states.front().profile);
    mp.stationary_energy = states.front().energy;
    TrajectoryOptions opt;
    opt.tau_span = 3.0;
    opt.dtau = dtau;
    const TrajectoryPath path = integrate_trajectory(vec(0.0, 0.7), mp, v, 1.0, opt);
    out.push_back(make_check(s, "bohmian_bound_state_over_dtau4_h2", consistency(path, mp, dtau, h), Relation::at_most, 1.0));
  }
  {
    const double length = 10.0, p = 2.0 * pi * 2.0 / length, e = std::sqrt(1.0 + p * p), dtau = 0.05;
    const Grid g = periodic_box(length, 200);
    MadelungPair mp = decompose(plane_wave(g, p, 0.0));
    mp.stationary_energy = e;
    TrajectoryOptions opt;
    opt.tau_span = 2.0;
    opt.dtau = dtau;
    const TrajectoryPath path = integrate_trajectory(vec(0.0, -3.0), mp, RealField(g), 1.0, opt);
    out.push_back(make_check(s, "bohmian_moving_state_over_dtau4_h2", consistency(path, mp, dtau, g.space().spacing),
                             Relation::at_most, 1.0));
  }
  return out;
}

// ---- 9 ------------------------------------------------------------------------

std::vector<CheckResult> gravity_coupling() {
  const std::string s = "gravity-coupling";
  std::vector<CheckResult> out;
  {
    const GravityConfig cfg = gravity_fixture(0.0);
    const CoupledResult res = coupled_solve(cfg);
    const Grid& g = res.metric.grid();
    const RealField v = RealField::sample(g, [&](double, double r) { return cfg.potential(r); });
    const auto flat = covariant_stationary_solve(MetricField::flat(g), v, cfg.mass);
    if (!flat.ground) throw AccuracyError("flat reference has no bound state");
    double metric_dev = 0.0;
    const std::array<double, 4> eta{1.0, -1.0, -1.0, -1.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t mu = 0; mu < 4; ++mu) metric_dev = std::max(metric_dev, std::abs(res.metric.g(mu, i) - eta[mu]));
    }
    const double state_dev =
        std::max(std::abs(res.energy - flat.ground->energy), max_abs_diff(res.state.r.values(), flat.ground->state.r.values()));
    out.push_back(make_check(s, "G0_metric_deviation", metric_dev, Relation::at_most, 1e-8));
    out.push_back(make_check(s, "G0_state_deviation", state_dev, Relation::at_most, 1e-8));
  }
  {
    const CoupledResult res = coupled_solve(gravity_fixture(1e-3));
    out.push_back(make_check(s, "G1e-3_converged", res.converged ? 1.0 : 0.0, Relation::at_least, 1.0));
    out.push_back(make_check(s, "G1e-3_iterations", static_cast<double>(res.trace.size()), Relation::at_most, 50.0));
    out.push_back(make_check(s, "G1e-3_state_residual", res.trace.back().state_residual, Relation::at_most, 1e-8));
    out.push_back(make_check(s, "G1e-3_field_residual", res.trace.back().field_residual, Relation::at_most, 1e-8));
  }
  {
    GravityConfig a = gravity_fixture(1e-3), b = gravity_fixture(1e-3);
    a.relaxation = 0.5;
    b.relaxation = 1.0;
    const CoupledResult ra = coupled_solve(a);
    const CoupledResult rb = coupled_solve(b);
    const double dev = std::max(std::abs(ra.energy - rb.energy), max_abs_diff(ra.phi.values(), rb.phi.values()));
    out.push_back(make_check(s, "relaxation_invariance", ra.converged && rb.converged ? dev : inf,
                             Relation::at_most, 1e-7));
  }
  {
    const double a = 2.0, big_m = 1.0, newton_g = 0.7;
    const Grid g = Grid::radial(0.05, 200);
    const double rho0 = big_m / (4.0 * pi / 3.0 * a * a * a);
    const RealField rho = RealField::sample(g, [&](double, double r) { return r < a ? rho0 : 0.0; });
    const RealField phi = solve_potential_weak_field(StressTensor::dust(rho), newton_g);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = g.x(i);
      const double want = r < a ? -newton_g * big_m * (3.0 * a * a - r * r) / (2.0 * a * a * a) : -newton_g * big_m / r;
      err = std::max(err, std::abs(phi[i] - want));
    }
    out.push_back(make_check(s, "uniform_ball_potential_error", err, Relation::at_most, 1e-6));
  }
  return out;
}

std::vector<CheckResult> run_suite(int criterion, int levels, std::uint64_t seed, ConvergenceStudy* study) {
  const auto& all = suites();
  const auto it = std::find_if(all.begin(), all.end(), [&](const Suite& s) { return s.criterion == criterion; });
  if (it == all.end()) throw ConfigurationError("no suite for criterion " + std::to_string(criterion));
  const auto start = std::chrono::steady_clock::now();
  std::vector<CheckResult> out;
  try {
    switch (criterion) {
      case 1: out = mass_shell(); break;
      case 2: out = derivation_closure(levels, study); break;
      case 3: out = transform_positivity(seed); break;
      case 4: out = operator_correspondence(); break;
      case 5: out = nonrelativistic_limit(); break;
      case 6: out = branch_normalization(); break;
      case 7: out = expansion_order(); break;
      case 8: out = trajectories(); break;
      case 9: out = gravity_coupling(); break;
    }
  } catch (const Error& e) {
    CheckResult c = make_check(it->name, "completed", 0.0, Relation::at_least, 1.0);
    c.note = e.what();
    out.push_back(std::move(c));
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto& c : out) c.seconds = seconds;
  CheckResult rt = make_check(it->name, "runtime_seconds", seconds, Relation::at_most, it->budget_seconds);
  rt.seconds = seconds;
  out.push_back(std::move(rt));
  return out;
}

}  // namespace relqm::checks
