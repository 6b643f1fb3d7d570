#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "relqm/field_solver.hpp"
#include "relqm/gravity.hpp"

using namespace relqm;

namespace {

constexpr double pi = std::numbers::pi;

GravityConfig small_config(double newton_g) {
  GravityConfig cfg;
  cfg.newton_g = newton_g;
  cfg.mass = 1.0;
  cfg.boundary_radius = 10.0;
  cfg.cells = 100;
  cfg.potential = [](double r) { return 0.3 * std::exp(-r * r); };
  return cfg;
}

MadelungPair static_state(const RealField& r, double energy) {
  return MadelungPair{r, RealField(r.grid()), std::vector<bool>(r.size(), false), energy};
}

}  // namespace

// ---- stress tensor -------------------------------------------------------

TEST(MatterTensor, RestStateIsDust) {
  const Grid g = Grid::radial(0.1, 20);
  const RealField r = RealField::sample(g, [](double, double x) { return std::exp(-x); });
  const double m = 2.0;
  const StressTensor t = matter_tensor(static_state(r, m), m).tensor();
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_DOUBLE_EQ(t.diag[0][i], m * r[i] * r[i]);
    for (std::size_t mu = 1; mu < 4; ++mu) EXPECT_EQ(t.diag[mu][i], 0.0);
    EXPECT_EQ(t.t01[i], 0.0);
  }
}

TEST(MatterTensor, StaticStateEnergyDensity) {
  const Grid g = Grid::radial(0.1, 20);
  const RealField r = RealField::sample(g, [](double, double x) { return x < 1.0 ? 0.0 : 1.0 / x; });
  const double m = 1.0, e = 0.9;
  const QuantumStressTensor q = matter_tensor(static_state(r, e), m);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_DOUBLE_EQ(q.component(0, 0, i), r[i] * r[i] * e * e / m);
    EXPECT_EQ(q.component(0, 1, i), 0.0);
    if (r[i] == 0.0) {
      EXPECT_EQ(q.component(0, 0, i), 0.0);
    }
  }
}

TEST(MatterTensor, SymmetricAndRankOne) {
  const Grid g = Grid::spacetime(0.0, 0.1, 9, -1.0, 0.1, 21);
  const ComplexField psi = ComplexField::sample(g, [](double t, double x) {
    return std::polar(std::exp(-x * x), 0.8 * x + 0.1 * x * x - 1.3 * t);
  });
  const QuantumStressTensor q = matter_tensor(decompose(psi), 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t mu = 0; mu < 4; ++mu) {
      for (std::size_t nu = 0; nu < 4; ++nu) EXPECT_EQ(q.component(mu, nu, i), q.component(nu, mu, i));
    }
    const double t00 = q.component(0, 0, i), t11 = q.component(1, 1, i), t01 = q.component(0, 1, i);
    EXPECT_LE(std::abs(t00 * t11 - t01 * t01), 1e-14 * std::max(1e-300, t00 * t11));
  }
}

// ---- weak-field metric ---------------------------------------------------

TEST(WeakField, NoSourceIsExactlyFlat) {
  const Grid g = Grid::radial(0.1, 50);
  const MetricField m = solve_metric_weak_field(StressTensor(g), 1.0);
  EXPECT_TRUE(m.is_flat());
}

TEST(WeakField, UniformBallMatchesClosedForm) {
  const double a = 2.0, big_m = 1.0, newton_g = 0.7;
  const Grid g = Grid::radial(0.05, 200);
  const double rho0 = big_m / (4.0 * pi / 3.0 * a * a * a);
  const RealField rho = RealField::sample(g, [&](double, double r) { return r < a ? rho0 : 0.0; });
  const RealField phi = solve_potential_weak_field(StressTensor::dust(rho), newton_g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.x(i);
    const double want =
        r < a ? -newton_g * big_m * (3.0 * a * a - r * r) / (2.0 * a * a * a) : -newton_g * big_m / r;
    EXPECT_NEAR(phi[i], want, 1e-6) << r;
  }
}

TEST(WeakField, PointLikeGaussianFollowsGaussLaw) {
  const double sigma = 0.4, big_m = 2.0, newton_g = 1.0;
  const Grid g = Grid::radial(0.02, 500);
  const double norm = big_m / std::pow(2.0 * pi * sigma * sigma, 1.5);
  const RealField rho =
      RealField::sample(g, [&](double, double r) { return norm * std::exp(-r * r / (2.0 * sigma * sigma)); });
  const RealField phi = solve_potential_weak_field(StressTensor::dust(rho), newton_g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.x(i);
    if (r < 3.0 * sigma) continue;
    EXPECT_NEAR(phi[i], -newton_g * big_m / r, 0.01 * newton_g * big_m / r) << r;
  }
}

TEST(WeakField, DiscreteLaplacianReproducesSource) {
  // nabla^2 Phi = 4 pi G rho for a smooth source, to second order.
  const double newton_g = 1.0;
  std::vector<double> hs, errs;
  for (std::size_t n : {100u, 200u, 400u, 800u}) {
    const Grid g = Grid::radial(8.0 / static_cast<double>(n), n);
    const RealField rho = RealField::sample(g, [](double, double r) { return std::exp(-r * r); });
    const RealField phi = solve_potential_weak_field(StressTensor::dust(rho), newton_g);
    const RealField lap = dalembertian(phi, MetricField::flat(g));  // = -nabla^2 Phi
    // Fixed band away from the origin, where the flux form has an O(h^2/r^2) error.
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (g.x(i) < 0.5 || g.x(i) > 6.0) continue;
      err = std::max(err, std::abs(-lap[i] - 4.0 * pi * newton_g * rho[i]));
    }
    hs.push_back(g.space().spacing);
    errs.push_back(err);
  }
  EXPECT_NEAR(numerics::loglog_slope(hs, errs), 2.0, 0.2);
}

TEST(WeakField, PressureEntersTheSource) {
  const Grid g = Grid::radial(0.05, 200);
  StressTensor dust(g), fluid(g);
  for (std::size_t i = 0; i < 40; ++i) {
    dust.diag[0][i] = 1.0;
    fluid.diag[0][i] = 0.5;
    for (std::size_t k = 1; k < 4; ++k) fluid.diag[k][i] = 0.5 / 3.0;
  }
  const RealField a = solve_potential_weak_field(dust, 1.0);
  const RealField b = solve_potential_weak_field(fluid, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(WeakField, NonStaticSourceRejected) {
  const Grid g = Grid::radial(0.1, 50);
  StressTensor t(g);
  t.diag[0][3] = 1.0;
  t.t01[3] = 0.2;
  EXPECT_THROW(solve_metric_weak_field(t, 1.0), ConfigurationError);
}

TEST(WeakField, UndecayedSourceRejected) {
  const Grid g = Grid::radial(0.1, 50);
  EXPECT_THROW(solve_metric_weak_field(StressTensor::dust(RealField(g, 1.0)), 1.0), BoundaryConditionError);
}

TEST(WeakField, NeedsRadialGrid) {
  const Grid g = Grid::spatial(0.0, 0.1, 50);
  EXPECT_THROW(solve_metric_weak_field(StressTensor(g), 1.0), DomainError);
}

// ---- covariant stationary solve ----------------------------------------------

TEST(CovariantSolve, FlatBallGroundState) {
  // u = r R obeys -u'' = k^2 u with u(0) = u(R_b) = 0: k = pi / R_b.
  const double m = 1.0, rb = 5.0;
  std::vector<double> hs, errs;
  for (std::size_t n : {50u, 100u, 200u, 400u}) {
    const Grid g = Grid::radial(rb / static_cast<double>(n), n);
    const auto res = covariant_stationary_solve(MetricField::flat(g), RealField(g), m);
    ASSERT_TRUE(res.ground.has_value());
    EXPECT_LE(res.ground->residual, 1e-8);
    hs.push_back(g.space().spacing);
    errs.push_back(std::abs(res.ground->energy - std::sqrt(m * m + pi * pi / (rb * rb))));
  }
  EXPECT_NEAR(numerics::loglog_slope(hs, errs), 2.0, 0.2);
}

TEST(CovariantSolve, MatchesOddStateOfTheLineSolver) {
  // The s-wave u = r R on [0, R_b] is the odd state of a line box [-R_b, R_b].
  const Physics phys{1.0, 0.0, 0.0};
  const double rb = 5.0, h = 0.025;
  const auto n = static_cast<std::size_t>(std::llround(rb / h));
  const Grid radial = Grid::radial(h, n);
  const auto cov = covariant_stationary_solve(MetricField::flat(radial), RealField(radial), phys.mass);
  ASSERT_TRUE(cov.ground.has_value());
  const Grid line = Grid::spatial(-rb, h, 2 * n + 1);
  const auto states = stationary_solve(PotentialConfig::free(line), {0.0, 1.2}, phys, Boundary::dirichlet);
  ASSERT_GE(states.size(), 2u);
  EXPECT_NEAR(cov.ground->energy, states[1].energy, 10.0 * h * h);
}

TEST(CovariantSolve, ConstantPotentialRescalesDiscreteSpectrum) {
  const double m = 1.0, phi0 = -2e-3;
  const Grid g = Grid::radial(0.05, 200);
  const auto flat = covariant_stationary_solve(MetricField::flat(g), RealField(g), m);
  const auto curved = covariant_stationary_solve(MetricField::weak_field(RealField(g, phi0)), RealField(g), m);
  ASSERT_TRUE(flat.ground && curved.ground);
  const double ef = flat.ground->energy;
  // Constant metric: L -> L / (1 - 2 Phi0), E^2 -> g_00 (lambda_L / (1 - 2 Phi0) + m^2).
  const double lam = ef * ef - m * m;
  const double want = std::sqrt((1.0 + 2.0 * phi0) * (lam / (1.0 - 2.0 * phi0) + m * m));
  EXPECT_NEAR(curved.ground->energy, want, 1e-12);
  // Gravitational redshift of the rest energy.
  EXPECT_NEAR(curved.ground->energy - ef, m * phi0, 4.0 * phi0 * phi0 + 2.0 * std::abs(phi0) * lam);
}

TEST(CovariantSolve, ResidualReproducesStatisticalPotential) {
  const double m = 1.0, e = 0.95;
  const Grid g = Grid::radial(0.05, 100);
  const RealField v = RealField::sample(g, [](double, double r) { return 0.2 * std::exp(-r * r); });
  const RealField r = RealField::sample(g, [](double, double x) { return std::exp(-0.5 * x * x); });
  const MetricField flat = MetricField::flat(g);
  const RealField res = covariant_residual(flat, v, m, r, e);
  const MaskedField<double> q = quantum_potential(static_state(r, e), flat, m);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double from_residual = -(res[i] / r[i] - m * m + 2.0 * m * v[i] + e * e) / (2.0 * m);
    EXPECT_NEAR(from_residual, q.values[i], 1e-10 * (1.0 + std::abs(q.values[i])));
  }
}

TEST(CovariantSolve, NoBoundStateGivesDiagnostic) {
  const Grid g = Grid::radial(0.1, 50);
  const auto res = covariant_stationary_solve(MetricField::flat(g), RealField(g, 5.0), 1.0);
  EXPECT_FALSE(res.ground.has_value());
  EXPECT_FALSE(res.diagnostic.empty());
}

// ---- coupled fixed point --------------------------------------------------------

TEST(CoupledSolve, ZeroCouplingIsFlatInOneIteration) {
  const GravityConfig cfg = small_config(0.0);
  const CoupledResult res = coupled_solve(cfg);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.trace.size(), 1u);
  EXPECT_TRUE(res.metric.is_flat());
  const Grid g = res.metric.grid();
  const RealField v = RealField::sample(g, [&](double, double r) { return cfg.potential(r); });
  const auto flat = covariant_stationary_solve(MetricField::flat(g), v, cfg.mass);
  ASSERT_TRUE(flat.ground.has_value());
  EXPECT_NEAR(res.energy, flat.ground->energy, 1e-8);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(res.state.r[i], flat.ground->state.r[i], 1e-8);
}

TEST(CoupledSolve, WeakCouplingConverges) {
  const CoupledResult zero = coupled_solve(small_config(0.0));
  const CoupledResult res = coupled_solve(small_config(1e-3));
  ASSERT_TRUE(res.converged);
  EXPECT_LE(res.trace.size(), 50u);
  EXPECT_LE(res.trace.back().state_residual, 1e-8);
  EXPECT_LE(res.trace.back().field_residual, 1e-8);
  EXPECT_FALSE(res.metric.is_flat());
  EXPECT_LT(res.energy, zero.energy);
  for (std::size_t i = 0; i < res.phi.size(); ++i) EXPECT_LT(res.phi[i], 0.0);
}

TEST(CoupledSolve, FixedPointIndependentOfRelaxation) {
  GravityConfig a = small_config(1e-3), b = small_config(1e-3);
  a.relaxation = 0.5;
  b.relaxation = 1.0;
  const CoupledResult ra = coupled_solve(a);
  const CoupledResult rb = coupled_solve(b);
  ASSERT_TRUE(ra.converged && rb.converged);
  EXPECT_NEAR(ra.energy, rb.energy, 1e-7);
  for (std::size_t i = 0; i < ra.phi.size(); ++i) EXPECT_NEAR(ra.phi[i], rb.phi[i], 1e-7);
}

TEST(CoupledSolve, SolutionSatisfiesCovariantHamiltonJacobiAndContinuity) {
  const GravityConfig cfg = small_config(1e-3);
  const CoupledResult res = coupled_solve(cfg);
  ASSERT_TRUE(res.converged);
  const Grid& g = res.metric.grid();
  const RealField v = RealField::sample(g, [&](double, double r) { return cfg.potential(r); });
  const auto hj = hamilton_jacobi_residual(res.state, v, res.metric, cfg.mass);
  double rmax = 0.0;
  for (double r : res.state.r.values()) rmax = std::max(rmax, r);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    if (res.state.r[i] > 1e-3 * rmax) {
      EXPECT_LT(std::abs(hj.values[i]), 1e-8) << i;
    }
  }
  const RealField cont = continuity_residual(res.state, res.metric, cfg.mass);
  for (double c : cont.values()) EXPECT_EQ(c, 0.0);
}

TEST(CoupledSolve, IterationLimitFlagsPartialResult) {
  GravityConfig cfg = small_config(1e-3);
  cfg.max_iterations = 2;
  const CoupledResult res = coupled_solve(cfg);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.trace.size(), 2u);
}

TEST(CoupledSolve, StrongCouplingReportsNonconvergence) {
  GravityConfig cfg = small_config(50.0);
  cfg.relaxation = 1.0;
  try {
    coupled_solve(cfg);
    FAIL() << "expected NonconvergenceError";
  } catch (const NonconvergenceError& e) {
    EXPECT_FALSE(e.trace().empty());
  }
}

TEST(CoupledSolve, GrowingUpdatesRaiseWithTrace) {
  GravityConfig cfg = small_config(1.2);
  cfg.relaxation = 1.0;
  try {
    coupled_solve(cfg);
    FAIL() << "expected NonconvergenceError";
  } catch (const NonconvergenceError& e) {
    const auto& t = e.trace();
    ASSERT_GE(t.size(), 4u);
    const std::size_t n = t.size();
    EXPECT_GT(t[n - 1], t[n - 2]);
    EXPECT_GT(t[n - 2], t[n - 3]);
    EXPECT_GT(t[n - 3], t[n - 4]);
  }
}

TEST(CoupledSolve, RejectsBadConfig) {
  GravityConfig cfg = small_config(1e-3);
  cfg.relaxation = 0.0;
  EXPECT_THROW(coupled_solve(cfg), ConfigurationError);
  cfg = small_config(-1.0);
  EXPECT_THROW(coupled_solve(cfg), ConfigurationError);
  cfg = small_config(1e-3);
  cfg.tolerance = 0.0;
  EXPECT_THROW(coupled_solve(cfg), ConfigurationError);
}

TEST(CoupledSolve, Deterministic) {
  const CoupledResult a = coupled_solve(small_config(1e-3));
  const CoupledResult b = coupled_solve(small_config(1e-3));
  EXPECT_EQ(a.energy, b.energy);
  EXPECT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.phi.size(); ++i) EXPECT_EQ(a.phi[i], b.phi[i]);
}
