#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "relqm/field_solver.hpp"
#include "relqm/madelung.hpp"

using namespace relqm;

namespace {

constexpr double pi = std::numbers::pi;

Grid periodic_box(double length, std::size_t n) {
  const double h = length / static_cast<double>(n);
  return Grid::spatial(-0.5 * length, h, n);
}

FourVector vec(double t, double x) {
  FourVector v;
  v[0] = t;
  v[1] = x;
  return v;
}

// Largest |value| over valid points whose amplitude exceeds frac * max R,
// at least `collar` cells from every edge.
double masked_max(const MaskedField<double>& f, const RealField& r, double frac = 0.0, std::size_t collar = 2) {
  const Grid& g = r.grid();
  double rmax = 0.0;
  for (double v : r.values()) rmax = std::max(rmax, v);
  double out = 0.0;
  const std::size_t ct = g.has_time() ? collar : 0;
  for (std::size_t it = ct; it + ct < g.nt(); ++it) {
    for (std::size_t ix = collar; ix + collar < g.nx(); ++ix) {
      const std::size_t k = g.index(it, ix);
      if (f.valid[k] && r[k] > frac * rmax) out = std::max(out, std::abs(f.values[k]));
    }
  }
  return out;
}

// Free Gaussian packet evolved to t_end with dt = h/2, stored every h.
ComplexField evolved_packet(std::size_t n, double t_end) {
  const Physics phys{1.0, 0.0, 0.0};
  const Grid g = periodic_box(20.0, n);
  const double h = g.space().spacing;
  const InitialData init = gaussian_packet(g, -2.0, 1.0, 1.0, phys);
  EvolveOptions opt;
  opt.dt = 0.5 * h;
  opt.snapshot_stride = 2;
  opt.steps = 2 * static_cast<std::size_t>(std::llround(t_end / h));
  return evolve(init.psi, init.psidot, PotentialConfig::free(g), phys, opt).field;
}

}  // namespace

// ---- decompose / recompose -----------------------------------------------

TEST(Decompose, PlaneWavePhaseIsLinear) {
  const double p = 1.3;
  const Grid g = Grid::spatial(-10.0, 0.05, 401);
  const MadelungPair mp = decompose(plane_wave(g, p, 0.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(mp.r[i], 1.0, 1e-15);
    EXPECT_NEAR(mp.s[i] - mp.s[0], p * (g.x(i) - g.x(0)), 1e-11);
  }
}

TEST(Decompose, SpacetimePlaneWaveUnwrapsAcrossRows) {
  const double p = 0.8, e = std::sqrt(1.0 + p * p);
  const Grid g = Grid::spacetime(0.0, 0.05, 101, -5.0, 0.05, 201);
  const MadelungPair mp = decompose(plane_wave(g, p, e));
  const double s00 = mp.s(0, 0);
  for (std::size_t it = 0; it < g.nt(); ++it) {
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      EXPECT_NEAR(mp.s(it, ix) - s00, p * (g.x(ix) - g.x(0)) - e * g.t(it), 1e-10);
    }
  }
}

TEST(Decompose, RealGaussianHasZeroPhase) {
  const Grid g = Grid::spatial(-5.0, 0.1, 101);
  const ComplexField psi = ComplexField::sample(g, [](double, double x) { return complex(std::exp(-x * x), 0.0); });
  const MadelungPair mp = decompose(psi);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(mp.s[i], 0.0);
    EXPECT_EQ(mp.r[i], std::exp(-g.x(i) * g.x(i)));
  }
}

TEST(Decompose, ConstantPhaseQuarterTurn) {
  const Grid g = Grid::spatial(0.0, 0.1, 16);
  const ComplexField psi(g, complex(1.0, 1.0) / std::sqrt(2.0));
  const MadelungPair mp = decompose(psi);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(mp.r[i], 1.0, 1e-15);
    EXPECT_NEAR(mp.s[i], pi / 4.0, 1e-15);
  }
}

TEST(Decompose, RoundTripAndContinuityOnRandomFields) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid g = Grid::spacetime(0.0, 0.05, 41, -4.0, 0.05, 161);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = 3.0 * u(rng), b = 2.0 * u(rng), c = u(rng), w = 0.5 + 0.4 * u(rng);
    const ComplexField psi = ComplexField::sample(g, [&](double t, double x) {
      return std::polar(std::exp(-w * x * x) * (1.2 + std::cos(c * x)), a * x + b * x * x * x / 6.0 - (1.0 + c) * t);
    });
    const MadelungPair mp = decompose(psi);
    const ComplexField back = recompose(mp);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!mp.is_node(i)) {
        EXPECT_LT(std::abs(back[i] - psi[i]), 1e-12);
      }
    }
    for (std::size_t it = 0; it < g.nt(); ++it) {
      for (std::size_t ix = 1; ix < g.nx(); ++ix) {
        const std::size_t k = g.index(it, ix), l = g.index(it, ix - 1);
        if (!mp.is_node(k) && !mp.is_node(l)) {
          EXPECT_LT(std::abs(mp.s[k] - mp.s[l]), pi);
        }
      }
    }
  }
}

TEST(Decompose, NodesAreFlaggedAndBridged) {
  const Grid g = Grid::spatial(-pi, pi / 50.0, 101);
  const ComplexField psi = ComplexField::sample(g, [](double, double x) { return std::polar(std::sin(x), 0.4 * x); });
  const MadelungPair mp = decompose(psi);
  EXPECT_TRUE(mp.is_node(50));
  EXPECT_FALSE(mp.is_node(25));
  EXPECT_TRUE(std::isfinite(mp.s[50]));
  const ComplexField back = recompose(mp);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!mp.is_node(i)) {
      EXPECT_LT(std::abs(back[i] - psi[i]), 1e-12);
    }
  }
}

TEST(Decompose, AllNodesIsDegenerate) {
  const Grid g = Grid::spatial(0.0, 0.1, 16);
  EXPECT_THROW(decompose(ComplexField(g)), DegenerateFieldError);
}

TEST(Decompose, NonFiniteRejected) {
  const Grid g = Grid::spatial(0.0, 0.1, 16);
  ComplexField psi(g, complex(1.0, 0.0));
  psi[3] = complex(std::nan(""), 0.0);
  EXPECT_THROW(decompose(psi), DomainError);
}

// ---- statistical potential -------------------------------------------------

TEST(QuantumPotential, ConstantAmplitudeIsExactlyZero) {
  const Grid g = Grid::spacetime(0.0, 0.1, 12, 0.0, 0.1, 12);
  const MadelungPair mp = decompose(ComplexField(g, complex(0.3, 0.4)));
  const auto q = quantum_potential(mp, MetricField::flat(g), 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(q.values[i], 0.0);
}

TEST(QuantumPotential, StaticGaussianClosedForm) {
  const double sigma = 0.8, m = 1.5;
  const Grid g = Grid::spatial(-4.0, 0.01, 801);
  const ComplexField psi =
      ComplexField::sample(g, [&](double, double x) { return complex(std::exp(-x * x / (4.0 * sigma * sigma)), 0.0); });
  const auto q = quantum_potential(decompose(psi), MetricField::flat(g), m);
  const double s2 = sigma * sigma;
  for (std::size_t i = 2; i + 2 < g.size(); ++i) {
    const double x = g.x(i);
    // Spatial d'Alembertian is -R'', so V_Q = R''/(2 m R).
    const double want = (x * x / (4.0 * s2 * s2) - 1.0 / (2.0 * s2)) / (2.0 * m);
    // Truncation error grows with R''''/R away from the centre.
    EXPECT_NEAR(q.values[i], want, 1e-4 * (1.0 + want * want)) << x;
  }
}

TEST(QuantumPotential, CosineIsConstantAwayFromNodes) {
  const double k = 1.7, m = 1.0, h = 0.01;
  const Grid g = Grid::spatial(-3.0, h, 601);
  const ComplexField psi = ComplexField::sample(g, [&](double, double x) { return complex(std::cos(k * x), 0.0); });
  const MadelungPair mp = decompose(psi);
  const auto q = quantum_potential(mp, MetricField::flat(g), m);
  // Discrete R''/R for cos is exactly -(2 - 2 cos kh)/h^2.
  const double discrete = -(2.0 - 2.0 * std::cos(k * h)) / (h * h) / (2.0 * m);
  for (std::size_t i = 2; i + 2 < g.size(); ++i) {
    if (std::abs(std::cos(k * g.x(i))) < 0.05) continue;
    EXPECT_NEAR(q.values[i], discrete, 1e-8);
    EXPECT_NEAR(q.values[i], -k * k / (2.0 * m), k * k * k * k * h * h / 24.0 + 1e-8);
  }
}

TEST(QuantumPotential, NodesAreMasked) {
  const Grid g = Grid::spatial(-pi, pi / 50.0, 101);
  const ComplexField psi = ComplexField::sample(g, [](double, double x) { return complex(std::sin(x), 0.0); });
  const auto q = quantum_potential(decompose(psi), MetricField::flat(g), 1.0);
  EXPECT_FALSE(q.valid[50]);
  EXPECT_TRUE(q.valid[25]);
}

TEST(QuantumPotential, RadialSphericalWave) {
  // R = sin(k r)/r solves the radial Helmholtz equation: box R = k^2 R.
  const double k = 1.2, m = 1.0;
  const Grid g = Grid::radial(0.01, 200);
  const ComplexField psi = ComplexField::sample(g, [&](double, double r) { return complex(std::sin(k * r) / r, 0.0); });
  const MadelungPair mp = decompose(psi);
  const auto q = quantum_potential(mp, MetricField::flat(g), m);
  const double h = g.space().spacing;
  for (std::size_t i = 0; i + 2 < g.nx(); ++i) {
    // The flux form carries an O(h^2 / r^2) measure error near the origin.
    const double r = g.x(i);
    EXPECT_NEAR(q.values[i], -k * k / (2.0 * m), 1e-4 + 0.5 * k * k * h * h / (r * r)) << i;
  }
}

TEST(QuantumPotential, EffectivePotentialAddsV) {
  const Grid g = Grid::spatial(-2.0, 0.05, 81);
  const ComplexField psi = ComplexField::sample(g, [](double, double x) { return complex(std::exp(-x * x), 0.0); });
  const MadelungPair mp = decompose(psi);
  const RealField v = RealField::sample(g, [](double, double x) { return 0.1 * x; });
  const auto q = quantum_potential(mp, MetricField::flat(g), 1.0);
  const auto e = effective_potential(mp, v, MetricField::flat(g), 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(e.values[i], q.values[i] + v[i]);
}

// ---- continuity ------------------------------------------------------------

TEST(Continuity, PlaneWaveVanishes) {
  const double p = 0.6, e = std::sqrt(1.0 + p * p);
  const Grid g = Grid::spacetime(0.0, 0.05, 41, -2.0, 0.05, 81);
  const RealField res = continuity_residual(decompose(plane_wave(g, p, e)), MetricField::flat(g), 1.0);
  for (double v : res.values()) EXPECT_LT(std::abs(v), 1e-11);
}

TEST(Continuity, RealStationaryStateIsExactlyZero) {
  const Physics phys{1.0, 0.0, 0.0};
  const Grid g = Grid::spatial(-5.0, 0.1, 101);
  const RealField v = RealField::sample(g, [](double, double x) { return 0.2 * std::exp(-x * x); });
  const auto states = stationary_solve(PotentialConfig::scalar(v), {0.0, 1.0}, phys, Boundary::dirichlet);
  ASSERT_FALSE(states.empty());
  // Remove the arbitrary global phase so the profile is real.
  ComplexField prof = states.front().profile;
  const complex ph = std::polar(1.0, -std::arg(prof[50]));
  for (auto& z : prof.values()) z = complex((z * ph).real(), 0.0);
  MadelungPair mp = decompose(prof);
  mp.stationary_energy = states.front().energy;
  const RealField res = continuity_residual(mp, MetricField::flat(g), 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!mp.is_node(i)) {
      EXPECT_EQ(res[i], 0.0);
    }
  }
}

TEST(Continuity, EvolvedPacketConvergesAtSecondOrder) {
  std::vector<double> hs, errs;
  for (std::size_t n : {200u, 400u, 800u, 1600u}) {
    const ComplexField psi = evolved_packet(n, 1.0);
    const MadelungPair mp = decompose(psi);
    const RealField res = continuity_residual(mp, MetricField::flat(psi.grid()), 1.0);
    // Near-nodes in the far tail make S ill-conditioned; measure the bulk.
    const MaskedField<double> all{res, std::vector<bool>(res.size(), true)};
    hs.push_back(psi.grid().space().spacing);
    errs.push_back(masked_max(all, mp.r, 0.01));
  }
  EXPECT_NEAR(numerics::loglog_slope(hs, errs), 2.0, 0.2);
}

// ---- Hamilton-Jacobi ---------------------------------------------------------

TEST(HamiltonJacobi, MassShellIdentityAnalytic) {
  const std::array<double, 4> flat{1.0, -1.0, -1.0, -1.0};
  for (double m : {0.5, 1.0, 3.0}) {
    for (double p : {-2.0, 0.0, 0.3, 5.0}) {
      const double e = std::sqrt(p * p + m * m);
      const FourVector ds = vec(-e, p);
      EXPECT_LE(std::abs(hamilton_jacobi_pointwise(1.0, 0.0, ds, flat, 0.0, m)), 1e-10 * std::max(1.0, e * e / m));
    }
  }
}

TEST(HamiltonJacobi, GridSampledPlaneWave) {
  const double p = 0.9, e = std::sqrt(1.0 + p * p);
  for (double h : {0.1, 0.05}) {
    const auto n = static_cast<std::size_t>(std::llround(2.0 / h)) + 1;
    const Grid g = Grid::spacetime(0.0, h, n, -1.0, h, n);
    const MadelungPair mp = decompose(plane_wave(g, p, e));
    const auto res = hamilton_jacobi_residual(mp, RealField(g), MetricField::flat(g), 1.0);
    EXPECT_LT(masked_max(res, mp.r, 0.0, 0), h * h);
  }
}

TEST(HamiltonJacobi, RestState) {
  const double m = 2.0;
  const Grid g = Grid::spacetime(0.0, 0.1, 21, -1.0, 0.1, 21);
  const ComplexField psi = ComplexField::sample(g, [&](double t, double) { return std::polar(0.7, -m * t); });
  const MadelungPair mp = decompose(psi);
  const auto res = hamilton_jacobi_residual(mp, RealField(g), MetricField::flat(g), m);
  EXPECT_LT(masked_max(res, mp.r, 0.0, 0), 1e-12);
}

TEST(HamiltonJacobi, StationaryEnergyEntersTimeComponent) {
  const double p = 0.4, e = std::sqrt(1.0 + p * p);
  const Grid g = periodic_box(10.0, 200);
  MadelungPair mp = decompose(plane_wave(g, p, 0.0));
  mp.stationary_energy = e;
  const auto res = hamilton_jacobi_residual(mp, RealField(g), MetricField::flat(g), 1.0);
  EXPECT_LT(masked_max(res, mp.r, 0.0, 0), 1e-12);
}

TEST(HamiltonJacobi, EvolvedPacketConvergesAtSecondOrder) {
  std::vector<double> hs, errs;
  for (std::size_t n : {200u, 400u, 800u, 1600u}) {
    const ComplexField psi = evolved_packet(n, 1.0);
    const MadelungPair mp = decompose(psi);
    const auto res = hamilton_jacobi_residual(mp, RealField(psi.grid()), MetricField::flat(psi.grid()), 1.0);
    hs.push_back(psi.grid().space().spacing);
    errs.push_back(masked_max(res, mp.r, 0.05));
  }
  EXPECT_NEAR(numerics::loglog_slope(hs, errs), 2.0, 0.2);
}

// ---- four-current and probability density ------------------------------------

TEST(FourCurrent, PlaneWave) {
  const double p = 0.5, e = std::sqrt(1.0 + p * p), m = 1.0, h = 0.01;
  const Grid g = Grid::spacetime(0.0, h, 41, -0.2, h, 41);
  const FourCurrentField j = four_current(plane_wave(g, p, e), m);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(j.j0[i], e / m, e * e * e * h * h);
    EXPECT_NEAR(j.j1[i], p / m, p * p * p * h * h);
  }
}

TEST(FourCurrent, StationaryProfileUsesExactTimeDerivative) {
  const double p = 0.5, e = std::sqrt(1.0 + p * p);
  const Grid g = periodic_box(10.0, 1000);
  const FourCurrentField j = four_current(plane_wave(g, p, 0.0), e, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(j.j0[i], e, 1e-14);
}

TEST(FourCurrent, RealFieldCarriesNoCurrent) {
  const Grid g = Grid::spacetime(0.0, 0.1, 12, 0.0, 0.1, 12);
  const ComplexField psi = ComplexField::sample(g, [](double t, double x) { return complex(std::cos(t) * x, 0.0); });
  const FourCurrentField j = four_current(psi, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(j.j0[i], 0.0);
    EXPECT_EQ(j.j1[i], 0.0);
  }
}

TEST(FourCurrent, ConjugationFlipsSignExactly) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  const Grid g = Grid::spacetime(0.0, 0.1, 16, 0.0, 0.1, 16);
  ComplexField psi(g);
  for (auto& z : psi.values()) z = complex(n01(rng), n01(rng));
  const FourCurrentField a = four_current(psi, 1.3);
  const FourCurrentField b = four_current(conjugate(psi), 1.3);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(a.j0[i], -b.j0[i]);
    EXPECT_EQ(a.j1[i], -b.j1[i]);
  }
}

TEST(FourCurrent, MatchesMadelungFluxAtSecondOrder) {
  std::vector<double> hs, errs;
  for (int level = 0; level < 4; ++level) {
    const double h = 0.1 / std::pow(2.0, level);
    const auto n = static_cast<std::size_t>(std::llround(4.0 / h)) + 1;
    const Grid g = Grid::spacetime(0.0, h, n, -2.0, h, n);
    const ComplexField psi = ComplexField::sample(g, [](double t, double x) {
      return std::polar(std::exp(-0.5 * x * x), 0.7 * x + 0.2 * x * x * x - 1.3 * t - 0.1 * t * t);
    });
    const FourCurrentField j = four_current(psi, 1.0);
    const MadelungPair mp = decompose(psi);
    const RealField st = numerics::partial(mp.s, AxisKind::t);
    const RealField sx = numerics::partial(mp.s, AxisKind::x);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r2 = mp.r[i] * mp.r[i];
      // j^0 = -R^2 d_t S / m, j^1 = R^2 d_x S / m for exp(i(px - Et)) amplitudes.
      err = std::max({err, std::abs(j.j0[i] + r2 * st[i]), std::abs(j.j1[i] - r2 * sx[i])});
    }
    hs.push_back(h);
    errs.push_back(err);
  }
  EXPECT_NEAR(numerics::loglog_slope(hs, errs), 2.0, 0.2);
}

TEST(FourCurrent, DivergenceOfEvolvedPacketConverges) {
  std::vector<double> hs, errs;
  for (std::size_t n : {200u, 400u, 800u, 1600u}) {
    const ComplexField psi = evolved_packet(n, 1.0);
    const FourCurrentField j = four_current(psi, 1.0);
    hs.push_back(psi.grid().space().spacing);
    errs.push_back(numerics::interior_max_abs(j.divergence));
  }
  EXPECT_NEAR(numerics::loglog_slope(hs, errs), 2.0, 0.2);
}

TEST(ProbabilityDensity, ParticlePlaneWave) {
  const double p = 0.5, e = std::sqrt(1.0 + p * p);
  const Grid g = periodic_box(10.0, 200);
  const ProbabilityDensity d = probability_density(four_current(plane_wave(g, p, 0.0, 0.3), e, 1.0), Branch::particle);
  EXPECT_FALSE(d.branch_mismatch);
  for (double v : d.p.values()) EXPECT_NEAR(v, e * 0.09, 1e-14);
}

TEST(ProbabilityDensity, AntiparticleBranchIsPositive) {
  const double p = 0.5, e = std::sqrt(1.0 + p * p);
  const Grid g = periodic_box(10.0, 200);
  const FourCurrentField j = four_current(plane_wave(g, p, 0.0, 0.3), -e, 1.0);
  const ProbabilityDensity anti = probability_density(j, Branch::antiparticle);
  const ProbabilityDensity automatic = probability_density(j);
  EXPECT_FALSE(anti.branch_mismatch);
  EXPECT_EQ(automatic.sign, -1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(anti.p[i], e * 0.09, 1e-14);
    EXPECT_EQ(automatic.p[i], anti.p[i]);
  }
}

TEST(ProbabilityDensity, WrongBranchReportsMismatch) {
  const double e = std::sqrt(1.25);
  const Grid g = periodic_box(10.0, 200);
  const ProbabilityDensity d = probability_density(four_current(plane_wave(g, 0.5, 0.0), -e, 1.0), Branch::particle);
  EXPECT_TRUE(d.branch_mismatch);
  EXPECT_LT(d.negative_integral, 0.0);
  EXPECT_EQ(d.positive_integral, 0.0);
}

TEST(ProbabilityDensity, MixedBranchesReportBothIntegrals) {
  // Equal-weight superposition of a positive-energy wave and a slower
  // negative-energy wave: j^0 oscillates in sign across the box.
  const Grid g = Grid::spacetime(0.0, 0.01, 9, -5.0, 0.01, 1001);
  const double p1 = 0.0, e1 = 1.0, p2 = 3.0, e2 = -std::sqrt(10.0);
  const ComplexField psi = ComplexField::sample(g, [&](double t, double x) {
    return std::polar(1.0, p1 * x - e1 * t) + 0.6 * std::polar(1.0, p2 * x - e2 * t);
  });
  const ProbabilityDensity d = probability_density(four_current(psi, 1.0));
  EXPECT_TRUE(d.branch_mismatch);
  EXPECT_GT(d.positive_integral, 0.0);
  EXPECT_LT(d.negative_integral, 0.0);
}

TEST(ProbabilityDensity, SlowPacketApproachesSchrodingerDensity) {
  const Physics phys{1.0, 0.0, 0.0};
  const Grid g = periodic_box(400.0, 800);
  const InitialData init = gaussian_packet(g, 0.0, 0.01, 40.0, phys);
  EvolveOptions opt;
  opt.dt = 0.01;
  opt.steps = 8;
  const ComplexField psi = evolve(init.psi, init.psidot, PotentialConfig::free(g), phys, opt).field;
  const ProbabilityDensity d = probability_density(four_current(psi, 1.0), Branch::particle);
  double dev = 0.0, peak = 0.0;
  for (std::size_t ix = 0; ix < g.nx(); ++ix) {
    const std::size_t k = psi.grid().index(4, ix);
    dev = std::max(dev, std::abs(d.p[k] - std::norm(psi[k])));
    peak = std::max(peak, std::norm(psi[k]));
  }
  EXPECT_LT(dev / peak, 1e-3);
  EXPECT_NEAR(d.integral[4], 1.0, 1e-6);
  EXPECT_FALSE(d.branch_mismatch);
}

// ---- second-order expansion -------------------------------------------------

TEST(Expansion, ZeroSeparationIsExact) {
  const Grid g = Grid::spacetime(0.0, 0.05, 21, -0.5, 0.05, 21);
  const ComplexField psi = ComplexField::sample(g, [](double t, double x) {
    return std::polar(std::exp(-x * x), 0.3 * x - t);
  });
  EXPECT_LT(expansion_check(decompose(psi), {10, 10}, FourVector{}), 1e-15);
}

TEST(Expansion, PlaneWaveIsExact) {
  const double p = 0.8, e = std::sqrt(1.64);
  const Grid g = Grid::spacetime(0.0, 0.05, 41, -1.0, 0.05, 41);
  const MadelungPair mp = decompose(plane_wave(g, p, e));
  EXPECT_LT(expansion_check(mp, {20, 20}, vec(0.4, 0.8)), 1e-12);
}

TEST(Expansion, AnalyticJetErrorIsThirdOrder) {
  // R = exp(-x^2), S = a x + b x^3, expanded at x0 with exact derivatives.
  const double a = 0.7, b = 0.4, x0 = 0.3;
  auto psi = [&](double x) { return std::polar(std::exp(-x * x), a * x + b * x * x * x); };
  LocalJet jet;
  jet.r = std::exp(-x0 * x0);
  jet.dr[1] = -2.0 * x0 * jet.r;
  jet.ddr[1][1] = (4.0 * x0 * x0 - 2.0) * jet.r;
  jet.ds[1] = a + 3.0 * b * x0 * x0;
  std::vector<double> ds, errs;
  for (double d = 0.2; d > 0.01; d *= 0.5) {
    const complex exact = std::conj(psi(x0 - 0.5 * d)) * psi(x0 + 0.5 * d);
    ds.push_back(d);
    errs.push_back(expansion_error(jet, vec(0.0, d), exact));
  }
  EXPECT_NEAR(numerics::loglog_slope(ds, errs), 3.0, 0.3);
}

TEST(Expansion, GridCheckErrorIsThirdOrder) {
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
  EXPECT_NEAR(numerics::loglog_slope(ds, errs), 3.0, 0.3);
}

TEST(Expansion, OffGridSeparationRejected) {
  const Grid g = Grid::spacetime(0.0, 0.1, 21, 0.0, 0.1, 21);
  const MadelungPair mp = decompose(ComplexField(g, complex(1.0, 0.0)));
  EXPECT_THROW(expansion_check(mp, {10, 10}, vec(0.0, 0.3)), DomainError);
  EXPECT_THROW(expansion_check(mp, {10, 10}, vec(0.0, 2.4)), DomainError);
  EXPECT_THROW(expansion_check(mp, {1, 10}, vec(0.0, 0.2)), DomainError);
}

// ---- mean four-momentum --------------------------------------------------------

TEST(MeanFourMomentum, EqualsMassTimesIntegratedCurrent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid g = Grid::spacetime(0.0, 0.05, 41, -5.0, 0.05, 201);
  for (int trial = 0; trial < 10; ++trial) {
    const double p = u(rng), w = 1.0 + 0.5 * u(rng), m = 1.0 + 0.5 * u(rng);
    const ComplexField psi = ComplexField::sample(g, [&](double t, double x) {
      return std::polar(std::exp(-w * x * x), p * x - std::sqrt(p * p + m * m) * t + 0.1 * x * x);
    });
    const MeanFourMomentum mf = mean_four_momentum_amplitude(psi, m);
    for (std::size_t mu = 0; mu < 2; ++mu) {
      EXPECT_NEAR(mf.value[mu], mf.via_current[mu], 1e-10 * std::max(1.0, std::abs(mf.value[mu])));
    }
  }
}

TEST(MeanFourMomentum, BoxNormalizedPlaneWave) {
  const double p = 2.0 * pi * 3.0 / 10.0, e = std::sqrt(1.0 + p * p);
  const Grid g = periodic_box(10.0, 2000);
  const double h = g.space().spacing;
  ComplexField psi = plane_wave(g, p, 0.0, 1.0 / std::sqrt(10.0));
  const MeanFourMomentum mf = mean_four_momentum_amplitude(psi, 1.0, e);
  // Trapezoid over the sampled nodes misses one cell of the periodic box.
  const double norm = 1.0 - h / 10.0;
  EXPECT_NEAR(mf.value[0], e * norm, 1e-12);
  EXPECT_NEAR(mf.value[1], p * norm, p * p * p * h * h);
}

TEST(MeanFourMomentum, RealAndParityFieldsHaveNoSpatialPart) {
  const Grid g = Grid::spacetime(0.0, 0.05, 21, -5.0, 0.05, 201);
  const ComplexField real = ComplexField::sample(g, [](double t, double x) {
    return complex(std::exp(-x * x) * std::cos(t), 0.0);
  });
  EXPECT_EQ(mean_four_momentum_amplitude(real, 1.0).value[1], 0.0);
  const double p = 1.1, e = std::sqrt(1.0 + p * p);
  const ComplexField pair = ComplexField::sample(g, [&](double t, double x) {
    return std::polar(1.0, p * x - e * t) + std::polar(1.0, -p * x - e * t);
  });
  EXPECT_NEAR(mean_four_momentum_amplitude(pair, 1.0).value[1], 0.0, 1e-12);
}

TEST(MeanFourMomentum, SpatialFieldNeedsEnergy) {
  const Grid g = periodic_box(10.0, 100);
  EXPECT_THROW(mean_four_momentum_amplitude(ComplexField(g, complex(1.0, 0.0)), 1.0), DomainError);
}

// ---- trajectories --------------------------------------------------------------

TEST(Trajectory, PlaneWaveIsStraight) {
  const double p = 0.6, e = std::sqrt(1.0 + p * p), m = 1.0;
  const Grid g = Grid::spacetime(0.0, 0.05, 81, -2.0, 0.05, 81);
  const MadelungPair mp = decompose(plane_wave(g, p, e));
  TrajectoryOptions opt;
  opt.tau_span = 1.0;
  opt.dtau = 0.01;
  const FourVector x0 = vec(0.5, -1.0);
  const TrajectoryPath path = integrate_trajectory(x0, mp, RealField(g), m, opt);
  ASSERT_EQ(path.states.size(), 101u);
  EXPECT_FALSE(path.exited_grid);
  for (const auto& s : path.states) {
    EXPECT_NEAR(s.x[0], x0[0] + e * s.tau / m, 1e-9);
    EXPECT_NEAR(s.x[1], x0[1] + p * s.tau / m, 1e-9);
    EXPECT_NEAR(s.p[0], e, 1e-9);
    EXPECT_NEAR(s.p[1], p, 1e-9);
  }
}

TEST(Trajectory, RestStateStaysPut) {
  const double m = 1.0;
  const Grid g = Grid::spacetime(0.0, 0.05, 61, -1.0, 0.05, 41);
  const ComplexField psi = ComplexField::sample(g, [&](double t, double) { return std::polar(1.0, -m * t); });
  TrajectoryOptions opt;
  opt.tau_span = 2.0;
  const TrajectoryPath path = integrate_trajectory(vec(0.0, 0.3), decompose(psi), RealField(g), m, opt);
  ASSERT_FALSE(path.states.empty());
  for (const auto& s : path.states) EXPECT_NEAR(s.x[1], 0.3, 1e-12);
  EXPECT_NEAR(path.states.back().x[0], 2.0, 1e-9);
}

TEST(Trajectory, BohmianConsistencyOnBoundState) {
  const Physics phys{1.0, 0.0, 0.0};
  const double h = 0.05, dtau = 0.05;
  const Grid g = Grid::spatial(-6.0, h, 241);
  const RealField v = RealField::sample(g, [](double, double x) { return 0.3 * std::exp(-x * x); });
  const auto states = stationary_solve(PotentialConfig::scalar(v), {0.0, 1.0}, phys, Boundary::dirichlet);
  ASSERT_FALSE(states.empty());
  MadelungPair mp = decompose(states.front().profile);
  mp.stationary_energy = states.front().energy;
  TrajectoryOptions opt;
  opt.tau_span = 3.0;
  opt.dtau = dtau;
  const TrajectoryPath path = integrate_trajectory(vec(0.0, 0.7), mp, v, 1.0, opt);
  ASSERT_FALSE(path.node_crossing);
  ASSERT_GT(path.states.size(), 10u);
  for (const auto& s : path.states) {
    const auto guide = guidance_momentum(mp, s.x);
    ASSERT_TRUE(guide.has_value());
    for (std::size_t mu = 0; mu < 2; ++mu) EXPECT_LE(std::abs(s.p[mu] - (*guide)[mu]), dtau * dtau * dtau * dtau + h * h);
  }
}

TEST(Trajectory, BohmianConsistencyOnMovingStationaryState) {
  const double p = 2.0 * pi * 2.0 / 10.0, e = std::sqrt(1.0 + p * p), h = 0.05, dtau = 0.05;
  const Grid g = periodic_box(10.0, 200);
  MadelungPair mp = decompose(plane_wave(g, p, 0.0));
  mp.stationary_energy = e;
  TrajectoryOptions opt;
  opt.tau_span = 2.0;
  opt.dtau = dtau;
  const TrajectoryPath path = integrate_trajectory(vec(0.0, -3.0), mp, RealField(g), 1.0, opt);
  ASSERT_EQ(path.states.size(), 41u);
  for (const auto& s : path.states) {
    const auto guide = guidance_momentum(mp, s.x);
    ASSERT_TRUE(guide.has_value());
    EXPECT_LE(std::abs(s.p[0] - (*guide)[0]), dtau * dtau * dtau * dtau + h * h);
    EXPECT_LE(std::abs(s.p[1] - (*guide)[1]), dtau * dtau * dtau * dtau + h * h);
    EXPECT_NEAR(s.x[1], -3.0 + p * s.tau, 1e-9);
  }
}

TEST(Trajectory, ExitAndNodeFlags) {
  const double p = 0.6, e = std::sqrt(1.0 + p * p);
  const Grid g = Grid::spacetime(0.0, 0.05, 81, -2.0, 0.05, 81);
  TrajectoryOptions opt;
  opt.tau_span = 5.0;
  const TrajectoryPath out = integrate_trajectory(vec(0.0, 1.5), decompose(plane_wave(g, p, e)), RealField(g), 1.0, opt);
  EXPECT_TRUE(out.exited_grid);
  EXPECT_LT(out.states.size(), 501u);

  const Grid gs = Grid::spatial(-pi, pi / 50.0, 101);
  MadelungPair mp = decompose(ComplexField::sample(gs, [](double, double x) { return complex(std::sin(x), 0.0); }));
  mp.stationary_energy = 1.0;
  const TrajectoryPath node = integrate_trajectory(vec(0.0, 0.0), mp, RealField(gs), 1.0, opt);
  EXPECT_TRUE(node.node_crossing);
  EXPECT_TRUE(node.states.empty());
}
