#pragma once

// Four-vectors, diagonal metrics and the covariant operators built on them.
//
// Signature is (+,-,-,-). On radial grids the stored diagonal is the
// orthonormal-angular frame (flat = diag(1,-1,-1,-1)); the spherical r^2
// measure enters only through the volume weight used by dalembertian().

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "relqm/errors.hpp"
#include "relqm/grid.hpp"
#include "relqm/numerics.hpp"

namespace relqm {

/// Contravariant components (v^0, v^1, v^2, v^3).
struct FourVector {
  std::array<double, 4> v{};

  double& operator[](std::size_t mu) { return v[mu]; }
  double operator[](std::size_t mu) const { return v[mu]; }
  bool operator==(const FourVector&) const = default;
};

inline FourVector operator+(FourVector a, const FourVector& b) {
  for (std::size_t mu = 0; mu < 4; ++mu) a[mu] += b[mu];
  return a;
}
inline FourVector operator-(FourVector a, const FourVector& b) {
  for (std::size_t mu = 0; mu < 4; ++mu) a[mu] -= b[mu];
  return a;
}
inline FourVector operator*(double s, FourVector a) {
  for (auto& c : a.v) c *= s;
  return a;
}

inline constexpr std::array<double, 4> minkowski_diag{1.0, -1.0, -1.0, -1.0};

class MetricField {
public:
  static MetricField flat(const Grid& grid) {
    MetricField m(grid);
    for (std::size_t mu = 0; mu < 4; ++mu) m.diag_[mu].assign(grid.size(), minkowski_diag[mu]);
    return m;
  }

  /// Static weak-field form g_00 = 1 + 2 phi, g_11 = -(1 - 2 phi), angular parts flat.
  static MetricField weak_field(const RealField& phi) {
    MetricField m = flat(phi.grid());
    for (std::size_t i = 0; i < phi.size(); ++i) {
      m.diag_[0][i] = 1.0 + 2.0 * phi[i];
      m.diag_[1][i] = -(1.0 - 2.0 * phi[i]);
    }
    m.validate();
    return m;
  }

  static MetricField from_components(const Grid& grid, std::array<std::vector<double>, 4> diag) {
    MetricField m(grid);
    for (std::size_t mu = 0; mu < 4; ++mu) {
      if (diag[mu].size() != grid.size()) throw DomainError("metric component size does not match grid");
    }
    m.diag_ = std::move(diag);
    m.validate();
    return m;
  }

  const Grid& grid() const { return grid_; }

  /// Lower-index diagonal component g_{mu mu}.
  double g(std::size_t mu, std::size_t index) const { return diag_[mu][index]; }
  double g(std::size_t mu, GridPoint p) const {
    grid_.require(p);
    return diag_[mu][grid_.index(p)];
  }
  /// Upper-index component g^{mu mu}.
  double inverse(std::size_t mu, std::size_t index) const { return 1.0 / diag_[mu][index]; }

  /// sqrt|det g| at a storage index.
  double sqrt_abs_det(std::size_t index) const {
    return std::sqrt(std::abs(diag_[0][index] * diag_[1][index] * diag_[2][index] * diag_[3][index]));
  }

  std::span<const double> component(std::size_t mu) const { return diag_[mu]; }

  bool is_flat() const {
    for (std::size_t mu = 0; mu < 4; ++mu) {
      for (double v : diag_[mu]) {
        if (v != minkowski_diag[mu]) return false;
      }
    }
    return true;
  }

private:
  explicit MetricField(const Grid& grid) : grid_(grid) {}

  void validate() const {
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (!(diag_[0][i] > 0.0)) throw DomainError("metric signature violated: g_00 <= 0");
      for (std::size_t mu = 1; mu < 4; ++mu) {
        if (!(diag_[mu][i] < 0.0)) throw DomainError("metric signature violated: g_ii >= 0");
      }
    }
  }

  Grid grid_;
  std::array<std::vector<double>, 4> diag_;
};

/// g_{mu nu} a^mu b^nu at a grid point.
inline double minkowski_dot(const FourVector& a, const FourVector& b, const MetricField& g, GridPoint p) {
  g.grid().require(p);
  double s = 0.0;
  for (std::size_t mu = 0; mu < 4; ++mu) s += g.g(mu, p) * a[mu] * b[mu];
  return s;
}

/// Covariant components v_mu = g_{mu mu} v^mu (returned in the same container).
inline FourVector lower(const FourVector& v, const MetricField& g, GridPoint p) {
  FourVector out;
  for (std::size_t mu = 0; mu < 4; ++mu) out[mu] = g.g(mu, p) * v[mu];
  return out;
}

inline FourVector raise(const FourVector& v_lower, const MetricField& g, GridPoint p) {
  FourVector out;
  for (std::size_t mu = 0; mu < 4; ++mu) out[mu] = v_lower[mu] / g.g(mu, p);
  return out;
}

namespace detail {

// Flux-form second derivative along one axis:
//   (1/w_i) d/dq ( c d f/dq ),   c = measure * sqrt|g| * g^{mu mu}
// with face weights averaged from the two neighbours. A radial axis carries the
// r^2 measure and a zero-flux face at r = 0.
struct AxisOperator {
  const Axis& axis;
  bool radial;

  template <class T>
  void apply(std::span<const T> f, std::span<const double> sqrt_det, std::span<const double> g_inv,
             std::span<T> out) const {
    const std::size_t n = f.size();
    const double h = axis.spacing;
    const double h2 = h * h;
    std::vector<double> c(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = sqrt_det[i] * g_inv[i];
      w[i] = sqrt_det[i];
    }
    auto measure = [&](double r) { return radial ? r * r : 1.0; };
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = axis.coord(i);
      const bool lower_edge = (i == 0);
      const bool upper_edge = (i == n - 1);
      if (!upper_edge && (!lower_edge || radial)) {
        const double wp = measure(ri + 0.5 * h) * 0.5 * (c[i] + c[i + 1]);
        const double wm = lower_edge ? 0.0 : measure(ri - 0.5 * h) * 0.5 * (c[i - 1] + c[i]);
        const T flux_p = wp * (f[i + 1] - f[i]);
        const T flux_m = lower_edge ? T{} : wm * (f[i] - f[i - 1]);
        out[i] += (flux_p - flux_m) / (h2 * measure(ri) * w[i]);
        continue;
      }
      // One-sided product rule (c f')' = c f'' + c' f' at a non-radial edge or the outer radius.
      std::vector<double> cm(n);
      for (std::size_t k = 0; k < n; ++k) cm[k] = measure(axis.coord(k)) * c[k];
      const T d2 = numerics::second_derivative<T>(f, i, h);
      const T d1 = numerics::first_derivative<T>(f, i, h);
      const double dc = numerics::first_derivative<double>(cm, i, h);
      out[i] += (cm[i] * d2 + dc * d1) / (measure(ri) * w[i]);
    }
  }
};

}  // namespace detail

/// Scalar wave operator (1/sqrt|g|) d_mu (sqrt|g| g^{mu nu} d_nu f).
///
/// On a flat Cartesian metric this is d_t^2 f - d_x^2 f (second-order centred
/// stencils, one-sided at the edges). Spatial-only grids drop the time term;
/// radial grids include the spherical measure.
template <class T>
Field<T> dalembertian(const Field<T>& f, const MetricField& g) {
  const Grid& grid = f.grid();
  if (!(grid == g.grid())) throw DomainError("dalembertian: field and metric grids differ");
  for (const Axis& a : grid.axes()) {
    if (a.count < 3) throw DomainError("dalembertian needs at least 3 points per axis");
  }
  Field<T> out(grid);
  std::vector<double> sd(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) sd[i] = g.sqrt_abs_det(i);

  if (grid.has_time()) {
    const std::size_t nt = grid.nt();
    detail::AxisOperator op{grid.time(), false};
    std::vector<T> col(nt), res(nt);
    std::vector<double> w(nt), gi(nt);
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      for (std::size_t it = 0; it < nt; ++it) {
        const std::size_t k = grid.index(it, ix);
        col[it] = f[k];
        w[it] = sd[k];
        gi[it] = g.inverse(0, k);
        res[it] = T{};
      }
      op.apply<T>(col, w, gi, res);
      for (std::size_t it = 0; it < nt; ++it) out(it, ix) += res[it];
    }
  }
  const std::size_t nx = grid.nx();
  detail::AxisOperator op{grid.space(), grid.is_radial()};
  std::vector<T> rowv(nx), res(nx);
  std::vector<double> w(nx), gi(nx);
  for (std::size_t it = 0; it < grid.nt(); ++it) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t k = grid.index(it, ix);
      rowv[ix] = f[k];
      w[ix] = sd[k];
      gi[ix] = g.inverse(1, k);
      res[ix] = T{};
    }
    op.apply<T>(rowv, w, gi, res);
    for (std::size_t ix = 0; ix < nx; ++ix) out(it, ix) += res[ix];
  }
  return out;
}

/// Gamma^lambda_{mu nu} per grid point, index order [lambda][mu][nu].
class ChristoffelField {
public:
  using Block = std::array<std::array<std::array<double, 4>, 4>, 4>;

  ChristoffelField(const Grid& grid, std::vector<Block> data) : grid_(grid), data_(std::move(data)) {}

  const Grid& grid() const { return grid_; }
  double operator()(std::size_t lambda, std::size_t mu, std::size_t nu, GridPoint p) const {
    grid_.require(p);
    return data_[grid_.index(p)][lambda][mu][nu];
  }
  const Block& at(std::size_t index) const { return data_[index]; }

private:
  Grid grid_;
  std::vector<Block> data_;
};

/// Gamma^l_{mn} = 1/2 g^{ll} (d_m g_{ln} + d_n g_{lm} - d_l g_{mn}) for a
/// diagonal metric, derivatives by centred differences (one-sided at edges).
inline ChristoffelField christoffel_from_metric(const MetricField& g) {
  const Grid& grid = g.grid();
  for (std::size_t mu = 0; mu < 4; ++mu) {
    for (double v : g.component(mu)) {
      if (std::abs(v) < 1e-12) throw SingularMetricError("metric component below 1e-12");
    }
  }
  // dg[a][sigma] = d_a g_{sigma sigma}; only active axes carry derivatives.
  std::vector<std::array<std::array<double, 4>, 4>> dg(grid.size());
  for (auto& d : dg) {
    for (auto& row : d) row.fill(0.0);
  }
  for (std::size_t sigma = 0; sigma < 4; ++sigma) {
    Field<double> comp(grid, std::vector<double>(g.component(sigma).begin(), g.component(sigma).end()));
    for (const Axis& a : grid.axes()) {
      const Field<double> d = numerics::partial(comp, a.kind);
      const std::size_t mu = static_cast<std::size_t>(component_of(a.kind));
      for (std::size_t i = 0; i < grid.size(); ++i) dg[i][mu][sigma] = d[i];
    }
  }
  std::vector<ChristoffelField::Block> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double ginv = g.inverse(l, i);
      for (std::size_t m = 0; m < 4; ++m) {
        for (std::size_t n = 0; n < 4; ++n) {
          double s = 0.0;
          if (l == n) s += dg[i][m][l];
          if (l == m) s += dg[i][n][l];
          if (m == n) s -= dg[i][l][m];
          out[i][l][m][n] = 0.5 * ginv * s;
        }
      }
    }
  }
  return ChristoffelField(grid, std::move(out));
}

/// Covariant gradient components g^{mu mu} d_mu f along the active axes
/// (index 0 = time, 1 = space); inactive components are zero.
inline std::array<RealField, 2> raised_gradient(const RealField& f, const MetricField& g) {
  const Grid& grid = f.grid();
  std::array<RealField, 2> out{RealField(grid), RealField(grid)};
  for (const Axis& a : grid.axes()) {
    const std::size_t mu = static_cast<std::size_t>(component_of(a.kind));
    RealField d = numerics::partial(f, a.kind);
    for (std::size_t i = 0; i < grid.size(); ++i) out[mu][i] = g.inverse(mu, i) * d[i];
  }
  return out;
}

}  // namespace relqm
