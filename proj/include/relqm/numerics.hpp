#pragma once

// Small numerical helpers shared by the modules: stencils, quadrature,
// interpolation and convergence-order fits. All reductions run in a fixed
// index order so results do not depend on evaluation scheduling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "relqm/errors.hpp"
#include "relqm/grid.hpp"

namespace relqm::numerics {

/// First derivative at index i of uniformly spaced samples: centred in the
/// interior, second-order one-sided at the two ends.
template <class T>
T first_derivative(std::span<const T> f, std::size_t i, double h) {
  const std::size_t n = f.size();
  if (n < 3) throw DomainError("first derivative needs at least 3 samples");
  // End stencils in difference form so constants give exact zeros.
  if (i == 0) return (3.0 * (f[1] - f[0]) - (f[2] - f[1])) / (2.0 * h);
  if (i == n - 1) return (3.0 * (f[n - 1] - f[n - 2]) - (f[n - 2] - f[n - 3])) / (2.0 * h);
  return (f[i + 1] - f[i - 1]) / (2.0 * h);
}

/// Second derivative, centred in the interior and one-sided (4 point) at the ends.
template <class T>
T second_derivative(std::span<const T> f, std::size_t i, double h) {
  const std::size_t n = f.size();
  if (n < 4) throw DomainError("second derivative needs at least 4 samples");
  const double h2 = h * h;
  if (i == 0) return (-2.0 * (f[1] - f[0]) + 3.0 * (f[2] - f[1]) - (f[3] - f[2])) / h2;
  if (i == n - 1) {
    return (-2.0 * (f[n - 2] - f[n - 1]) + 3.0 * (f[n - 3] - f[n - 2]) - (f[n - 4] - f[n - 3])) / h2;
  }
  return ((f[i + 1] - f[i]) - (f[i] - f[i - 1])) / h2;
}

/// Samples of a field along one axis through a point.
template <class T>
std::vector<T> line(const Field<T>& f, AxisKind axis, GridPoint p) {
  const Grid& g = f.grid();
  std::vector<T> out;
  if (axis == AxisKind::t) {
    out.reserve(g.nt());
    for (std::size_t it = 0; it < g.nt(); ++it) out.push_back(f(it, p.ix));
  } else {
    auto row = f.row(p.it);
    out.assign(row.begin(), row.end());
  }
  return out;
}

namespace detail {

template <class T, class Stencil>
Field<T> apply_along(const Field<T>& f, AxisKind axis, Stencil stencil) {
  const Grid& g = f.grid();
  Field<T> out(g);
  if (axis == AxisKind::t) {
    const double h = g.time().spacing;
    std::vector<T> col(g.nt());
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      for (std::size_t it = 0; it < g.nt(); ++it) col[it] = f(it, ix);
      for (std::size_t it = 0; it < g.nt(); ++it) out(it, ix) = stencil(std::span<const T>(col), it, h);
    }
  } else {
    const double h = g.space().spacing;
    for (std::size_t it = 0; it < g.nt(); ++it) {
      auto row = f.row(it);
      for (std::size_t ix = 0; ix < g.nx(); ++ix) out(it, ix) = stencil(std::span<const T>(row), ix, h);
    }
  }
  return out;
}

}  // namespace detail

/// Partial derivative of a field along an active axis at every grid point.
template <class T>
Field<T> partial(const Field<T>& f, AxisKind axis) {
  return detail::apply_along(f, axis, [](std::span<const T> v, std::size_t i, double h) {
    return first_derivative<T>(v, i, h);
  });
}

template <class T>
Field<T> second_partial(const Field<T>& f, AxisKind axis) {
  return detail::apply_along(f, axis, [](std::span<const T> v, std::size_t i, double h) {
    return second_derivative<T>(v, i, h);
  });
}

/// Composite trapezoid rule on uniformly spaced samples.
template <class T>
T trapezoid(std::span<const T> f, double h) {
  if (f.empty()) return T{};
  T sum{};
  for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += f[i];
  sum += 0.5 * (f.front() + f.back());
  return sum * h;
}

/// Integral over every active axis of a grid (trapezoid per axis).
template <class T>
T integrate(const Field<T>& f) {
  const Grid& g = f.grid();
  std::vector<T> rows(g.nt());
  for (std::size_t it = 0; it < g.nt(); ++it) rows[it] = trapezoid<T>(f.row(it), g.space().spacing);
  if (!g.has_time()) return rows[0];
  return trapezoid<T>(rows, g.time().spacing);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs >= 2 matched samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw DomainError("slope fit needs positive samples");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// max |f| over points at least `collar` cells from every grid edge.
template <class T>
double interior_max_abs(const Field<T>& f, std::size_t collar = 2) {
  const Grid& g = f.grid();
  const std::size_t ct = g.has_time() ? collar : 0;
  double m = 0.0;
  for (std::size_t it = ct; it + ct < g.nt(); ++it) {
    for (std::size_t ix = collar; ix + collar < g.nx(); ++ix) m = std::max(m, std::abs(f(it, ix)));
  }
  return m;
}

template <class T>
double max_abs(std::span<const T> v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Linear interpolation weight lookup along an axis; nullopt outside.
struct Bracket {
  std::size_t lo = 0;
  double frac = 0.0;
};

inline std::optional<Bracket> bracket(const Axis& a, double coord) {
  const double s = (coord - a.origin) / a.spacing;
  const double last = static_cast<double>(a.count - 1);
  if (!(s >= -1e-12) || !(s <= last + 1e-12)) return std::nullopt;
  const double c = std::clamp(s, 0.0, last);
  std::size_t lo = static_cast<std::size_t>(std::floor(c));
  if (lo >= a.count - 1) lo = a.count - 2;
  return Bracket{lo, c - static_cast<double>(lo)};
}

/// Bilinear (linear on one-axis grids) interpolation; nullopt outside the grid.
template <class T>
std::optional<T> interpolate(const Field<T>& f, double t, double x) {
  const Grid& g = f.grid();
  auto bx = bracket(g.space(), x);
  if (!bx) return std::nullopt;
  auto along_x = [&](std::size_t it) {
    return (1.0 - bx->frac) * f(it, bx->lo) + bx->frac * f(it, bx->lo + 1);
  };
  if (!g.has_time()) return along_x(0);
  auto bt = bracket(g.time(), t);
  if (!bt) return std::nullopt;
  return (1.0 - bt->frac) * along_x(bt->lo) + bt->frac * along_x(bt->lo + 1);
}

}  // namespace relqm::numerics
