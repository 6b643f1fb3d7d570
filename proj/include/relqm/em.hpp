#pragma once

#include <cmath>
#include <utility>

#include "relqm/grid.hpp"
#include "relqm/numerics.hpp"

namespace relqm {

/// Electromagnetic four-potential A^lambda = (phi, A) sampled on a grid.
///
/// 1+1 reduction: only the longitudinal component A^1 is carried; transverse
/// components and hence B vanish identically.
struct EMPotential {
  RealField phi;
  RealField a1;

  static EMPotential zero(const Grid& grid) { return {RealField(grid), RealField(grid)}; }

  template <class PhiFn, class AFn>
  static EMPotential sample(const Grid& grid, PhiFn&& phi_fn, AFn&& a_fn) {
    EMPotential em{RealField::sample(grid, phi_fn), RealField::sample(grid, a_fn)};
    em.validate();
    return em;
  }

  const Grid& grid() const { return phi.grid(); }

  bool is_zero() const {
    for (double v : phi.values()) {
      if (v != 0.0) return false;
    }
    for (double v : a1.values()) {
      if (v != 0.0) return false;
    }
    return true;
  }

  bool is_static() const { return !grid().has_time(); }

  void validate() const {
    if (!(phi.grid() == a1.grid())) throw DomainError("EMPotential: phi and A on different grids");
    for (double v : phi.values()) {
      if (!std::isfinite(v)) throw DomainError("EMPotential: non-finite phi");
    }
    for (double v : a1.values()) {
      if (!std::isfinite(v)) throw DomainError("EMPotential: non-finite A");
    }
  }

  /// (phi, A^1) interpolated at (t, x); nullopt outside the sampled region.
  std::optional<std::pair<double, double>> at(double t, double x) const {
    auto p = numerics::interpolate(phi, t, x);
    auto a = numerics::interpolate(a1, t, x);
    if (!p || !a) return std::nullopt;
    return std::make_pair(*p, *a);
  }
};

}  // namespace relqm
