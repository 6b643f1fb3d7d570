#pragma once

// Discretization carriers: axes, reduced grids and fields sampled on them.
//
// Natural units (hbar = c = 1) throughout. Grids are at most two dimensional:
//   spacetime  (t, x)   flat 1+1 work, fields stored t-major
//   spatial    (x)      static slices and stationary profiles
//   radial     (r)      static spherically symmetric work, cell centered

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "relqm/errors.hpp"

namespace relqm {

using complex = std::complex<double>;

/// Run parameters; hbar and c are fixed to one.
struct Physics {
  double mass = 1.0;
  double charge = 0.0;
  double newton_g = 0.0;
};

enum class AxisKind { t, x, r };

inline const char* axis_name(AxisKind k) {
  switch (k) {
    case AxisKind::t: return "t";
    case AxisKind::x: return "x";
    case AxisKind::r: return "r";
  }
  return "?";
}

/// Four-vector component carried by an axis (r is the radial component 1).
inline int component_of(AxisKind k) { return k == AxisKind::t ? 0 : 1; }

struct Axis {
  AxisKind kind = AxisKind::x;
  double origin = 0.0;
  double spacing = 1.0;
  std::size_t count = 0;

  double coord(std::size_t i) const { return origin + spacing * static_cast<double>(i); }
  double extent() const { return spacing * static_cast<double>(count - 1); }
  double back() const { return coord(count - 1); }
};

inline constexpr std::size_t min_axis_points = 8;

struct GridPoint {
  std::size_t it = 0;
  std::size_t ix = 0;
};

class Grid {
public:
  static Grid spacetime(Axis t, Axis x) {
    t.kind = AxisKind::t;
    x.kind = AxisKind::x;
    return Grid(std::move(t), std::move(x));
  }
  static Grid spacetime(double t0, double dt, std::size_t nt, double x0, double dx, std::size_t nx) {
    return spacetime(Axis{AxisKind::t, t0, dt, nt}, Axis{AxisKind::x, x0, dx, nx});
  }
  static Grid spatial(double x0, double dx, std::size_t nx) {
    return Grid(std::nullopt, Axis{AxisKind::x, x0, dx, nx});
  }
  /// Cell-centred radial grid r_i = (i + 1/2) dr; the outer face sits at n * dr.
  static Grid radial(double dr, std::size_t n) {
    return Grid(std::nullopt, Axis{AxisKind::r, 0.5 * dr, dr, n});
  }

  bool has_time() const noexcept { return time_.has_value(); }
  bool is_radial() const noexcept { return space_.kind == AxisKind::r; }
  const Axis& time() const {
    if (!time_) throw DomainError("grid has no time axis");
    return *time_;
  }
  const Axis& space() const noexcept { return space_; }

  std::size_t nt() const noexcept { return time_ ? time_->count : 1; }
  std::size_t nx() const noexcept { return space_.count; }
  std::size_t size() const noexcept { return nt() * nx(); }
  std::size_t index(std::size_t it, std::size_t ix) const noexcept { return it * nx() + ix; }
  std::size_t index(GridPoint p) const noexcept { return index(p.it, p.ix); }

  bool contains(GridPoint p) const noexcept { return p.it < nt() && p.ix < nx(); }
  void require(GridPoint p) const {
    if (!contains(p)) {
      throw DomainError("grid point (" + std::to_string(p.it) + ", " + std::to_string(p.ix) +
                        ") outside " + std::to_string(nt()) + "x" + std::to_string(nx()) + " grid");
    }
  }

  double t(std::size_t it) const { return time_ ? time_->coord(it) : 0.0; }
  double x(std::size_t ix) const { return space_.coord(ix); }

  /// Active axes in storage order (time first when present).
  std::vector<Axis> axes() const {
    std::vector<Axis> out;
    if (time_) out.push_back(*time_);
    out.push_back(space_);
    return out;
  }

  /// Spatial slice sharing this grid's space axis.
  Grid spatial_slice() const { return Grid(std::nullopt, space_); }

  bool operator==(const Grid& o) const {
    auto same = [](const Axis& a, const Axis& b) {
      return a.kind == b.kind && a.origin == b.origin && a.spacing == b.spacing && a.count == b.count;
    };
    if (has_time() != o.has_time()) return false;
    if (has_time() && !same(*time_, *o.time_)) return false;
    return same(space_, o.space_);
  }

private:
  Grid(std::optional<Axis> t, Axis x) : time_(std::move(t)), space_(std::move(x)) {
    auto check = [](const Axis& a) {
      if (!(a.spacing > 0.0) || !std::isfinite(a.spacing)) {
        throw DomainError(std::string("axis ") + axis_name(a.kind) + ": spacing must be > 0");
      }
      if (a.count < min_axis_points) {
        throw DomainError(std::string("axis ") + axis_name(a.kind) + ": needs at least " +
                          std::to_string(min_axis_points) + " points, got " + std::to_string(a.count));
      }
    };
    if (time_) check(*time_);
    check(space_);
  }

  std::optional<Axis> time_;
  Axis space_;
};

template <class T>
class Field {
public:
  Field() = default;
  explicit Field(Grid grid, T fill = T{}) : grid_(std::move(grid)), data_(grid_->size(), fill) {}
  Field(Grid grid, std::vector<T> data) : grid_(std::move(grid)), data_(std::move(data)) {
    if (data_.size() != grid_->size()) throw DomainError("field data size does not match grid");
  }

  template <class Fn>
  static Field sample(const Grid& grid, Fn&& fn) {
    Field f(grid);
    for (std::size_t it = 0; it < grid.nt(); ++it) {
      for (std::size_t ix = 0; ix < grid.nx(); ++ix) f(it, ix) = fn(grid.t(it), grid.x(ix));
    }
    return f;
  }

  const Grid& grid() const { return *grid_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t it, std::size_t ix) { return data_[grid_->index(it, ix)]; }
  const T& operator()(std::size_t it, std::size_t ix) const { return data_[grid_->index(it, ix)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(GridPoint p) {
    grid_->require(p);
    return data_[grid_->index(p)];
  }
  const T& at(GridPoint p) const {
    grid_->require(p);
    return data_[grid_->index(p)];
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::span<const T> row(std::size_t it) const {
    return std::span<const T>(data_).subspan(it * grid_->nx(), grid_->nx());
  }

  template <class Fn>
  auto map(Fn&& fn) const {
    using U = std::invoke_result_t<Fn, const T&>;
    std::vector<U> out;
    out.reserve(data_.size());
    for (const auto& v : data_) out.push_back(fn(v));
    return Field<U>(*grid_, std::move(out));
  }

private:
  std::optional<Grid> grid_;
  std::vector<T> data_;
};

using RealField = Field<double>;
using ComplexField = Field<complex>;

/// Field together with a validity mask; invalid points hold zero.
template <class T>
struct MaskedField {
  Field<T> values;
  std::vector<bool> valid;

  std::size_t masked_count() const {
    std::size_t n = 0;
    for (bool v : valid) n += v ? 0 : 1;
    return n;
  }
};

inline ComplexField conjugate(const ComplexField& f) {
  return f.map([](const complex& z) { return std::conj(z); });
}

}  // namespace relqm
