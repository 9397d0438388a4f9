#include "darmois/grid.hpp"

#include <cmath>

namespace darmois {

namespace {

std::int64_t mod_reduce(std::int64_t v, std::int64_t n) {
  std::int64_t r = v % n;
  return r < 0 ? r + n : r;
}

// nearest lattice index for a coordinate, or nullopt if off-lattice
std::optional<std::int64_t> axis_index(const LatticeAxis& ax, double coord, double tol) {
  const double raw = ax.kind == FactorKind::Real ? coord / ax.step : coord;
  const double rounded = std::nearbyint(raw);
  const double scale = ax.kind == FactorKind::Real ? ax.step : 1.0;
  if (std::abs(raw - rounded) * scale > tol) return std::nullopt;
  return static_cast<std::int64_t>(rounded);
}

}  // namespace

DualLattice::DualLattice(LcaGroup group, std::vector<LatticeAxis> axes)
    : group_(std::move(group)), axes_(std::move(axes)) {
  if (axes_.size() != group_.num_factors())
    throw InputError("lattice: one axis per group factor required");
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const Factor& f = group_.factor(i);
    LatticeAxis& ax = axes_[i];
    if (f.kind == FactorKind::Circle)
      throw InputError("lattice: circle factors cannot be gridded");
    if (ax.kind != f.kind) throw InputError("lattice: axis kind mismatch");
    if (f.kind == FactorKind::Cyclic) {
      ax.modulus = f.n;
      ax.lo = 0;
      ax.hi = f.n - 1;
    }
    if (f.kind == FactorKind::Real && !(ax.step > 0))
      throw InputError("lattice: real axis needs positive step");
    if (ax.hi < ax.lo) throw InputError("lattice: empty axis");
  }
  strides_.assign(axes_.size(), 1);
  size_ = 1;
  for (std::size_t i = axes_.size(); i-- > 0;) {
    strides_[i] = size_;
    size_ *= static_cast<std::size_t>(axes_[i].extent());
  }
}

DualLattice DualLattice::symmetric(const LcaGroup& group, std::int64_t int_radius,
                                   std::int64_t real_points, double real_radius) {
  std::vector<LatticeAxis> axes;
  axes.reserve(group.num_factors());
  for (const Factor& f : group.factors()) {
    LatticeAxis ax;
    ax.kind = f.kind;
    switch (f.kind) {
      case FactorKind::Integers:
        if (int_radius < 0) throw InputError("lattice: negative radius");
        ax.lo = -int_radius;
        ax.hi = int_radius;
        break;
      case FactorKind::Real: {
        if (real_points < 1 || real_points % 2 == 0)
          throw InputError("lattice: real axes need an odd positive point count");
        if (real_points == 1) {
          ax.lo = ax.hi = 0;
          ax.step = 1.0;
        } else {
          if (!(real_radius > 0)) throw InputError("lattice: real axes need a radius");
          const std::int64_t half = (real_points - 1) / 2;
          ax.lo = -half;
          ax.hi = half;
          ax.step = real_radius / static_cast<double>(half);
        }
        break;
      }
      case FactorKind::Cyclic:
        ax.lo = 0;
        ax.hi = f.n - 1;
        ax.modulus = f.n;
        break;
      case FactorKind::Circle:
        throw InputError("lattice: circle factors cannot be gridded");
    }
    axes.push_back(ax);
  }
  return DualLattice(group, std::move(axes));
}

Element DualLattice::element_at(std::size_t flat) const {
  Element e(group_);
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const LatticeAxis& ax = axes_[i];
    const auto span = static_cast<std::size_t>(ax.extent());
    const std::int64_t idx = ax.lo + static_cast<std::int64_t>(flat / strides_[i] % span);
    switch (ax.kind) {
      case FactorKind::Real: e.set_x(i, static_cast<double>(idx) * ax.step); break;
      case FactorKind::Integers:
      case FactorKind::Cyclic: e.set_k(i, idx); break;
      case FactorKind::Circle: break;
    }
  }
  return e;
}

std::vector<std::int64_t> DualLattice::indices_at(std::size_t flat) const {
  std::vector<std::int64_t> idx(axes_.size());
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const auto span = static_cast<std::size_t>(axes_[i].extent());
    idx[i] = axes_[i].lo + static_cast<std::int64_t>(flat / strides_[i] % span);
  }
  return idx;
}

std::size_t DualLattice::flat_from_indices(const std::vector<std::int64_t>& idx) const {
  if (idx.size() != axes_.size()) throw InputError("lattice: wrong index arity");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (idx[i] < axes_[i].lo || idx[i] > axes_[i].hi)
      throw InputError("lattice: index out of range");
    flat += strides_[i] * static_cast<std::size_t>(idx[i] - axes_[i].lo);
  }
  return flat;
}

std::optional<std::size_t> DualLattice::flat_index(const Element& y, double tol) const {
  if (y.group() != group_) return std::nullopt;
  std::size_t flat = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const LatticeAxis& ax = axes_[i];
    std::int64_t idx = 0;
    switch (ax.kind) {
      case FactorKind::Real: {
        auto j = axis_index(ax, y.x(i), tol);
        if (!j) return std::nullopt;
        idx = *j;
        break;
      }
      case FactorKind::Integers: idx = y.k(i); break;
      case FactorKind::Cyclic: idx = mod_reduce(y.k(i), ax.modulus); break;
      case FactorKind::Circle: return std::nullopt;
    }
    if (idx < ax.lo || idx > ax.hi) return std::nullopt;
    flat += strides_[i] * static_cast<std::size_t>(idx - ax.lo);
  }
  return flat;
}

std::optional<std::vector<std::int64_t>> DualLattice::shift_offsets(const Element& h,
                                                                    double tol) const {
  if (h.group() != group_) return std::nullopt;
  std::vector<std::int64_t> off(axes_.size(), 0);
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const LatticeAxis& ax = axes_[i];
    switch (ax.kind) {
      case FactorKind::Real: {
        auto j = axis_index(ax, h.x(i), tol);
        if (!j) return std::nullopt;
        off[i] = *j;
        break;
      }
      case FactorKind::Integers: off[i] = h.k(i); break;
      case FactorKind::Cyclic: off[i] = mod_reduce(h.k(i), ax.modulus); break;
      case FactorKind::Circle: return std::nullopt;
    }
  }
  return off;
}

namespace {

template <class T>
GridFn<T> finite_difference_impl(const GridFn<T>& f, const Element& h) {
  const DualLattice& lat = f.lattice();
  auto off = lat.shift_offsets(h);
  if (!off) throw InputError("finite difference: shift is not a lattice vector");

  std::vector<LatticeAxis> axes = lat.axes();
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i].kind == FactorKind::Cyclic) continue;  // wraps, no shrink
    if ((*off)[i] >= 0)
      axes[i].hi -= (*off)[i];
    else
      axes[i].lo -= (*off)[i];
    if (axes[i].hi < axes[i].lo)
      throw InputError("finite difference: shift exceeds the grid");
  }
  auto shrunk = std::make_shared<DualLattice>(lat.group(), std::move(axes));

  std::vector<T> vals(shrunk->size());
  std::vector<std::int64_t> idx;
  for (std::size_t i = 0; i < shrunk->size(); ++i) {
    idx = shrunk->indices_at(i);
    std::vector<std::int64_t> shifted = idx;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      shifted[a] += (*off)[a];
      if (lat.axes()[a].kind == FactorKind::Cyclic)
        shifted[a] = mod_reduce(shifted[a], lat.axes()[a].modulus);
    }
    vals[i] = f.at(lat.flat_from_indices(shifted)) - f.at(lat.flat_from_indices(idx));
  }
  return GridFn<T>(std::move(shrunk), std::move(vals));
}

}  // namespace

RealGrid finite_difference(const RealGrid& f, const Element& h) {
  return finite_difference_impl(f, h);
}
ComplexGrid finite_difference(const ComplexGrid& f, const Element& h) {
  return finite_difference_impl(f, h);
}

}  // namespace darmois
