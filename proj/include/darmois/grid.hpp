#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "darmois/errors.hpp"
#include "darmois/group.hpp"

namespace darmois {

// One axis of a rectangular lattice over a group factor. Continuous Real axes
// are sampled as index * step; Integers axes are exact; Cyclic axes always
// cover the full residue range and wrap. Circle factors are not griddable.
struct LatticeAxis {
  FactorKind kind = FactorKind::Integers;
  std::int64_t lo = 0, hi = 0;  // inclusive index range
  double step = 1.0;            // Real only
  std::int64_t modulus = 0;     // Cyclic only

  std::int64_t extent() const { return hi - lo + 1; }
  bool operator==(const LatticeAxis&) const = default;
};

class DualLattice {
 public:
  DualLattice(LcaGroup group, std::vector<LatticeAxis> axes);

  // Integers axes span [-int_radius, int_radius]; Real axes put real_points
  // equally spaced points on [-real_radius, real_radius] (odd count, so 0 is
  // included); Cyclic axes cover the full group.
  static DualLattice symmetric(const LcaGroup& group, std::int64_t int_radius,
                               std::int64_t real_points = 0, double real_radius = 0.0);

  const LcaGroup& group() const { return group_; }
  const std::vector<LatticeAxis>& axes() const { return axes_; }
  std::size_t size() const { return size_; }

  Element element_at(std::size_t flat) const;
  std::vector<std::int64_t> indices_at(std::size_t flat) const;
  std::size_t flat_from_indices(const std::vector<std::int64_t>& idx) const;

  // Flat index of a group element if it lies on the lattice.
  std::optional<std::size_t> flat_index(const Element& y, double tol = 1e-9) const;

  // Per-axis index offsets realizing translation by h, if h is a lattice
  // vector (Real coordinates must be near-integer multiples of the step).
  std::optional<std::vector<std::int64_t>> shift_offsets(const Element& h,
                                                         double tol = 1e-9) const;

  bool operator==(const DualLattice&) const = default;

 private:
  LcaGroup group_;
  std::vector<LatticeAxis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

template <class T>
class GridFn {
 public:
  GridFn(std::shared_ptr<const DualLattice> lattice, std::vector<T> values)
      : lat_(std::move(lattice)), vals_(std::move(values)) {
    if (!lat_ || vals_.size() != lat_->size())
      throw InputError("grid function: value count does not match lattice size");
  }

  static GridFn tabulate(std::shared_ptr<const DualLattice> lattice,
                         const std::function<T(const Element&)>& fn) {
    std::vector<T> v(lattice->size());
    for (std::size_t i = 0; i < lattice->size(); ++i) v[i] = fn(lattice->element_at(i));
    return GridFn(std::move(lattice), std::move(v));
  }

  const DualLattice& lattice() const { return *lat_; }
  std::shared_ptr<const DualLattice> lattice_ptr() const { return lat_; }
  std::size_t size() const { return vals_.size(); }
  const std::vector<T>& values() const { return vals_; }
  T at(std::size_t flat) const { return vals_.at(flat); }

  T value_at(const Element& y, double tol = 1e-9) const {
    auto idx = lat_->flat_index(y, tol);
    if (!idx) throw InputError("grid function: evaluation off the lattice");
    return vals_[*idx];
  }

 private:
  std::shared_ptr<const DualLattice> lat_;
  std::vector<T> vals_;
};

using RealGrid = GridFn<double>;
using ComplexGrid = GridFn<std::complex<double>>;

// (Delta_h f)(y) = f(y + h) - f(y). The domain shrinks on Real and Integers
// axes so that y + h stays inside; Cyclic axes wrap and keep their extent.
// Throws InputError if h is not a lattice vector or the domain empties.
RealGrid finite_difference(const RealGrid& f, const Element& h);
ComplexGrid finite_difference(const ComplexGrid& f, const Element& h);

}  // namespace darmois
