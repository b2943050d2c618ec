#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fluxlab/lattice.hpp"
#include "fluxlab/torus.hpp"

namespace fluxlab {

// Real-valued function on directed bonds, antisymmetric under reversal:
// value(a reversed) == -value(a). Storage holds the two canonical bonds
// (+e1 and +e2) per site; lookups resolve the sign.
class ArrowField {
 public:
  explicit ArrowField(const BoxRegion& box);

  const BoxRegion& box() const { return box_; }

  double value(Arrow a) const;
  void set(Arrow a, double v);
  void add(Arrow a, double v);

  // Applies fn to every canonical arrow (from, from+e1) or (from, from+e2)
  // inside the box together with its stored value.
  void for_each_canonical(
      const std::function<void(Arrow, double)>& fn) const;

  double max_abs() const;

 private:
  // slot: 0 = bond to +e1, 1 = bond to +e2; returns sign through `sign`.
  int storage_index(Arrow a, int& sign) const;

  BoxRegion box_;
  std::vector<double> values_;  // 2 slots per site
};

// Sum of the field along the counterclockwise boundary of f, wrapped to
// (-pi, pi].
double curl(const ArrowField& field, Plaquet f);

// Torus-valued bond field: angles are wrapped to (-pi, pi] on write.
class VectorPotential {
 public:
  explicit VectorPotential(const BoxRegion& box) : field_(box) {}
  static VectorPotential from_field(const ArrowField& raw);

  const BoxRegion& box() const { return field_.box(); }
  double value(Arrow a) const { return field_.value(a); }
  void set(Arrow a, double v) { field_.set(a, wrap_angle(v)); }
  void add(Arrow a, double v) { field_.set(a, wrap_angle(field_.value(a) + v)); }

  const ArrowField& field() const { return field_; }

 private:
  ArrowField field_;
};

// One torus angle per plaquet of the box.
class FluxField {
 public:
  explicit FluxField(const BoxRegion& box);

  const BoxRegion& box() const { return box_; }
  double value(Plaquet f) const { return values_.at(box_.plaquet_index(f)); }
  double value_at(int plaquet_index) const { return values_.at(plaquet_index); }
  void set(Plaquet f, double v) { values_.at(box_.plaquet_index(f)) = wrap_angle(v); }
  void set_at(int plaquet_index, double v) { values_.at(plaquet_index) = wrap_angle(v); }

  const std::vector<double>& values() const { return values_; }

  std::string to_json() const;
  static FluxField from_json(const std::string& text);

 private:
  BoxRegion box_;
  std::vector<double> values_;
};

// Curl of a potential on every plaquet of its box.
FluxField flux_of(const VectorPotential& A);

// One angle per site; generates the gauge change A(a) += g(a.from) - g(a.to).
class GaugeFunction {
 public:
  explicit GaugeFunction(const BoxRegion& box);

  const BoxRegion& box() const { return box_; }
  double value(Site s) const { return values_.at(box_.site_index(s)); }
  void set(Site s, double v) { values_.at(box_.site_index(s)) = v; }

  // Pseudorandom angles, deterministic in the seed.
  static GaugeFunction random(const BoxRegion& box, std::uint64_t seed);

 private:
  BoxRegion box_;
  std::vector<double> values_;
};

VectorPotential gauge_transform(const VectorPotential& A, const GaugeFunction& g);

// Elementary potential with curl equal to +1 on plaquet f and 0 on every
// other plaquet of the box. The four variants place the support on a
// half-infinite column or row (clipped to the box):
//   1: bonds (y, y+e1) with y1 = f1, y2 > f2, value -1
//   2: bonds (y, y+e2) with y2 = f2, y1 > f1, value +1
//   3: bonds (y, y+e1) with y1 = f1, y2 <= f2, value +1
//   4: bonds (y, y+e2) with y2 = f2, y1 <= f1, value -1
// Coefficients are returned unwrapped so they can scale arbitrary fluxes.
ArrowField unit_flux_gauge(const BoxRegion& box, Plaquet f, int variant);

// Applies fn(arrow, coefficient) over the in-box support of
// unit_flux_gauge(box, f, variant), canonical arrows only.
void for_each_gauge_arrow(const BoxRegion& box, Plaquet f, int variant,
                          const std::function<void(Arrow, double)>& fn);

// A = sum_f flux(f) * unit_flux_gauge(f), all plaquets sharing one variant.
VectorPotential assemble_potential(const FluxField& flux, int variant = 2);

}  // namespace fluxlab
