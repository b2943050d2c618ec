#include "fluxlab/gauge.hpp"

#include <cmath>
#include <stdexcept>

#include "fluxlab/rng.hpp"
#include "json.hpp"

namespace fluxlab {

ArrowField::ArrowField(const BoxRegion& box)
    : box_(box), values_(2 * static_cast<std::size_t>(box.site_count()), 0.0) {}

int ArrowField::storage_index(Arrow a, int& sign) const {
  if (!box_.contains(a))
    throw std::out_of_range("ArrowField: arrow outside box");
  const Site d = a.to - a.from;
  Site base;
  int slot;
  if (d == kE1) {
    sign = +1; base = a.from; slot = 0;
  } else if (d == Site{-1, 0}) {
    sign = -1; base = a.to; slot = 0;
  } else if (d == kE2) {
    sign = +1; base = a.from; slot = 1;
  } else if (d == Site{0, -1}) {
    sign = -1; base = a.to; slot = 1;
  } else {
    throw std::invalid_argument("ArrowField: endpoints are not nearest neighbors");
  }
  return 2 * box_.site_index(base) + slot;
}

double ArrowField::value(Arrow a) const {
  int sign;
  const int i = storage_index(a, sign);
  return sign * values_[i];
}

void ArrowField::set(Arrow a, double v) {
  int sign;
  const int i = storage_index(a, sign);
  values_[i] = sign * v;
}

void ArrowField::add(Arrow a, double v) {
  int sign;
  const int i = storage_index(a, sign);
  values_[i] += sign * v;
}

void ArrowField::for_each_canonical(
    const std::function<void(Arrow, double)>& fn) const {
  for (int i = 0; i < box_.site_count(); ++i) {
    const Site s = box_.site_at(i);
    if (box_.contains(s + kE1)) fn({s, s + kE1}, values_[2 * i]);
    if (box_.contains(s + kE2)) fn({s, s + kE2}, values_[2 * i + 1]);
  }
}

double ArrowField::max_abs() const {
  double m = 0.0;
  for_each_canonical([&](Arrow, double v) { m = std::max(m, std::abs(v)); });
  return m;
}

double curl(const ArrowField& field, Plaquet f) {
  double s = 0.0;
  for (const Arrow& a : boundary(f)) s += field.value(a);
  return wrap_angle(s);
}

VectorPotential VectorPotential::from_field(const ArrowField& raw) {
  VectorPotential A(raw.box());
  raw.for_each_canonical([&](Arrow a, double v) { A.set(a, v); });
  return A;
}

FluxField::FluxField(const BoxRegion& box)
    : box_(box), values_(static_cast<std::size_t>(box.plaquet_count()), 0.0) {}

FluxField flux_of(const VectorPotential& A) {
  FluxField out(A.box());
  for (const Plaquet& f : A.box().plaquets()) out.set(f, curl(A.field(), f));
  return out;
}

std::string FluxField::to_json() const {
  nlohmann::json j;
  const Site lo = box_.lo(), hi = box_.hi();
  if (lo.x1 == -hi.x1 && lo.x2 == -hi.x2 && hi.x1 == hi.x2 && hi.x1 >= 1) {
    j["box"] = {{"L", hi.x1}};
  } else {
    j["box"] = {{"lo", {lo.x1, lo.x2}}, {"hi", {hi.x1, hi.x2}}};
  }
  j["plaquets"] = nlohmann::json::array();
  for (int i = 0; i < box_.plaquet_count(); ++i) {
    const Plaquet f = box_.plaquet_at(i);
    j["plaquets"].push_back(
        {{"corner", {f.corner.x1, f.corner.x2}}, {"flux", values_[i]}});
  }
  return j.dump(2);
}

FluxField FluxField::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const auto& jb = j.at("box");
  BoxRegion box = jb.contains("L")
                      ? BoxRegion::centered(jb.at("L").get<int>())
                      : BoxRegion({jb.at("lo").at(0).get<int>(), jb.at("lo").at(1).get<int>()},
                                  {jb.at("hi").at(0).get<int>(), jb.at("hi").at(1).get<int>()});
  FluxField out(box);
  for (const auto& jp : j.at("plaquets")) {
    const Plaquet f{{jp.at("corner").at(0).get<int>(), jp.at("corner").at(1).get<int>()}};
    out.set(f, jp.at("flux").get<double>());
  }
  return out;
}

GaugeFunction::GaugeFunction(const BoxRegion& box)
    : box_(box), values_(static_cast<std::size_t>(box.site_count()), 0.0) {}

GaugeFunction GaugeFunction::random(const BoxRegion& box, std::uint64_t seed) {
  GaugeFunction g(box);
  for (int i = 0; i < box.site_count(); ++i) {
    const double u = detail::uniform01(detail::counter_hash(seed, 0x67617567ull, i));
    g.values_[i] = wrap_angle(u * kTwoPi);
  }
  return g;
}

VectorPotential gauge_transform(const VectorPotential& A, const GaugeFunction& g) {
  if (!(A.box() == g.box()))
    throw std::invalid_argument("gauge_transform: box mismatch");
  VectorPotential B(A.box());
  A.field().for_each_canonical([&](Arrow a, double v) {
    B.set(a, v + g.value(a.from) - g.value(a.to));
  });
  return B;
}

void for_each_gauge_arrow(const BoxRegion& box, Plaquet f, int variant,
                          const std::function<void(Arrow, double)>& fn) {
  if (!box.contains(f))
    throw std::invalid_argument("unit flux gauge: plaquet outside box");
  const int f1 = f.corner.x1, f2 = f.corner.x2;
  switch (variant) {
    case 1:
      for (int t = f2 + 1; t <= box.hi().x2; ++t)
        fn({{f1, t}, {f1 + 1, t}}, -1.0);
      break;
    case 3:
      for (int t = box.lo().x2; t <= f2; ++t)
        fn({{f1, t}, {f1 + 1, t}}, +1.0);
      break;
    case 2:
      for (int t = f1 + 1; t <= box.hi().x1; ++t)
        fn({{t, f2}, {t, f2 + 1}}, +1.0);
      break;
    case 4:
      for (int t = box.lo().x1; t <= f1; ++t)
        fn({{t, f2}, {t, f2 + 1}}, -1.0);
      break;
    default:
      throw std::invalid_argument("unit flux gauge: variant must be 1..4");
  }
}

ArrowField unit_flux_gauge(const BoxRegion& box, Plaquet f, int variant) {
  ArrowField out(box);
  for_each_gauge_arrow(box, f, variant,
                       [&](Arrow a, double c) { out.set(a, c); });
  return out;
}

VectorPotential assemble_potential(const FluxField& flux, int variant) {
  const BoxRegion& box = flux.box();
  ArrowField raw(box);
  for (int i = 0; i < box.plaquet_count(); ++i) {
    const double w = flux.value_at(i);
    if (w == 0.0) continue;
    for_each_gauge_arrow(box, box.plaquet_at(i), variant,
                         [&](Arrow a, double c) { raw.add(a, w * c); });
  }
  return VectorPotential::from_field(raw);
}

}  // namespace fluxlab
