#include "fluxlab/lattice.hpp"

#include <stdexcept>
#include <string>

namespace fluxlab {

Plaquet plaquet_of_arrow(Arrow a) {
  const Site d = a.to - a.from;
  if (d == kE1) return {a.from};
  if (d == kE2) return {a.from - kE1};
  if (d == Site{-1, 0}) return {a.from - kE1 - kE2};
  if (d == Site{0, -1}) return {a.from - kE2};
  throw std::invalid_argument("plaquet_of_arrow: endpoints are not nearest neighbors");
}

BoxRegion::BoxRegion(Site lo, Site hi) : lo_(lo), hi_(hi) {
  if (lo.x1 > hi.x1 || lo.x2 > hi.x2)
    throw std::invalid_argument("BoxRegion: lo must be componentwise <= hi");
}

BoxRegion BoxRegion::centered(int half_width) {
  if (half_width < 1)
    throw std::invalid_argument("BoxRegion::centered: half width must be >= 1");
  return BoxRegion({-half_width, -half_width}, {half_width, half_width});
}

int BoxRegion::arrow_count() const {
  const int w = width(), h = height();
  return 2 * ((w - 1) * h + w * (h - 1));
}

int BoxRegion::site_index(Site s) const {
  if (!contains(s))
    throw std::out_of_range("BoxRegion::site_index: site outside box");
  return (s.x2 - lo_.x2) * width() + (s.x1 - lo_.x1);
}

Site BoxRegion::site_at(int index) const {
  if (index < 0 || index >= site_count())
    throw std::out_of_range("BoxRegion::site_at: index " + std::to_string(index));
  return {lo_.x1 + index % width(), lo_.x2 + index / width()};
}

int BoxRegion::plaquet_index(Plaquet f) const {
  if (!contains(f))
    throw std::out_of_range("BoxRegion::plaquet_index: plaquet outside box");
  return (f.corner.x2 - lo_.x2) * (width() - 1) + (f.corner.x1 - lo_.x1);
}

Plaquet BoxRegion::plaquet_at(int index) const {
  if (index < 0 || index >= plaquet_count())
    throw std::out_of_range("BoxRegion::plaquet_at: index " + std::to_string(index));
  const int w = width() - 1;
  return {{lo_.x1 + index % w, lo_.x2 + index / w}};
}

std::vector<Site> BoxRegion::sites() const {
  std::vector<Site> out;
  out.reserve(site_count());
  for (int i = 0; i < site_count(); ++i) out.push_back(site_at(i));
  return out;
}

std::vector<Arrow> BoxRegion::arrows() const {
  std::vector<Arrow> out;
  out.reserve(arrow_count());
  for (int i = 0; i < site_count(); ++i) {
    const Site s = site_at(i);
    if (contains(s + kE1)) {
      out.push_back({s, s + kE1});
      out.push_back({s + kE1, s});
    }
    if (contains(s + kE2)) {
      out.push_back({s, s + kE2});
      out.push_back({s + kE2, s});
    }
  }
  return out;
}

std::vector<Plaquet> BoxRegion::plaquets() const {
  std::vector<Plaquet> out;
  out.reserve(plaquet_count());
  for (int i = 0; i < plaquet_count(); ++i) out.push_back(plaquet_at(i));
  return out;
}

std::vector<Site> BoxRegion::boundary_sites() const {
  std::vector<Site> out;
  for (int i = 0; i < site_count(); ++i) {
    const Site s = site_at(i);
    if (neighbors(s).size() < 4) out.push_back(s);
  }
  return out;
}

std::vector<Site> BoxRegion::neighbors(Site s) const {
  std::vector<Site> out;
  out.reserve(4);
  for (const Site d : {kE1, Site{-1, 0}, kE2, Site{0, -1}})
    if (contains(s + d)) out.push_back(s + d);
  return out;
}

}  // namespace fluxlab
