#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace fluxlab {

struct Site {
  int x1 = 0;
  int x2 = 0;

  friend constexpr bool operator==(Site a, Site b) {
    return a.x1 == b.x1 && a.x2 == b.x2;
  }
  friend constexpr bool operator!=(Site a, Site b) { return !(a == b); }
  friend constexpr Site operator+(Site a, Site b) {
    return {a.x1 + b.x1, a.x2 + b.x2};
  }
  friend constexpr Site operator-(Site a, Site b) {
    return {a.x1 - b.x1, a.x2 - b.x2};
  }
  friend constexpr Site operator*(int c, Site a) { return {c * a.x1, c * a.x2}; }
};

inline constexpr Site kE1{1, 0};
inline constexpr Site kE2{0, 1};

// Euclidean nearest-neighbor test.
inline constexpr bool adjacent(Site a, Site b) {
  int d1 = a.x1 - b.x1, d2 = a.x2 - b.x2;
  return d1 * d1 + d2 * d2 == 1;
}

// Directed nearest-neighbor bond.
struct Arrow {
  Site from;
  Site to;

  constexpr Arrow reversed() const { return {to, from}; }
  friend constexpr bool operator==(Arrow a, Arrow b) {
    return a.from == b.from && a.to == b.to;
  }
  friend constexpr bool operator!=(Arrow a, Arrow b) { return !(a == b); }
};

// Unit square labelled by its lower-left corner.
struct Plaquet {
  Site corner;

  friend constexpr bool operator==(Plaquet a, Plaquet b) {
    return a.corner == b.corner;
  }
  friend constexpr bool operator!=(Plaquet a, Plaquet b) { return !(a == b); }
};

// Counterclockwise boundary of a plaquet, starting with the bottom edge.
inline constexpr std::array<Arrow, 4> boundary(Plaquet f) {
  const Site x = f.corner;
  return {Arrow{x, x + kE1},
          Arrow{x + kE1, x + kE1 + kE2},
          Arrow{x + kE1 + kE2, x + kE2},
          Arrow{x + kE2, x}};
}

// The unique plaquet whose counterclockwise boundary contains the arrow.
// Throws std::invalid_argument if the endpoints are not nearest neighbors.
Plaquet plaquet_of_arrow(Arrow a);

// Finite rectangle of sites, with dense indexing for sites and plaquets.
// Site order is row-major with x2 as the outer coordinate; plaquets are
// ordered the same way by their corner.
class BoxRegion {
 public:
  BoxRegion(Site lo, Site hi);

  // Square box {-L,...,L}^2.
  static BoxRegion centered(int half_width);

  Site lo() const { return lo_; }
  Site hi() const { return hi_; }
  int width() const { return hi_.x1 - lo_.x1 + 1; }
  int height() const { return hi_.x2 - lo_.x2 + 1; }

  int site_count() const { return width() * height(); }
  int plaquet_count() const { return (width() - 1) * (height() - 1); }
  // Directed bonds with both endpoints inside.
  int arrow_count() const;

  bool contains(Site s) const {
    return lo_.x1 <= s.x1 && s.x1 <= hi_.x1 && lo_.x2 <= s.x2 && s.x2 <= hi_.x2;
  }
  bool contains(Arrow a) const { return contains(a.from) && contains(a.to); }
  // All four corner sites inside.
  bool contains(Plaquet f) const {
    return lo_.x1 <= f.corner.x1 && f.corner.x1 < hi_.x1 &&
           lo_.x2 <= f.corner.x2 && f.corner.x2 < hi_.x2;
  }

  int site_index(Site s) const;
  Site site_at(int index) const;
  int plaquet_index(Plaquet f) const;
  Plaquet plaquet_at(int index) const;

  std::vector<Site> sites() const;
  // Every directed bond, each canonical bond immediately followed by its
  // reversal.
  std::vector<Arrow> arrows() const;
  std::vector<Plaquet> plaquets() const;
  // Sites with fewer than four neighbors inside the box.
  std::vector<Site> boundary_sites() const;

  // In-box neighbors of s, in the fixed direction order +e1, -e1, +e2, -e2.
  std::vector<Site> neighbors(Site s) const;

  friend bool operator==(const BoxRegion& a, const BoxRegion& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

 private:
  Site lo_, hi_;
};

}  // namespace fluxlab
