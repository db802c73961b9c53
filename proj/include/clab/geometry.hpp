#ifndef CLAB_GEOMETRY_HPP
#define CLAB_GEOMETRY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace clab {

using Index = std::int64_t;

// Integer coordinate / displacement vector, dimension fixed at runtime (d <= 8).
using Coord = Eigen::Matrix<int, Eigen::Dynamic, 1, 0, 8, 1>;

// d-dimensional discrete torus of even side N, the finite-volume stand-in
// for the infinite lattice. Sites are encoded row-major as flat indices.
struct Geometry {
  int d = 0;
  int side = 0;

  Geometry() = default;
  Geometry(int d_, int side_) : d(d_), side(side_) {
    if (d < 2 || d > 8) throw std::invalid_argument("Geometry: need 2 <= d <= 8");
    if (side < 4 || side % 2 != 0)
      throw std::invalid_argument("Geometry: side must be even and >= 4");
  }

  Index sites() const {
    Index n = 1;
    for (int i = 0; i < d; ++i) n *= side;
    return n;
  }

  Index index(const Coord& c) const {
    Index idx = 0;
    for (int i = 0; i < d; ++i) {
      int v = c[i] % side;
      if (v < 0) v += side;
      idx = idx * side + v;
    }
    return idx;
  }

  Coord coords(Index idx) const {
    Coord c(d);
    for (int i = d - 1; i >= 0; --i) {
      c[i] = static_cast<int>(idx % side);
      idx /= side;
    }
    return c;
  }

  // Site shifted by one lattice unit along `axis` (sign = +1 / -1).
  Index step(Index idx, int axis, int sign) const {
    Index stride = 1;
    for (int i = d - 1; i > axis; --i) stride *= side;
    int v = static_cast<int>((idx / stride) % side);
    int w = v + sign;
    if (w < 0) w += side;
    if (w >= side) w -= side;
    return idx + static_cast<Index>(w - v) * stride;
  }

  Index shift(Index idx, const Coord& v) const { return index(Coord(coords(idx) + v)); }
};

// Minimal-image displacement y - x with components in (-side/2, side/2].
// A component at exactly side/2 resolves to +side/2.
inline Coord displacement(const Coord& x, const Coord& y, const Geometry& g) {
  if (x.size() != g.d || y.size() != g.d)
    throw std::invalid_argument("displacement: dimension mismatch");
  Coord v(g.d);
  const int half = g.side / 2;
  for (int i = 0; i < g.d; ++i) {
    int w = (y[i] - x[i]) % g.side;
    if (w < 0) w += g.side;
    if (w > half) w -= g.side;
    v[i] = w;
  }
  return v;
}

inline Coord displacement(Index x, Index y, const Geometry& g) {
  return displacement(g.coords(x), g.coords(y), g);
}

inline double euclid(const Coord& v) { return v.cast<double>().norm(); }
inline int chebyshev(const Coord& v) { return v.cwiseAbs().maxCoeff(); }

// Squared Euclidean length of the minimal-image displacement.
inline double dist2(Index x, Index y, const Geometry& g) {
  return displacement(x, y, g).cast<double>().squaredNorm();
}

using SiteSet = std::vector<Index>;

// B(x,R) = x + ([-R,R]^d), the sup-norm ball. Must not self-wrap.
inline SiteSet ball(Index center, int R, const Geometry& g) {
  if (R < 0) throw std::invalid_argument("ball: R < 0");
  if (2 * R + 1 > g.side) throw std::invalid_argument("ball: R too large for torus");
  Coord c = g.coords(center);
  SiteSet out;
  const int w = 2 * R + 1;
  Index count = 1;
  for (int i = 0; i < g.d; ++i) count *= w;
  out.reserve(count);
  Coord off(g.d);
  off.setConstant(-R);
  for (Index k = 0; k < count; ++k) {
    out.push_back(g.index(Coord(c + off)));
    for (int i = g.d - 1; i >= 0; --i) {
      if (++off[i] <= R) break;
      off[i] = -R;
    }
  }
  return out;
}

// Sites not in A with a nearest neighbor in A.
SiteSet outer_boundary(const SiteSet& A, const Geometry& g);

}  // namespace clab

#endif
