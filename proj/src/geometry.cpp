#include "clab/geometry.hpp"

#include <algorithm>
#include <unordered_set>

namespace clab {

SiteSet outer_boundary(const SiteSet& A, const Geometry& g) {
  if (A.empty()) throw std::invalid_argument("outer_boundary: empty set");
  if (static_cast<Index>(A.size()) >= g.sites())
    throw std::invalid_argument("outer_boundary: set covers the whole torus");
  std::unordered_set<Index> in(A.begin(), A.end());
  std::unordered_set<Index> bd;
  for (Index a : A)
    for (int ax = 0; ax < g.d; ++ax)
      for (int s : {-1, 1}) {
        Index n = g.step(a, ax, s);
        if (!in.count(n)) bd.insert(n);
      }
  SiteSet out(bd.begin(), bd.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace clab
