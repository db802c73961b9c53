#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "clab/geometry.hpp"

using namespace clab;

namespace {

Coord c2(int a, int b) {
  Coord c(2);
  c << a, b;
  return c;
}

}  // namespace

TEST_CASE("geometry validates its parameters") {
  CHECK_THROWS(Geometry(1, 8));
  CHECK_THROWS(Geometry(9, 8));
  CHECK_THROWS(Geometry(2, 7));  // odd side
  CHECK_THROWS(Geometry(2, 2));  // too small
  CHECK(Geometry(3, 6).sites() == 216);
}

TEST_CASE("index/coords round-trip and stepping") {
  Geometry g(3, 6);
  for (Index x : {Index(0), Index(5), Index(215), Index(100)}) {
    CHECK(g.index(g.coords(x)) == x);
  }
  // step wraps around each axis
  Index origin = 0;
  CHECK(g.coords(g.step(origin, 0, -1))[0] == 5);
  CHECK(g.coords(g.step(origin, 2, +1))[2] == 1);
  CHECK(g.step(g.step(origin, 1, +1), 1, -1) == origin);
}

TEST_CASE("minimal-image displacement") {
  Geometry g(2, 8);
  CHECK(displacement(c2(0, 0), c2(7, 0), g) == c2(-1, 0));
  CHECK(displacement(c2(0, 0), c2(4, 0), g) == c2(4, 0));  // tie resolves high
  Geometry g3(3, 6);
  Coord same(3);
  same << 1, 1, 1;
  CHECK(displacement(same, same, g3).isZero());

  // antisymmetry off ties; norms agree always
  for (Index x = 0; x < g.sites(); ++x) {
    Coord v = displacement(Index(0), x, g);
    Coord w = displacement(x, Index(0), g);
    CHECK(euclid(v) == doctest::Approx(euclid(w)));
    if (v.cwiseAbs().maxCoeff() < 4) CHECK(v == Coord(-w));
    CHECK(euclid(v) <= 4.0 * std::sqrt(2.0) + 1e-12);
  }
}

TEST_CASE("balls have exact cardinality and do not self-wrap") {
  Geometry g(2, 16);
  CHECK(ball(0, 1, g).size() == 9);
  CHECK(ball(0, 0, g) == SiteSet{0});
  Geometry g3(3, 32);
  CHECK(ball(0, 2, g3).size() == 125);
  CHECK_THROWS(ball(0, 8, g));  // 2R+1 > side
  // membership: all sites have sup-norm distance <= R
  for (Index x : ball(5, 3, g)) CHECK(chebyshev(displacement(Index(5), x, g)) <= 3);
}

TEST_CASE("outer boundary") {
  Geometry g(2, 16);
  CHECK(outer_boundary({0}, g).size() == 4);
  CHECK(outer_boundary({0, g.step(0, 0, +1)}, g).size() == 6);
  // sup-norm ball of radius 1: shell found by brute force enumeration
  const SiteSet b1 = ball(0, 1, g);
  std::set<Index> inside(b1.begin(), b1.end());
  std::set<Index> brute;
  for (Index x = 0; x < g.sites(); ++x) {
    if (inside.count(x)) continue;
    for (int ax = 0; ax < 2; ++ax)
      for (int s : {-1, 1})
        if (inside.count(g.step(x, ax, s))) brute.insert(x);
  }
  const SiteSet shell = outer_boundary(b1, g);
  CHECK(shell.size() == 12);
  CHECK(std::set<Index>(shell.begin(), shell.end()) == brute);
  CHECK_THROWS(outer_boundary({}, g));
}
