#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "clab/env.hpp"

using namespace clab;

TEST_CASE("environment construction enforces invariants") {
  Geometry g(2, 4);
  CHECK_THROWS(Environment::from_edges(g, {{0, 0, 1.0}}, {}));   // self edge
  CHECK_THROWS(Environment::from_edges(g, {{0, 99, 1.0}}, {}));  // out of range
  CHECK_THROWS(Environment::from_edges(g, {{0, 1, 1.0}, {1, 0, 2.0}}, {}));  // duplicate
  CHECK_THROWS(Environment::from_edges(g, {{0, 1, -1.0}}, {}));  // negative weight
  CHECK_THROWS(Environment::from_edges(g, {{0, 1, 1.0}}, {}));   // isolated sites: pi = 0
}

TEST_CASE("constant nearest-neighbor field: pi = nu = 2d") {
  Geometry g(2, 8);
  Environment env = sample_iid_nn(Marginal::constant(1.0), g, 7);
  env.validate();
  CHECK(env.connected());
  CHECK(env.edge_count() == 2 * g.sites());
  for (Index x = 0; x < env.sites(); ++x) {
    CHECK(env.pi()[x] == doctest::Approx(4.0));
    CHECK(env.nu()[x] == doctest::Approx(4.0));
  }
}

TEST_CASE("uniform marginal: range bound and determinism") {
  Geometry g(2, 8);
  Environment a = sample_iid_nn(Marginal::uniform(1, 2), g, 42);
  Environment b = sample_iid_nn(Marginal::uniform(1, 2), g, 42);
  Environment c = sample_iid_nn(Marginal::uniform(1, 2), g, 43);
  for (const Edge& e : a.edges()) {
    CHECK(e.w >= 1.0);
    CHECK(e.w <= 2.0);
  }
  const auto ea = a.edges(), eb = b.edges();
  REQUIRE(ea.size() == eb.size());
  bool identical = true, differs_from_c = false;
  for (std::size_t i = 0; i < ea.size(); ++i) identical &= ea[i].w == eb[i].w;
  for (std::size_t i = 0; i < ea.size(); ++i) differs_from_c |= ea[i].w != c.edges()[i].w;
  CHECK(identical);
  CHECK(differs_from_c);
  CHECK_THROWS(sample_iid_nn(Marginal::uniform(0, 1), g, 1));  // mass at 0
}

TEST_CASE("long-range percolation sampler") {
  Geometry g(2, 16);
  Environment env = sample_lrp(3.5, 1.0, g, 5);
  env.validate();
  // nearest-neighbor edges always present with conductance 1
  for (Index x = 0; x < env.sites(); ++x)
    for (int ax = 0; ax < 2; ++ax) CHECK(env.conductance(x, g.step(x, ax, +1)) == 1.0);
  // zero-one conductances
  for (const Edge& e : env.edges()) CHECK((e.w == 1.0));
  // beta = 0 reduces to the simple-random-walk environment
  Environment srw = sample_lrp(3.5, 0.0, g, 5);
  CHECK(srw.edge_count() == 2 * g.sites());
  CHECK_THROWS(sample_lrp(1.5, 1.0, g, 5));  // s <= d

  // empirical density at distance 2 along an axis ~ 2^{-3.5} over many seeds
  int present = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Environment e = sample_lrp(3.5, 1.0, g, 1000 + seed);
    for (Index x = 0; x < e.sites(); ++x) {
      present += e.conductance(x, g.step(g.step(x, 0, +1), 0, +1)) == 1.0;
      ++total;
    }
  }
  const double p = std::pow(2.0, -3.5);
  const double phat = static_cast<double>(present) / total;
  const double sd = std::sqrt(p * (1 - p) / total);
  CHECK(std::abs(phat - p) < 5 * sd);
}

TEST_CASE("stable-like sampler") {
  Geometry g(2, 16);
  Environment env = sample_stable_like(3.0, g, 9);
  env.validate();
  for (Index x = 0; x < env.sites(); ++x)
    for (int ax = 0; ax < 2; ++ax) CHECK(env.conductance(x, g.step(x, ax, +1)) == 1.0);
  // present long edges carry exactly |v|^{-(d+s)}
  const double w2 = std::pow(2.0, -5.0);  // distance 2, d=2, s=3
  bool saw_dist2 = false;
  for (const Edge& e : env.edges()) {
    const double d2 = dist2(e.a, e.b, g);
    if (d2 == 4.0) {
      CHECK(e.w == doctest::Approx(w2));
      saw_dist2 = true;
    }
  }
  CHECK(saw_dist2);
  CHECK_THROWS(sample_stable_like(1.5, g, 9));  // s <= 2
}

TEST_CASE("localization: three-case conductances and reference measure") {
  Geometry g(2, 36);
  Environment env = sample_lrp(3.5, 1.0, g, 3);
  const int R = 2;
  LocalizedEnvironment loc = localize(env, R);
  loc.env.validate();
  for (Index x = 0; x < g.sites(); ++x) {
    const int rx = chebyshev(displacement(Index(0), x, g));
    // nuR cases
    if (rx <= 2 * R) CHECK(loc.nuR[x] == doctest::Approx(env.nu()[x]));
    else if (rx <= 4 * R) CHECK(loc.nuR[x] == doctest::Approx(1.0 + env.nu()[x]));
    else CHECK(loc.nuR[x] == 1.0);
    for (int ax = 0; ax < 2; ++ax) {
      const Index y = g.step(x, ax, +1);
      const int ry = chebyshev(displacement(Index(0), y, g));
      const double expect = (rx <= 2 * R || ry <= 2 * R) ? env.conductance(x, y) : 1.0;
      CHECK(loc.env.conductance(x, y) == doctest::Approx(expect));
    }
  }
  // long edges survive only when touching B(0,2R)
  for (const Edge& e : loc.env.edges()) {
    if (dist2(e.a, e.b, g) <= 1.0) continue;
    const bool touches = chebyshev(displacement(Index(0), e.a, g)) <= 2 * R ||
                         chebyshev(displacement(Index(0), e.b, g)) <= 2 * R;
    CHECK(touches);
  }
  CHECK_THROWS(localize(env, 5));  // 8R >= side
}

TEST_CASE("moment report") {
  Geometry g(2, 8);
  Environment ones = sample_iid_nn(Marginal::constant(1.0), g, 1);
  MomentReport rep = moment_report(ones, 2.0, 3.0);
  CHECK(rep.nu_p_norm == doctest::Approx(4.0));
  CHECK(rep.inv_c_q_norm == doctest::Approx(1.0));
  CHECK(rep.mean_pi == doctest::Approx(4.0));
  CHECK(rep.moment_flag == (1.0 / 2 + 1.0 / 3 < 1.0));

  Environment uni = sample_iid_nn(Marginal::uniform(1, 2), g, 2);
  MomentReport u = moment_report(uni, 1.5, 1.5);
  CHECK(u.inv_c_q_norm <= 1.0);
  CHECK(u.inv_c_q_norm >= 0.5);

  // an environment with a zero nearest-neighbor edge is rejected
  std::vector<Edge> edges = ones.edges();
  edges.front().w = 0.0;
  Geometry g4(2, 4);
  std::vector<Edge> small;
  Environment base = sample_iid_nn(Marginal::constant(1.0), g4, 1);
  small = base.edges();
  small.front().w = 0.0;
  Environment broken = Environment::from_edges(g4, small, {});
  CHECK_THROWS(moment_report(broken, 1.5, 1.5));
}

TEST_CASE("trap spec and edge sets") {
  TrapSpec spec = TrapSpec::with_defaults(3, 3);
  CHECK(spec.schedule == std::vector<int>{1, 3, 9});
  CHECK(spec.aL(9) == doctest::Approx(std::pow(9.0, -2.0 / 1.8)));
  CHECK(spec.bL(9) == doctest::Approx(std::pow(9.0, 2.0 / 1.8)));
  // the exponent choices keep both moment conditions in the target window
  CHECK(1.0 / spec.p + 1.0 / spec.q > 1.0);
  CHECK(1.0 / spec.pPrime + 1.0 / spec.qPrime > 1.0);

  Geometry g(3, 64);
  TrapEdgeSet set = trap_edge_set(spec, 3, 0, g);
  CHECK(set.segment.size() == 9);                 // L interior edges
  CHECK(set.fringe.size() == 2 + (9 + 1) * 4);    // 2 ends + (L+1)(2d-2) transverse
  for (const Edge& e : set.segment) CHECK(e.w == doctest::Approx(spec.bL(9)));
  for (const Edge& e : set.fringe) CHECK(e.w == doctest::Approx(spec.aL(9)));
  // all edges are distinct nearest-neighbor pairs
  std::set<std::pair<Index, Index>> seen;
  for (const auto* part : {&set.segment, &set.fringe})
    for (const Edge& e : *part) {
      CHECK(dist2(e.a, e.b, g) == 1.0);
      CHECK(seen.emplace(std::min(e.a, e.b), std::max(e.a, e.b)).second);
    }
}

TEST_CASE("lambda offsets") {
  CHECK(lambda_offsets(1, 3).size() == 6 * 1 * (2 * 3 - 1) + 2 * 3 - 2);  // 34
  const auto offs = lambda_offsets(3, 3);
  CHECK(offs.size() == 94);  // 30L + 4 at d=3
  // symmetric under negation
  std::set<std::vector<int>> keys;
  for (const Coord& z : offs) keys.insert({z[0], z[1], z[2]});
  for (const Coord& z : offs) {
    CHECK(keys.count({-z[0], -z[1], -z[2]}) == 1);
    CHECK(!(z[0] == 0 && z[1] == 0 && z[2] == 0));
  }
}

TEST_CASE("planted traps") {
  Geometry g(3, 64);
  TrapSpec spec = TrapSpec::with_defaults(3, 3);
  // k=1 gives the all-ones environment (a_1 = b_1 = 1)
  Environment flat = plant_trap(spec, 1, 0, g);
  for (const Edge& e : flat.edges()) CHECK(e.w == doctest::Approx(1.0));

  Environment one = plant_trap(spec, 3, 5, g);
  one.validate();
  const TrapEdgeSet set = trap_edge_set(spec, 3, 5, g);
  for (const Edge& e : set.segment) CHECK(one.conductance(e.a, e.b) == doctest::Approx(spec.bL(9)));
  for (const Edge& e : set.fringe) CHECK(one.conductance(e.a, e.b) == doctest::Approx(spec.aL(9)));
  CHECK(one.edge_count() == 3 * g.sites());
}

TEST_CASE("sampled trap environments have coherent traces") {
  Geometry g(3, 32);
  TrapSpec spec = TrapSpec::with_defaults(3, 2);
  auto [env, trace] = sample_trap(spec, g, 17);
  env.validate();
  REQUIRE(trace.ell.size() == static_cast<std::size_t>(g.sites()));
  for (Index x = 0; x < g.sites(); ++x) {
    CHECK(trace.ell[x] >= 1);
    CHECK(trace.m[x] >= 1);
  }
  // implication: a flagged site never has a flagged site in its Lambda set
  const auto offs = lambda_offsets(spec.L(2), 3);
  for (Index x : trace.flagged) {
    CHECK(trace.is_flagged(x));
    for (const Coord& z : offs) CHECK(!trace.is_flagged(g.shift(x, z)));
  }
  // deterministic given the seed
  auto [env2, trace2] = sample_trap(spec, g, 17);
  CHECK(trace2.flagged == trace.flagged);
}

TEST_CASE("planted long edge") {
  Geometry g(3, 16);
  Environment base = sample_lrp(4.0, 1.0, g, 31);
  Coord vy(3);
  vy << 5, 0, 0;
  const Index y = g.index(vy);
  Environment env = plant_long_edge(base, 0, y);
  env.validate();
  CHECK(env.conductance(0, y) == 1.0);
  // y carries no other long edge
  for (int k = 0; k < env.degree(y); ++k) {
    const Index z = env.neighbors(y)[k];
    if (z == 0) continue;
    CHECK(dist2(y, z, g) == 1.0);
  }
  CHECK_THROWS(plant_long_edge(base, 0, g.step(0, 0, +1)));  // adjacent
}
