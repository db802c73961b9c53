#include "clab/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace clab {

// ---- Environment --------------------------------------------------------

Environment Environment::from_edges(const Geometry& g, std::vector<Edge> edges,
                                    EnvMeta meta) {
  const Index n = g.sites();
  for (auto& e : edges) {
    if (e.a == e.b) throw std::invalid_argument("Environment: self edge");
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n)
      throw std::invalid_argument("Environment: site index out of range");
    if (!(e.w >= 0.0) || !std::isfinite(e.w))
      throw std::invalid_argument("Environment: conductance must be finite and >= 0");
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& l, const Edge& r) { return l.a < r.a || (l.a == r.a && l.b < r.b); });
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (edges[i].a == edges[i - 1].a && edges[i].b == edges[i - 1].b)
      throw std::invalid_argument("Environment: duplicate edge");
  edges.erase(std::remove_if(edges.begin(), edges.end(),
                             [](const Edge& e) { return e.w == 0.0; }),
              edges.end());

  Environment env;
  env.g = g;
  env.meta = std::move(meta);
  env.off_.assign(n + 1, 0);
  for (const auto& e : edges) {
    ++env.off_[e.a + 1];
    ++env.off_[e.b + 1];
  }
  std::partial_sum(env.off_.begin(), env.off_.end(), env.off_.begin());
  env.nbr_.resize(env.off_[n]);
  env.w_.resize(env.off_[n]);
  std::vector<Index> fill(env.off_.begin(), env.off_.end() - 1);
  for (const auto& e : edges) {
    env.nbr_[fill[e.a]] = e.b;
    env.w_[fill[e.a]++] = e.w;
    env.nbr_[fill[e.b]] = e.a;
    env.w_[fill[e.b]++] = e.w;
  }
  // Rows sorted by neighbor index: deterministic inverse-CDF order and
  // binary-searchable lookups.
  for (Index x = 0; x < n; ++x) {
    const Index lo = env.off_[x], hi = env.off_[x + 1];
    std::vector<std::pair<Index, double>> row;
    row.reserve(hi - lo);
    for (Index k = lo; k < hi; ++k) row.emplace_back(env.nbr_[k], env.w_[k]);
    std::sort(row.begin(), row.end());
    for (Index k = lo; k < hi; ++k) {
      env.nbr_[k] = row[k - lo].first;
      env.w_[k] = row[k - lo].second;
    }
  }
  env.cumw_.resize(env.w_.size());
  env.pi_ = Eigen::VectorXd::Zero(n);
  env.nu_ = Eigen::VectorXd::Zero(n);
  for (Index x = 0; x < n; ++x) {
    double run = 0.0;
    for (Index k = env.off_[x]; k < env.off_[x + 1]; ++k) {
      run += env.w_[k];
      env.cumw_[k] = run;
      env.nu_[x] += env.w_[k] * dist2(x, env.nbr_[k], g);
    }
    env.pi_[x] = run;
    if (!(run > 0.0) || !std::isfinite(run))
      throw std::invalid_argument("Environment: pi(x) must be positive and finite");
  }
  return env;
}

double Environment::conductance(Index a, Index b) const {
  const Index lo = off_[a], hi = off_[a + 1];
  auto it = std::lower_bound(nbr_.begin() + lo, nbr_.begin() + hi, b);
  if (it == nbr_.begin() + hi || *it != b) return 0.0;
  return w_[it - nbr_.begin()];
}

std::vector<Edge> Environment::edges() const {
  std::vector<Edge> out;
  out.reserve(nbr_.size() / 2);
  const Index n = sites();
  for (Index x = 0; x < n; ++x)
    for (Index k = off_[x]; k < off_[x + 1]; ++k)
      if (nbr_[k] > x) out.push_back({x, nbr_[k], w_[k]});
  return out;
}

void Environment::validate() const {
  const Index n = sites();
  if (n != g.sites()) throw std::logic_error("Environment: size mismatch");
  for (Index x = 0; x < n; ++x) {
    double pi = 0.0, nu = 0.0;
    for (Index k = off_[x]; k < off_[x + 1]; ++k) {
      const Index y = nbr_[k];
      if (y == x) throw std::logic_error("Environment: nonzero diagonal");
      if (conductance(y, x) != w_[k]) throw std::logic_error("Environment: asymmetric edge");
      pi += w_[k];
      nu += w_[k] * dist2(x, y, g);
    }
    if (!(pi > 0.0) || !std::isfinite(pi)) throw std::logic_error("Environment: bad pi");
    if (std::abs(pi - pi_[x]) > 1e-9 * (1.0 + pi) || std::abs(nu - nu_[x]) > 1e-9 * (1.0 + nu))
      throw std::logic_error("Environment: stale pi/nu cache");
  }
}

bool Environment::connected() const {
  const Index n = sites();
  std::vector<char> seen(n, 0);
  std::vector<Index> stack{0};
  seen[0] = 1;
  Index cnt = 1;
  while (!stack.empty()) {
    Index x = stack.back();
    stack.pop_back();
    for (Index k = off_[x]; k < off_[x + 1]; ++k)
      if (!seen[nbr_[k]]) {
        seen[nbr_[k]] = 1;
        ++cnt;
        stack.push_back(nbr_[k]);
      }
  }
  return cnt == n;
}

// ---- nearest-neighbor edge helpers -------------------------------------

namespace {

std::vector<Edge> nn_edges(const Geometry& g, double w = 1.0) {
  std::vector<Edge> edges;
  const Index n = g.sites();
  edges.reserve(n * g.d);
  for (Index x = 0; x < n; ++x)
    for (int ax = 0; ax < g.d; ++ax) edges.push_back({x, g.step(x, ax, +1), w});
  // On the torus each canonical NN pair appears exactly once this way.
  return edges;
}

// Canonical enumeration of unordered displacement classes. Calls
// fn(v, self_paired) once per class with 2 <= |v|^2 and |v| <= rmax.
template <typename F>
void for_each_long_class(const Geometry& g, double rmax, F&& fn) {
  const int half = g.side / 2;
  Coord v(g.d);
  v.setConstant(-half + 1);
  const Index total = g.sites();
  for (Index it = 0; it < total; ++it) {
    double n2 = v.cast<double>().squaredNorm();
    if (n2 >= 2.0 && std::sqrt(n2) <= rmax) {
      // normalize -v back into (-side/2, side/2]
      Coord nv(g.d);
      for (int i = 0; i < g.d; ++i) nv[i] = (v[i] == half) ? half : -v[i];
      bool self_paired = true, canonical = true;
      for (int i = 0; i < g.d; ++i) {
        if (v[i] != nv[i]) {
          self_paired = false;
          canonical = v[i] > nv[i];
          break;
        }
      }
      if (canonical) fn(Coord(v), self_paired);
    }
    for (int i = g.d - 1; i >= 0; --i) {
      if (++v[i] <= half) break;
      v[i] = -half + 1;
    }
  }
}

// Draws `count` distinct unordered pairs {x, x+v} and appends them with
// weight w. For self-paired classes x and x+v generate the same pair.
void place_class_edges(const Geometry& g, const Coord& v, bool self_paired,
                       std::uint64_t count, double w, RngStream& rng,
                       std::vector<Edge>& out) {
  const Index n = g.sites();
  std::unordered_set<Index> taken;
  taken.reserve(count * 2);
  std::uint64_t placed = 0;
  while (placed < count) {
    Index x = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    Index y = g.shift(x, v);
    Index key = self_paired ? std::min(x, y) : x;
    if (!taken.insert(key).second) continue;
    out.push_back({x, y, w});
    ++placed;
  }
}

}  // namespace

// ---- samplers -----------------------------------------------------------

Environment sample_iid_nn(const Marginal& dist, const Geometry& g, std::uint64_t seed) {
  if (!(dist.a > 0.0)) throw std::invalid_argument("sample_iid_nn: marginal must be supported on (0,inf)");
  RngStream rng(seed, /*stream=*/0);
  auto edges = nn_edges(g);
  for (auto& e : edges) e.w = dist.sample(rng);
  return Environment::from_edges(g, std::move(edges),
                                 {"iid-nn", "{}", seed});
}

Environment sample_lrp(double s, double beta, const Geometry& g, std::uint64_t seed,
                       int rmax) {
  if (s <= g.d) throw std::invalid_argument("sample_lrp: need s > d");
  const double cap = rmax > 0 ? std::min<double>(rmax, g.side / 2) : g.side / 2.0;
  RngStream rng(seed, 1);
  auto edges = nn_edges(g);
  const Index n = g.sites();
  for_each_long_class(g, cap, [&](const Coord& v, bool self_paired) {
    const double p = std::min(1.0, beta * std::pow(euclid(v), -s));
    if (p <= 0.0) return;
    const std::uint64_t pairs = static_cast<std::uint64_t>(self_paired ? n / 2 : n);
    const std::uint64_t count = rng.binomial(pairs, p);
    place_class_edges(g, v, self_paired, count, 1.0, rng, edges);
  });
  return Environment::from_edges(g, std::move(edges), {"lrp", "{}", seed});
}

Environment sample_stable_like(double s, const Geometry& g, std::uint64_t seed, int rmax,
                               double xi_p) {
  if (s <= 2.0) throw std::invalid_argument("sample_stable_like: need s > 2");
  const double cap = std::min<double>(rmax > 0 ? rmax : g.side / 2, g.side / 2.0);
  RngStream rng(seed, 2);
  auto edges = nn_edges(g);
  const Index n = g.sites();
  for_each_long_class(g, cap, [&](const Coord& v, bool self_paired) {
    const double w = std::pow(euclid(v), -(g.d + s));
    const std::uint64_t pairs = static_cast<std::uint64_t>(self_paired ? n / 2 : n);
    const std::uint64_t count = rng.binomial(pairs, xi_p);
    place_class_edges(g, v, self_paired, count, w, rng, edges);
  });
  return Environment::from_edges(g, std::move(edges), {"stable-like", "{}", seed});
}

// ---- localization -------------------------------------------------------

LocalizedEnvironment localize(const Environment& env, int R) {
  const Geometry& g = env.g;
  if (R < 1 || 8 * R >= g.side) throw std::invalid_argument("localize: need 4R < side/2");
  const Index n = g.sites();
  auto cheb0 = [&](Index x) { return chebyshev(displacement(Index(0), x, g)); };

  std::vector<Edge> edgesR;
  // nearest-neighbor pairs: original weight if touching B(0,2R), else 1
  for (Index x = 0; x < n; ++x)
    for (int ax = 0; ax < g.d; ++ax) {
      Index y = g.step(x, ax, +1);
      bool in2R = cheb0(x) <= 2 * R || cheb0(y) <= 2 * R;
      edgesR.push_back({x, y, in2R ? env.conductance(x, y) : 1.0});
    }
  // longer edges survive only when touching B(0,2R)
  for (const auto& e : env.edges()) {
    if (dist2(e.a, e.b, g) <= 1.0) continue;
    if (cheb0(e.a) <= 2 * R || cheb0(e.b) <= 2 * R) edgesR.push_back(e);
  }

  LocalizedEnvironment loc;
  loc.R = R;
  loc.env = Environment::from_edges(g, std::move(edgesR),
                                    {env.meta.sampler + "+localized", env.meta.params,
                                     env.meta.seed});
  loc.nuR.resize(n);
  for (Index x = 0; x < n; ++x) {
    int r = cheb0(x);
    loc.nuR[x] = r <= 2 * R ? env.nu()[x] : (r <= 4 * R ? 1.0 + env.nu()[x] : 1.0);
  }
  return loc;
}

// ---- moment diagnostics -------------------------------------------------

MomentReport moment_report(const Environment& env, double p, double q) {
  if (p < 1.0 || q < 1.0) throw std::invalid_argument("moment_report: need p,q >= 1");
  const Geometry& g = env.g;
  const Index n = g.sites();
  double sum_nu_p = 0.0, sum_inv_q = 0.0;
  Index nn_count = 0;
  for (Index x = 0; x < n; ++x) {
    sum_nu_p += std::pow(env.nu()[x], p);
    for (int ax = 0; ax < g.d; ++ax) {
      double c = env.conductance(x, g.step(x, ax, +1));
      if (c == 0.0)
        throw std::invalid_argument("moment_report: zero nearest-neighbor conductance");
      sum_inv_q += std::pow(1.0 / c, q);
      ++nn_count;
    }
  }
  MomentReport rep;
  rep.p = p;
  rep.q = q;
  rep.nu_p_norm = std::pow(sum_nu_p / n, 1.0 / p);
  rep.inv_c_q_norm = std::pow(sum_inv_q / nn_count, 1.0 / q);
  rep.mean_pi = env.pi().mean();
  rep.moment_flag = 1.0 / p + 1.0 / q < 2.0 / g.d;
  return rep;
}

// ---- trap construction --------------------------------------------------

TrapSpec TrapSpec::with_defaults(int d, int kMax) {
  TrapSpec spec;
  spec.d = d;
  spec.kMax = kMax;
  spec.schedule.resize(kMax);
  int L = 1;
  for (int k = 0; k < kMax; ++k, L *= 3) spec.schedule[k] = L;
  spec.validate();
  return spec;
}

void TrapSpec::validate() const {
  if (d < 3) throw std::invalid_argument("TrapSpec: need d >= 3");
  const double lim = 2.0 / (d - 1);
  if (!(1.0 / p + 1.0 / q > lim)) throw std::invalid_argument("TrapSpec: need 1/p + 1/q > 2/(d-1)");
  if (!(pPrime > p && qPrime > q)) throw std::invalid_argument("TrapSpec: need p' > p, q' > q");
  if (!(1.0 / pPrime + 1.0 / qPrime > lim))
    throw std::invalid_argument("TrapSpec: need 1/p' + 1/q' > 2/(d-1)");
  if (static_cast<int>(schedule.size()) != kMax || kMax < 1 || schedule[0] != 1)
    throw std::invalid_argument("TrapSpec: schedule must start at L_1 = 1");
  for (int k = 1; k < kMax; ++k)
    if (schedule[k] <= 2 * schedule[k - 1])
      throw std::invalid_argument("TrapSpec: need L_{k+1} > 2 L_k");
}

double TrapSpec::aL(int L) const { return std::pow(L, -(d - 1) / qPrime); }
double TrapSpec::bL(int L) const { return std::pow(L, (d - 1) / pPrime); }

std::vector<Coord> lambda_offsets(int L, int d) {
  std::vector<Coord> out;
  out.reserve((6 * L + 1) * (2 * d - 1) - 1);
  for (int j = -3 * L; j <= 3 * L; ++j) {
    Coord base = Coord::Zero(d);
    base[0] = j;
    if (j != 0) out.push_back(base);
    for (int ax = 1; ax < d; ++ax)
      for (int s : {-1, 1}) {
        Coord c = base;
        c[ax] = s;
        out.push_back(c);
      }
  }
  return out;
}

TrapEdgeSet trap_edge_set(const TrapSpec& spec, int k, Index x, const Geometry& g) {
  const int L = spec.L(k);
  const double a = spec.aL(L), b = spec.bL(L);
  TrapEdgeSet set;
  std::vector<Index> seg(L + 1);
  Index cur = x;
  for (int j = 0; j <= L; ++j) {
    seg[j] = cur;
    cur = g.step(cur, 0, +1);
  }
  for (int j = 0; j < L; ++j) set.segment.push_back({seg[j], seg[j + 1], b});
  set.fringe.push_back({g.step(seg[0], 0, -1), seg[0], a});
  set.fringe.push_back({seg[L], g.step(seg[L], 0, +1), a});
  for (int j = 0; j <= L; ++j)
    for (int ax = 1; ax < g.d; ++ax)
      for (int s : {-1, 1}) set.fringe.push_back({seg[j], g.step(seg[j], ax, s), a});
  return set;
}

namespace {

// Canonical id of the NN edge (x, x + e_ax).
Index nn_edge_id(Index x, int ax, const Geometry& g) {
  return x * g.d + ax;
}

Index nn_edge_id_of(Index a, Index b, const Geometry& g) {
  Coord v = displacement(a, b, g);
  for (int ax = 0; ax < g.d; ++ax)
    if (v[ax] != 0) return v[ax] == 1 ? nn_edge_id(a, ax, g) : nn_edge_id(b, ax, g);
  throw std::logic_error("nn_edge_id_of: not a nearest-neighbor pair");
}

Environment trap_env_from_weights(const Geometry& g, const std::vector<double>& wts,
                                  EnvMeta meta) {
  std::vector<Edge> edges;
  const Index n = g.sites();
  edges.reserve(n * g.d);
  for (Index x = 0; x < n; ++x)
    for (int ax = 0; ax < g.d; ++ax)
      edges.push_back({x, g.step(x, ax, +1), wts[nn_edge_id(x, ax, g)]});
  return Environment::from_edges(g, std::move(edges), std::move(meta));
}

void apply_trap(const TrapSpec& spec, int k, Index x, const Geometry& g,
                std::vector<double>& wts, std::vector<char>& assigned) {
  TrapEdgeSet set = trap_edge_set(spec, k, x, g);
  auto put = [&](const Edge& e) {
    Index id = nn_edge_id_of(e.a, e.b, g);
    if (assigned[id]) throw std::logic_error("trap assembly: edge assigned twice");
    assigned[id] = 1;
    wts[id] = e.w;
  };
  for (const auto& e : set.segment) put(e);
  for (const auto& e : set.fringe) put(e);
}

}  // namespace

std::pair<Environment, TrapFieldTrace> sample_trap(const TrapSpec& spec, const Geometry& g,
                                                   std::uint64_t seed) {
  spec.validate();
  if (g.d != spec.d) throw std::invalid_argument("sample_trap: dimension mismatch");
  const int Lmax = spec.L(spec.kMax);
  if (6 * Lmax + 2 >= g.side) throw std::invalid_argument("sample_trap: schedule too deep for torus");
  const Index n = g.sites();

  TrapFieldTrace trace;
  trace.ell.assign(n, 1);
  trace.m.assign(n, 1);
  for (Index x = 0; x < n; ++x)
    for (int k = spec.kMax; k >= 2; --k)
      if (counter_uniform(seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(x)) <
          std::pow(spec.L(k), -g.d)) {
        trace.ell[x] = static_cast<std::int8_t>(k);
        break;
      }
  for (int k = 2; k <= spec.kMax; ++k) {
    auto offs = lambda_offsets(spec.L(k), g.d);
    for (Index w = 0; w < n; ++w)
      if (trace.ell[w] >= k)
        for (const Coord& z : offs) {
          Index x = g.shift(w, Coord(-z));
          if (trace.m[x] < k) trace.m[x] = static_cast<std::int8_t>(k);
        }
  }
  std::vector<double> wts(n * g.d, 1.0);
  std::vector<char> assigned(n * g.d, 0);
  for (Index x = 0; x < n; ++x)
    if (trace.m[x] < trace.ell[x]) {
      trace.flagged.push_back(x);
      apply_trap(spec, trace.ell[x], x, g, wts, assigned);
    }
  Environment env = trap_env_from_weights(g, wts, {"trap", "{}", seed});
  return {std::move(env), std::move(trace)};
}

Environment plant_trap(const TrapSpec& spec, int k, Index x, const Geometry& g) {
  spec.validate();
  if (k < 1 || k > spec.kMax) throw std::invalid_argument("plant_trap: bad scale index");
  if (6 * spec.L(k) + 2 >= g.side) throw std::invalid_argument("plant_trap: geometry overflow");
  const Index n = g.sites();
  std::vector<double> wts(n * g.d, 1.0);
  std::vector<char> assigned(n * g.d, 0);
  apply_trap(spec, k, x, g, wts, assigned);
  return trap_env_from_weights(g, wts, {"planted-trap", "{}", 0});
}

Environment plant_long_edge(const Environment& env, Index x, Index y) {
  const Geometry& g = env.g;
  if (x == y || dist2(x, y, g) <= 1.0)
    throw std::invalid_argument("plant_long_edge: endpoints must be non-adjacent");
  std::vector<Edge> edges;
  for (const auto& e : env.edges()) {
    const bool at_y = e.a == y || e.b == y;
    if (at_y && dist2(e.a, e.b, g) > 1.0) continue;  // forced by the event
    edges.push_back(e);
  }
  edges.push_back({x, y, 1.0});
  return Environment::from_edges(g, std::move(edges),
                                 {"planted-long-edge", env.meta.params, env.meta.seed});
}

}  // namespace clab
