#include "clab/analysis.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "clab/stats.hpp"

namespace clab {

// ---- Dirichlet forms ----------------------------------------------------

double dirichlet_form(const Environment& env, FormVariant variant, const Eigen::VectorXd& f) {
  const Geometry& g = env.g;
  const Index n = env.sites();
  if (f.size() != n) throw std::invalid_argument("dirichlet_form: size mismatch");
  double acc = 0;
  for (Index x = 0; x < n; ++x) {
    if (variant == FormVariant::D0) {
      for (int ax = 0; ax < g.d; ++ax)
        for (int s : {-1, 1}) {
          const double df = f[g.step(x, ax, s)] - f[x];
          acc += df * df;
        }
      continue;
    }
    const Index* nb = env.neighbors(x);
    const double* w = env.weights(x);
    for (int k = 0; k < env.degree(x); ++k) {
      if (variant == FormVariant::D1 && dist2(x, nb[k], g) > 1.0) continue;
      const double df = f[nb[k]] - f[x];
      acc += w[k] * df * df;
    }
  }
  return acc;
}

double dirichlet_form(const LocalizedEnvironment& loc, const Eigen::VectorXd& f,
                      double kappa) {
  const Environment& env = loc.env;
  const Geometry& g = env.g;
  const Index n = env.sites();
  if (f.size() != n) throw std::invalid_argument("dirichlet_form: size mismatch");
  if (kappa > 0 && kappa * loc.R < 1)
    throw std::invalid_argument("dirichlet_form: need kappa R >= 1");
  const double cut2 = kappa > 0 ? kappa * loc.R * kappa * loc.R : 0;
  double acc = 0;
  for (Index x = 0; x < n; ++x) {
    const Index* nb = env.neighbors(x);
    const double* w = env.weights(x);
    for (int k = 0; k < env.degree(x); ++k) {
      if (kappa > 0 && dist2(x, nb[k], g) > cut2) continue;
      const double df = f[nb[k]] - f[x];
      acc += w[k] * df * df;
    }
  }
  return acc;
}

Eigen::VectorXd mollifier(int R, const Geometry& g) {
  if (R < 1 || 16 * R >= g.side) throw std::invalid_argument("mollifier: 8R must fit in side/2");
  const Index n = g.sites();
  Eigen::VectorXd phi(n);
  for (Index x = 0; x < n; ++x) {
    const int r = chebyshev(displacement(Index(0), x, g));
    phi[x] = std::clamp(2.0 - static_cast<double>(r) / (4 * R), 0.0, 1.0);
  }
  return phi;
}

// ---- localization inequalities ------------------------------------------

BoundCheck check_short_jump_bound(const LocalizedEnvironment& loc, double kappa) {
  const Environment& env = loc.env;
  const Geometry& g = env.g;
  if (!(kappa > 0 && kappa <= 1) || kappa * loc.R < 1)
    throw std::invalid_argument("check_short_jump_bound: need kappa in (0,1], kappa R >= 1");
  const double cut2 = kappa * loc.R * kappa * loc.R;
  double sup = 0;
  for (Index x = 0; x < env.sites(); ++x) {
    const Index* nb = env.neighbors(x);
    const double* w = env.weights(x);
    double acc = 0;
    for (int k = 0; k < env.degree(x); ++k) {
      const double d2 = dist2(x, nb[k], g);
      if (d2 <= cut2) acc += w[k] * d2;
    }
    sup = std::max(sup, acc / loc.nuR[x]);
  }
  BoundCheck chk;
  chk.name = "short-jump-energy";
  chk.lhs = sup;
  chk.rhs = 1.0 + 2 * g.d;
  chk.margin = chk.rhs - chk.lhs;
  chk.pass = chk.margin >= 0;
  return chk;
}

BoundCheck check_long_jump_bound(const LocalizedEnvironment& loc, double kappa) {
  const Environment& env = loc.env;
  const Geometry& g = env.g;
  if (!(kappa > 0 && kappa <= 1) || kappa * loc.R < 1)
    throw std::invalid_argument("check_long_jump_bound: need kappa in (0,1], kappa R >= 1");
  const double cut2 = kappa * loc.R * kappa * loc.R;
  double sup = 0;
  for (Index x = 0; x < env.sites(); ++x) {
    if (chebyshev(displacement(Index(0), x, g)) > 4 * loc.R) continue;
    const Index* nb = env.neighbors(x);
    const double* w = env.weights(x);
    double acc = 0;
    for (int k = 0; k < env.degree(x); ++k)
      if (dist2(x, nb[k], g) > cut2) acc += w[k];
    sup = std::max(sup, acc / loc.nuR[x]);
  }
  BoundCheck chk;
  chk.name = "long-jump-rate";
  chk.lhs = sup;
  chk.rhs = (1.0 + 2 * g.d) / cut2;
  chk.margin = chk.rhs - chk.lhs;
  chk.pass = chk.margin >= 0;
  return chk;
}

// ---- functional inequalities --------------------------------------------

BoundCheck check_sobolev(const LocalizedEnvironment& loc, double kappa, double eps,
                         int samples, std::uint64_t seed) {
  const Environment& env = loc.env;
  const Geometry& g = env.g;
  if (g.d > 2 && !(eps > 0 && eps < 4.0 / (g.d - 2)))
    throw std::invalid_argument("check_sobolev: eps outside (0, 4/(d-2))");
  if (g.d == 2 && !(eps > 0)) throw std::invalid_argument("check_sobolev: eps must be positive");
  const Index n = env.sites();
  const double R = loc.R;
  const double ex = g.d * eps / (2 + eps);
  RngStream rng(seed, 11);
  double fitted = 0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd f(n);
    if (s % 2 == 0) {
      for (Index x = 0; x < n; ++x) f[x] = rng.uniform();
    } else {
      // localized bump: random profile inside a random ball, zero outside
      f.setZero();
      const Index c = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      const int r = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(loc.R)));
      for (Index x : ball(c, std::min(r, (g.side - 1) / 2), g)) f[x] = rng.uniform();
    }
    const double lp = std::pow(f.array().pow(2 + eps).matrix().dot(loc.nuR), 2.0 / (2 + eps));
    const double l2 = f.array().square().matrix().dot(loc.nuR);
    const double form = dirichlet_form(loc, f, kappa);
    const double rhs = std::pow(R, 2 - ex) * form + std::pow(R, -ex) * l2;
    if (rhs > 0) fitted = std::max(fitted, lp / rhs);
  }
  BoundCheck chk;
  chk.name = "sobolev";
  chk.fitted = fitted;
  chk.lhs = fitted;
  chk.rhs = fitted;
  chk.pass = std::isfinite(fitted) && fitted > 0;
  return chk;
}

BoundCheck check_nash(const Environment& env, const Eigen::VectorXd& f, double eps) {
  const int d = env.g.d;
  if (d > 2 && !(eps > 0 && eps < 4.0 / (d - 2)))
    throw std::invalid_argument("check_nash: eps outside (0, 4/(d-2))");
  if ((f.array() < 0).any()) throw std::invalid_argument("check_nash: f must be nonnegative");
  const double a = eps * d / (2.0 * (2 + eps));
  const double lhs = std::pow(f.array().pow(2 + eps).sum(), 2.0 / (2 + eps));
  const double d0 = dirichlet_form(env, FormVariant::D0, f);
  const double l2 = f.squaredNorm();
  const double base = std::pow(d0, a) * std::pow(l2, 1 - a);
  BoundCheck chk;
  chk.name = "nash";
  chk.lhs = lhs;
  chk.rhs = base;  // with constant 1; fitted holds the implied c(d)
  if (base > 0 && lhs > 0) {
    // (c(d)(2+eps))^{eps d/(2+eps)} >= lhs/base  =>  solve for c(d)
    chk.fitted = std::pow(lhs / base, (2 + eps) / (eps * d)) / (2 + eps);
  }
  chk.margin = chk.rhs - chk.lhs;
  chk.pass = std::isfinite(chk.fitted);
  return chk;
}

// ---- heat kernels -------------------------------------------------------

RateModel rate_model(const Environment& env) {
  RateModel m;
  m.env = &env;
  m.w = env.nu();
  m.tag = "Y";
  return m;
}

RateModel rate_model(const LocalizedEnvironment& loc, double kappa) {
  if (kappa > 0 && kappa * loc.R < 1)
    throw std::invalid_argument("rate_model: need kappa R >= 1");
  RateModel m;
  m.env = &loc.env;
  m.w = loc.nuR;
  m.max_jump = kappa > 0 ? kappa * loc.R : 0;
  m.tag = kappa > 0 ? "YRK" : "YR";
  return m;
}

namespace {

// Uniformized jump matrix over `domain` plus the uniformization rate.
// Column-compressed P with P(x,y) = rate(x->y)/lambda, diagonal
// 1 - q(x)/lambda where q(x) counts all admissible jumps (also those out
// of the domain: for killed kernels that mass is absorbed; non-killed
// callers use the full torus where no jump leaves).
struct Uniformized {
  Eigen::SparseMatrix<double> p;
  double lambda = 0;
};

Uniformized uniformize(const RateModel& model, const SiteSet& domain, bool killed) {
  const Environment& env = *model.env;
  const Geometry& g = env.g;
  const Index m = static_cast<Index>(domain.size());
  std::unordered_map<Index, Index> local;
  local.reserve(m * 2);
  for (Index i = 0; i < m; ++i) local.emplace(domain[i], i);
  if (!killed && m != env.sites())
    throw std::invalid_argument("heat kernel: non-killed variant needs the full torus");

  const double cut2 = model.max_jump > 0 ? model.max_jump * model.max_jump : 0;
  std::vector<double> q(m, 0.0);
  std::vector<Eigen::Triplet<double>> trip;
  for (Index i = 0; i < m; ++i) {
    const Index x = domain[i];
    const Index* nb = env.neighbors(x);
    const double* w = env.weights(x);
    for (int k = 0; k < env.degree(x); ++k) {
      if (cut2 > 0 && dist2(x, nb[k], g) > cut2) continue;
      const double rate = w[k] / model.w[x];
      q[i] += rate;
      auto it = local.find(nb[k]);
      if (it != local.end()) trip.emplace_back(i, it->second, rate);
    }
  }
  Uniformized u;
  u.lambda = *std::max_element(q.begin(), q.end());
  if (u.lambda <= 0) throw std::logic_error("heat kernel: zero jump rate");
  for (auto& t : trip) t = {t.row(), t.col(), t.value() / u.lambda};
  for (Index i = 0; i < m; ++i) trip.emplace_back(i, i, 1.0 - q[i] / u.lambda);
  u.p.resize(m, m);
  u.p.setFromTriplets(trip.begin(), trip.end());
  return u;
}

double log_poisson(double mean, Index k) {
  return -mean + k * std::log(mean) - std::lgamma(static_cast<double>(k) + 1.0);
}

Index poisson_terms(double mean) {
  // covers the upper tail to < 1e-12
  return static_cast<Index>(mean + 12.0 * std::sqrt(mean + 1.0) + 25.0);
}

}  // namespace

HeatKernelTable heat_kernel_exact(const RateModel& model, const SiteSet& domain, double t,
                                  bool killed) {
  if (t < 0) throw std::invalid_argument("heat_kernel_exact: t < 0");
  if (domain.size() > 4000) throw std::invalid_argument("heat_kernel_exact: domain too large");
  HeatKernelTable table;
  table.domain = domain;
  table.t = t;
  table.variant = model.tag;
  table.killed = killed;
  const Index m = static_cast<Index>(domain.size());
  if (t == 0) {
    table.p = Eigen::MatrixXd::Identity(m, m);
    return table;
  }
  const Uniformized u = uniformize(model, domain, killed);
  const double mean = u.lambda * t;
  if (mean > 5e4) throw std::invalid_argument("heat_kernel_exact: t too large");
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  const Index kmax = poisson_terms(mean);
  for (Index k = 0; k <= kmax; ++k) {
    if (k > 0) power = power * u.p;
    const double wk = std::exp(log_poisson(mean, k));
    if (wk > 0) acc += wk * power;
  }
  table.p = acc;
  return table;
}

Eigen::VectorXd heat_kernel_row(const RateModel& model, Index x0, double t) {
  const Environment& env = *model.env;
  const Index n = env.sites();
  SiteSet all(n);
  for (Index i = 0; i < n; ++i) all[i] = i;
  if (t < 0) throw std::invalid_argument("heat_kernel_row: t < 0");
  const Uniformized u = uniformize(model, all, false);
  const double mean = u.lambda * t;
  if (mean > 5e4) throw std::invalid_argument("heat_kernel_row: t too large");
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  row[x0] = 1.0;
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(n);
  const Index kmax = t == 0 ? 0 : poisson_terms(mean);
  for (Index k = 0; k <= kmax; ++k) {
    if (k > 0) row = row * u.p;
    const double wk = t == 0 ? (k == 0 ? 1.0 : 0.0) : std::exp(log_poisson(mean, k));
    if (wk > 0) acc += wk * row;
  }
  return acc.transpose();
}

std::vector<BoundCheck> check_hk_bounds(const Environment& env, int R, double kappa,
                                        double eps, const std::vector<double>& tGrid) {
  const Geometry& g = env.g;
  if (kappa * R < 1) throw std::invalid_argument("check_hk_bounds: need kappa R >= 1");
  const double ex = (2.0 + eps) / eps;
  std::vector<BoundCheck> out;

  // diagonal bound of the kernel killed on exiting B(0,R)
  {
    const SiteSet dom = ball(0, R, g);
    const RateModel model = rate_model(env);
    double fitted = 0;
    for (double t : tGrid) {
      if (!(t > 0 && t <= static_cast<double>(R) * R)) continue;
      const HeatKernelTable tab = heat_kernel_exact(model, dom, t, true);
      const double shape0 = std::pow(R, -g.d) * std::pow(t / (R * static_cast<double>(R)), -ex);
      for (Index i = 0; i < tab.p.rows(); ++i)
        for (Index j = 0; j < tab.p.cols(); ++j)
          fitted = std::max(fitted, tab.p(i, j) / (shape0 * env.nu()[dom[j]]));
    }
    BoundCheck chk;
    chk.name = "hk-diagonal";
    chk.fitted = fitted;
    chk.pass = std::isfinite(fitted) && fitted > 0;
    out.push_back(chk);
  }

  // off-diagonal decay of the truncated localized kernel along an axis
  {
    const LocalizedEnvironment loc = localize(env, R);
    const RateModel model = rate_model(loc, kappa);
    std::vector<double> xs, ys;
    for (double t : tGrid) {
      if (!(t > 0 && t < static_cast<double>(R) * R)) continue;
      const Eigen::VectorXd row = heat_kernel_row(model, 0, t);
      const double lg = std::log(R * static_cast<double>(R) / t);
      Coord v = Coord::Zero(g.d);
      for (int r = 1; r <= std::min(g.side / 2 - 1, 2 * R); ++r) {
        v[0] = r;
        const Index y = g.index(v);
        if (row[y] < 1e-280) break;
        xs.push_back(r / static_cast<double>(R) * lg);
        ys.push_back(std::log(row[y] / loc.nuR[y]));
      }
    }
    BoundCheck chk;
    chk.name = "hk-offdiag-slope";
    if (xs.size() >= 2) {
      const LinearFit fit = linear_fit(Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size()),
                                       Eigen::Map<Eigen::VectorXd>(ys.data(), ys.size()));
      chk.lhs = fit.slope;
      chk.rhs = -0.5 / (5.0 * kappa);  // half the predicted 1/(5 kappa) coefficient
      chk.margin = chk.rhs - chk.lhs;
      chk.fitted = fit.slope;
      chk.pass = fit.slope <= chk.rhs;
    }
    out.push_back(chk);
  }
  return out;
}

// ---- QIP statistics -----------------------------------------------------

QipStats qip_stats(const Environment& env, const Eigen::MatrixXd& sigma, double n,
                   int trajectories, std::vector<double> times, std::uint64_t seed) {
  const Geometry& g = env.g;
  if (trajectories < 100) throw std::invalid_argument("qip_stats: need >= 100 trajectories");
  if (times.empty()) throw std::invalid_argument("qip_stats: empty time grid");
  std::sort(times.begin(), times.end());
  const double tmax = times.back();
  const double steps = std::ceil(tmax * n) + 1;

  QipStats stats;
  stats.times = times;
  stats.samples.assign(times.size(), Eigen::MatrixXd(trajectories, g.d));
  for (int traj = 0; traj < trajectories; ++traj) {
    const Trajectory z = run_walk(env, WalkKind::Z, 0, steps, seed, traj);
    const ScaledPath path = scaled_path(z, g, n);
    for (std::size_t ti = 0; ti < times.size(); ++ti)
      stats.samples[ti].row(traj) = path.eval(times[ti]).transpose();
  }
  const Eigen::MatrixXd& last = stats.samples.back();
  const Eigen::MatrixXd centered = last.rowwise() - last.colwise().mean();
  stats.covariance = centered.transpose() * centered / (trajectories * tmax);

  stats.ks_stat.resize(times.size(), g.d);
  stats.ks_p.resize(times.size(), g.d);
  for (std::size_t ti = 0; ti < times.size(); ++ti)
    for (int i = 0; i < g.d; ++i) {
      std::vector<double> sample(trajectories);
      for (int traj = 0; traj < trajectories; ++traj) sample[traj] = stats.samples[ti](traj, i);
      const double sd = std::sqrt(times[ti] * sigma(i, i));
      stats.ks_stat(ti, i) = ks_statistic(sample, sd);
      stats.ks_p(ti, i) = ks_pvalue(stats.ks_stat(ti, i), sample.size());
    }
  return stats;
}

// ---- long-range percolation event scan ----------------------------------

LrpEventScan scan_lrp_events(const Environment& env, int n, double gamma, double s) {
  const Geometry& g = env.g;
  if (2 * n >= g.side / 2) throw std::invalid_argument("scan_lrp_events: window violation");
  const double lo = (s - g.d) / g.d;
  const double hi = std::min((2 * s - g.d) / (2.0 * g.d), 1.0);
  if (!(gamma > lo && gamma < hi))
    throw std::invalid_argument("scan_lrp_events: gamma outside the admissible window");

  LrpEventScan scan;
  scan.n = n;
  scan.gamma = gamma;
  const double core = std::pow(n, gamma);

  const auto r0 = [&](Index x) { return euclid(displacement(Index(0), x, g)); };
  // shell sites carrying at least one long edge into the core
  std::vector<std::pair<Index, std::vector<Index>>> linked;  // (y, core partners)
  const Index nsites = env.sites();
  for (Index y = 0; y < nsites; ++y) {
    const double ry = r0(y);
    if (!(ry > n && ry <= 2.0 * n)) continue;
    std::vector<Index> partners;
    int long_edges = 0;
    const Index* nb = env.neighbors(y);
    for (int k = 0; k < env.degree(y); ++k) {
      if (dist2(y, nb[k], g) <= 1.0) continue;
      ++long_edges;
      if (r0(nb[k]) <= core && env.conductance(y, nb[k]) == 1.0) partners.push_back(nb[k]);
    }
    for (Index x : partners)
      if (long_edges == 1) {  // the edge to x is y's only long edge
        scan.witnesses.emplace_back(x, y);
        scan.a_n = true;
      }
    if (!partners.empty()) linked.emplace_back(y, std::move(partners));
  }
  // B_n: same y with two core partners, or two linked y's joined by an edge
  for (const auto& [y, partners] : linked) {
    if (partners.size() >= 2) {
      scan.b_n = true;
      scan.b_witness = {partners[0], y, partners[1], y};
      return scan;
    }
  }
  for (std::size_t i = 0; i < linked.size() && !scan.b_n; ++i)
    for (std::size_t j = i + 1; j < linked.size(); ++j)
      if (env.conductance(linked[i].first, linked[j].first) == 1.0) {
        scan.b_n = true;
        scan.b_witness = {linked[i].second[0], linked[i].first, linked[j].second[0],
                          linked[j].first};
        break;
      }
  return scan;
}

// ---- trap probability ---------------------------------------------------

BoundCheck trap_probability_mc(const TrapSpec& spec, int k, long long trials,
                               std::uint64_t seed) {
  spec.validate();
  if (k < 2 || k > spec.kMax) throw std::invalid_argument("trap_probability_mc: need 2 <= k <= kMax");
  if (trials < 10000) throw std::invalid_argument("trap_probability_mc: need >= 1e4 trials");
  const int d = spec.d;

  const auto code = [&](const Coord& z) {
    std::uint64_t h = 0x51ab0000;
    for (int i = 0; i < d; ++i) h = hash_combine(h, static_cast<std::uint64_t>(z[i] + (1 << 20)));
    return h;
  };
  std::vector<std::vector<Coord>> offs(spec.kMax + 1);
  for (int kk = 2; kk <= spec.kMax; ++kk) offs[kk] = lambda_offsets(spec.L(kk), d);

  long long hits = 0;
  for (long long trial = 0; trial < trials; ++trial) {
    const std::uint64_t s = hash_combine(seed, static_cast<std::uint64_t>(trial));
    const auto ell = [&](const Coord& z) {
      for (int kk = spec.kMax; kk >= 2; --kk)
        if (counter_uniform(s, static_cast<std::uint64_t>(kk), code(z)) < std::pow(spec.L(kk), -d))
          return kk;
      return 1;
    };
    if (ell(Coord(Coord::Zero(d))) != k) continue;
    int m = 1;
    for (int kk = spec.kMax; kk >= 2 && m == 1; --kk)
      for (const Coord& z : offs[kk])
        if (ell(z) >= kk) {
          m = kk;
          break;
        }
    if (m < k) ++hits;
  }
  const Interval ci = wilson_interval(hits, trials);
  BoundCheck chk;
  chk.name = "trap-probability";
  chk.lhs = ci.hi;
  chk.rhs = std::pow(spec.L(k), -d);
  chk.margin = chk.rhs - chk.lhs;
  chk.fitted = static_cast<double>(hits) / trials;
  chk.pass = ci.hi <= chk.rhs && ci.lo > 0;
  return chk;
}

}  // namespace clab
