#include "clab/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clab {

Index step_discrete(const Environment& env, Index x, RngStream& rng) {
  const int deg = env.degree(x);
  if (deg == 0) throw std::logic_error("step_discrete: isolated site");
  const double* cw = env.cum_weights(x);
  const double u = rng.uniform() * cw[deg - 1];
  const int k = static_cast<int>(std::upper_bound(cw, cw + deg, u) - cw);
  return env.neighbors(x)[std::min(k, deg - 1)];
}

Trajectory run_walk(const Environment& env, WalkKind kind, Index x0, double horizon,
                    std::uint64_t seed, std::uint64_t stream) {
  if (!(horizon > 0)) throw std::invalid_argument("run_walk: horizon must be positive");
  RngStream rng(seed, stream);
  Trajectory traj;
  traj.kind = kind;
  traj.start = x0;
  traj.horizon = horizon;
  traj.times.push_back(0.0);
  traj.sites.push_back(x0);
  Index x = x0;
  if (kind == WalkKind::Z) {
    const Index steps = static_cast<Index>(horizon);
    for (Index k = 1; k <= steps; ++k) {
      x = step_discrete(env, x, rng);
      traj.times.push_back(static_cast<double>(k));
      traj.sites.push_back(x);
    }
    return traj;
  }
  double t = 0.0;
  while (true) {
    const double rate =
        kind == WalkKind::X ? env.pi()[x] : env.pi()[x] / env.nu()[x];
    t += rng.exponential(rate);
    if (t > horizon) break;
    x = step_discrete(env, x, rng);
    traj.times.push_back(t);
    traj.sites.push_back(x);
  }
  return traj;
}

Eigen::MatrixXd unwrapped_positions(const Trajectory& traj, const Geometry& g) {
  const Index m = static_cast<Index>(traj.sites.size());
  Eigen::MatrixXd pos(m, g.d);
  Eigen::VectorXd cur = Eigen::VectorXd::Zero(g.d);
  pos.row(0) = cur;
  for (Index k = 1; k < m; ++k) {
    cur += displacement(traj.sites[k - 1], traj.sites[k], g).cast<double>();
    pos.row(k) = cur;
  }
  return pos;
}

Eigen::VectorXd ScaledPath::eval(double t) const {
  if (t < 0) throw std::invalid_argument("ScaledPath: t < 0");
  const double s = t * n;
  const Index k = static_cast<Index>(std::floor(s));
  if (k + 1 >= positions.rows() && s > static_cast<double>(positions.rows() - 1))
    throw std::invalid_argument("ScaledPath: insufficient steps for requested t");
  const double frac = s - static_cast<double>(k);
  Eigen::VectorXd v = positions.row(std::min(k, positions.rows() - 1));
  if (frac > 0) v += frac * (positions.row(k + 1) - positions.row(k)).transpose();
  return v / std::sqrt(n);
}

ScaledPath scaled_path(const Trajectory& traj, const Geometry& g, double n) {
  if (traj.kind != WalkKind::Z)
    throw std::invalid_argument("scaled_path: needs a discrete-chain trajectory");
  if (!(n > 0)) throw std::invalid_argument("scaled_path: n must be positive");
  ScaledPath sp;
  sp.n = n;
  sp.positions = unwrapped_positions(traj, g);
  return sp;
}

double exit_time(const Environment& env, Index x, int r, std::uint64_t seed,
                 std::uint64_t stream) {
  const Geometry& g = env.g;
  if (r < 0 || 2 * r + 1 > g.side) throw std::invalid_argument("exit_time: bad radius");
  RngStream rng(seed, stream);
  Index cur = x;
  Coord off = Coord::Zero(g.d);  // unwrapped offset from x, exact while inside the ball
  double t = 0.0;
  while (true) {
    t += rng.exponential(env.pi()[cur] / env.nu()[cur]);
    Index next = step_discrete(env, cur, rng);
    off += displacement(cur, next, g);
    if (off.cwiseAbs().maxCoeff() > r) return t;
    cur = next;
  }
}

double time_change_ratio(const Trajectory& traj, double t) {
  if (traj.kind == WalkKind::Z)
    throw std::invalid_argument("time_change_ratio: needs a continuous-time trajectory");
  if (t < 0 || t > traj.horizon)
    throw std::invalid_argument("time_change_ratio: t beyond horizon");
  if (t == 0.0) return 0.0;
  auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  const auto jumps = static_cast<double>(it - traj.times.begin() - 1);
  return jumps / t;
}

}  // namespace clab
