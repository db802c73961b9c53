#ifndef CLAB_WALK_HPP
#define CLAB_WALK_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "clab/env.hpp"

namespace clab {

// Z: discrete jump chain. X: variable speed, holding rate pi(x).
// Y: time-changed walk, holding rate pi(x)/nu(x), reversible wrt nu.
enum class WalkKind { Z, X, Y };

struct Trajectory {
  WalkKind kind = WalkKind::Z;
  Index start = 0;
  std::vector<double> times;  // arrival times; times[0] = 0; discrete: 0,1,2,...
  std::vector<Index> sites;   // sites[0] = start
  double horizon = 0.0;       // simulated span (steps for Z, time for X/Y)

  Index jumps() const { return static_cast<Index>(sites.size()) - 1; }
};

// One jump of the discrete chain: y with probability C_{x,y}/pi(x),
// via inverse CDF over the row's running weight sums.
Index step_discrete(const Environment& env, Index x, RngStream& rng);

// Simulates until `horizon` (step count for Z, continuous time for X/Y).
// Streams split off (seed, stream) so trajectory batches parallelize.
Trajectory run_walk(const Environment& env, WalkKind kind, Index x0, double horizon,
                    std::uint64_t seed, std::uint64_t stream = 0);

// Minimal-image unwrapped positions relative to start, one row per event
// (row 0 is zero). This is the Z^d path the torus trajectory periodizes.
Eigen::MatrixXd unwrapped_positions(const Trajectory& traj, const Geometry& g);

// Diffusively rescaled interpolation of a discrete trajectory:
// eval(t) = (Z_{floor(tn)} + frac * increment) / sqrt(n).
struct ScaledPath {
  double n = 1;
  Eigen::MatrixXd positions;  // unwrapped, (steps+1) x d

  Eigen::VectorXd eval(double t) const;
};

ScaledPath scaled_path(const Trajectory& traj, const Geometry& g, double n);

// First time the Y-walk started at x leaves the sup-norm ball B(x,r).
double exit_time(const Environment& env, Index x, int r, std::uint64_t seed,
                 std::uint64_t stream = 0);

// N_t / t for a continuous-time trajectory spanning at least t.
double time_change_ratio(const Trajectory& traj, double t);

}  // namespace clab

#endif
