#ifndef CLAB_ENV_HPP
#define CLAB_ENV_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "clab/geometry.hpp"
#include "clab/rng.hpp"

namespace clab {

struct Edge {
  Index a, b;
  double w;
};

struct EnvMeta {
  std::string sampler;
  std::string params;  // JSON fragment describing sampler parameters
  std::uint64_t seed = 0;
};

// Symmetric conductance field on the torus with cached site weights
//   pi(x) = sum_y C_{x,y},   nu(x) = sum_y C_{x,y} |x-y|^2,
// stored as a CSR adjacency over canonical (min,max) edges.
// Immutable after construction.
class Environment {
 public:
  Geometry g;
  EnvMeta meta;

  static Environment from_edges(const Geometry& g, std::vector<Edge> edges, EnvMeta meta);

  Index sites() const { return pi_.size(); }
  const Eigen::VectorXd& pi() const { return pi_; }
  const Eigen::VectorXd& nu() const { return nu_; }

  int degree(Index x) const { return static_cast<int>(off_[x + 1] - off_[x]); }
  const Index* neighbors(Index x) const { return nbr_.data() + off_[x]; }
  const double* weights(Index x) const { return w_.data() + off_[x]; }
  const double* cum_weights(Index x) const { return cumw_.data() + off_[x]; }

  double conductance(Index a, Index b) const;
  Index edge_count() const { return static_cast<Index>(nbr_.size()) / 2; }

  // Canonical (a < b) edge list; rebuilt on demand, mostly for IO and tests.
  std::vector<Edge> edges() const;

  // Re-checks symmetry, zero diagonal, positive finite pi, cache coherence.
  void validate() const;

  bool connected() const;

 private:
  std::vector<Index> off_;
  std::vector<Index> nbr_;
  std::vector<double> w_;
  std::vector<double> cumw_;  // per-row running sums of w_, for inverse-CDF jumps
  Eigen::VectorXd pi_, nu_;
};

// ---- sampler marginals --------------------------------------------------

struct Marginal {
  enum Kind { Constant, Uniform } kind = Constant;
  double a = 1.0, b = 1.0;  // Constant: value a.  Uniform: on [a,b].

  static Marginal constant(double v) { return {Constant, v, v}; }
  static Marginal uniform(double lo, double hi) { return {Uniform, lo, hi}; }
  double sample(RngStream& rng) const {
    return kind == Constant ? a : a + (b - a) * rng.uniform();
  }
};

// ---- environment families ----------------------------------------------

// i.i.d. conductances on nearest-neighbor torus edges.
Environment sample_iid_nn(const Marginal& dist, const Geometry& g, std::uint64_t seed);

// Long-range percolation: zero-one conductances, edge present with
// probability min(1, beta |v|^-s) at displacement v (|v| > 1), nearest
// neighbors always present. rmax = 0 means jumps up to side/2.
Environment sample_lrp(double s, double beta, const Geometry& g, std::uint64_t seed,
                       int rmax = 0);

// Stable-like: C_{x,y} = xi |x-y|^{-(d+s)} with i.i.d. Bernoulli(xi_p) xi,
// xi = 1 forced on nearest neighbors.
Environment sample_stable_like(double s, const Geometry& g, std::uint64_t seed,
                               int rmax = 8, double xi_p = 0.5);

// ---- localization -------------------------------------------------------

// Environment surgery outside B(0,2R): conductances replaced by the
// homogeneous nearest-neighbor field, reference measure patched on the
// B(0,4R) collar.
struct LocalizedEnvironment {
  Environment env;       // edges carry C^R; env.nu() is sum C^R |x-y|^2
  Eigen::VectorXd nuR;   // the three-case reference measure
  int R = 0;
};

LocalizedEnvironment localize(const Environment& env, int R);

// ---- moment diagnostics -------------------------------------------------

struct MomentReport {
  double p, q;
  double nu_p_norm;     // spatial-average L^p norm of nu
  double inv_c_q_norm;  // spatial-average L^q norm of 1/C over unit edges
  double mean_pi;
  bool moment_flag;  // 1/p + 1/q < 2/d
};

MomentReport moment_report(const Environment& env, double p, double q);

// ---- trap environments (nearest-neighbor counterexample family) --------

struct TrapSpec {
  int d = 3;
  double p = 1.5, q = 1.5;        // target moment exponents, 1/p + 1/q > 2/(d-1)
  double pPrime = 1.8, qPrime = 1.8;  // p' > p, q' > q, still 1/p' + 1/q' > 2/(d-1)
  std::vector<int> schedule;      // L_1 = 1, strictly increasing, L_{k+1} > 2 L_k
  int kMax = 3;

  static TrapSpec with_defaults(int d, int kMax);  // L_k = 3^{k-1}
  void validate() const;
  int L(int k) const { return schedule.at(k - 1); }
  double aL(int L) const;  // L^{-(d-1)/q'}
  double bL(int L) const;  // L^{+(d-1)/p'}
};

struct TrapFieldTrace {
  std::vector<std::int8_t> ell;   // max k with xi_{L_k}(x) = 1 (>= 1)
  std::vector<std::int8_t> m;     // max k with an l>=k site in x + Lambda_{L_k}
  std::vector<Index> flagged;     // sites with m(x) < ell(x)
  bool is_flagged(Index x) const { return m[x] < ell[x]; }
};

// Offsets of Lambda_L: the +-3L segment along the first axis together with
// its nearest neighbors in the other directions, origin excluded.
std::vector<Coord> lambda_offsets(int L, int d);

struct TrapEdgeSet {
  std::vector<Edge> segment;  // both endpoints on the segment -> b_L
  std::vector<Edge> fringe;   // exactly one endpoint on the segment -> a_L
};

// E_L(x): nearest-neighbor edges incident with {x + j e1 : j = 0..L},
// classified by endpoint count, with the a_L/b_L weights already applied.
TrapEdgeSet trap_edge_set(const TrapSpec& spec, int k, Index x, const Geometry& g);

std::pair<Environment, TrapFieldTrace> sample_trap(const TrapSpec& spec, const Geometry& g,
                                                   std::uint64_t seed);

// Deterministic single trap of scale L_k at x in an otherwise all-ones field.
Environment plant_trap(const TrapSpec& spec, int k, Index x, const Geometry& g);

// Forces the event A(x,y): adds the unit edge {x,y} and removes every other
// non-nearest-neighbor edge incident with y.
Environment plant_long_edge(const Environment& env, Index x, Index y);

}  // namespace clab

#endif
