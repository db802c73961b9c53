#ifndef CLAB_ANALYSIS_HPP
#define CLAB_ANALYSIS_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "clab/env.hpp"
#include "clab/walk.hpp"

namespace clab {

// Named inequality instance: pass means margin = rhs - lhs >= 0. When the
// constant in the inequality is not explicit, `fitted` records the max ratio
// observed while fitting and pass refers to the validation run.
struct BoundCheck {
  std::string name;
  double lhs = 0, rhs = 0;
  double margin = 0;
  double fitted = 0;
  bool pass = false;
};

// ---- Dirichlet forms ----------------------------------------------------

// D    : sum over ordered pairs of C_{x,y} [f(y)-f(x)]^2
// D0   : same with unit weights on nearest-neighbor pairs only
// D1   : nearest-neighbor pairs with the environment's weights
enum class FormVariant { D, D0, D1 };

double dirichlet_form(const Environment& env, FormVariant variant, const Eigen::VectorXd& f);

// Localized form over C^R; jumps longer than kappa*R are dropped when
// kappa > 0 (the truncated variant), all jumps kept when kappa == 0.
double dirichlet_form(const LocalizedEnvironment& loc, const Eigen::VectorXd& f,
                      double kappa = 0.0);

// Sup-norm ramp: 1 on B(0,4R), 0 off B(0,8R), Lipschitz constant <= 1/(2R).
Eigen::VectorXd mollifier(int R, const Geometry& g);

// ---- localization inequalities (exact constants) ------------------------

// sup_x (1/nuR(x)) sum_{|x-y| <= kappa R} C^R |x-y|^2  <=  1 + 2d
BoundCheck check_short_jump_bound(const LocalizedEnvironment& loc, double kappa);

// sup_{x in B(0,4R)} (1/nuR(x)) sum_{|x-y| > kappa R} C^R  <=  (1+2d)/(kappa R)^2
BoundCheck check_long_jump_bound(const LocalizedEnvironment& loc, double kappa);

// ---- functional inequalities (fitted constants) -------------------------

// ||f||^2_{l^{2+eps}(nuR)} <= c1 (R^{2-d eps/(2+eps)} D^{R,kappa}(f,f)
//                                + R^{-d eps/(2+eps)} ||f||^2_{l^2(nuR)});
// reports the max ratio over `samples` random nonnegative f as `fitted`.
BoundCheck check_sobolev(const LocalizedEnvironment& loc, double kappa, double eps,
                         int samples, std::uint64_t seed);

// (sum f^{2+eps})^{2/(2+eps)} <= (c(d)(2+eps))^{eps d/(2+eps)}
//   * D0(f,f)^{eps d/(2(2+eps))} * (sum f^2)^{1 - eps d/(2(2+eps))}
BoundCheck check_nash(const Environment& env, const Eigen::VectorXd& f, double eps);

// ---- heat kernels -------------------------------------------------------

// Continuous-time chain with jump rate C_{x,y}/w(x); w = nu gives the
// time-changed walk, (C^R, nuR) its localized variant. max_jump > 0 drops
// jumps longer than max_jump (the kappa*R truncation).
struct RateModel {
  const Environment* env = nullptr;
  Eigen::VectorXd w;
  double max_jump = 0;
  std::string tag = "Y";
};

RateModel rate_model(const Environment& env);
RateModel rate_model(const LocalizedEnvironment& loc, double kappa = 0);

struct HeatKernelTable {
  SiteSet domain;   // global site indices; matrix rows/cols in this order
  double t = 0;
  Eigen::MatrixXd p;  // p(t, x, y), row x column y
  std::string variant;
  bool killed = false;
};

// Exact kernel by uniformization: Poisson-weighted powers of the
// uniformized jump matrix, truncated when the Poisson tail < 1e-12.
// killed = true treats jumps out of `domain` as absorption.
HeatKernelTable heat_kernel_exact(const RateModel& model, const SiteSet& domain, double t,
                                  bool killed);

// Single row p(t, x0, .) over the whole torus, for domains too large to
// tabulate (sparse matrix-vector uniformization).
Eigen::VectorXd heat_kernel_row(const RateModel& model, Index x0, double t);

// Heat-kernel bound suite at one (R, kappa):
//  - diagonal bound of the killed kernel on B(0,R):
//      p^{B(0,R)}(t,x,y) <= c R^{-d} (t/R^2)^{-(2+eps)/eps} nu(y)
//    (`fitted` = max ratio over the ball and the time grid)
//  - off-diagonal decay of the truncated localized kernel: regression of
//    log p(t,0,y) - log nuR(y) against (|y|/R) log(R^2/t); the exponential
//    factor predicts slope <= -1/(5 kappa).
std::vector<BoundCheck> check_hk_bounds(const Environment& env, int R, double kappa,
                                        double eps, const std::vector<double>& tGrid);

// ---- QIP statistics -----------------------------------------------------

struct QipStats {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> samples;  // per time: trajectories x d
  Eigen::MatrixXd covariance;            // empirical cov of samples at last time, / t
  Eigen::MatrixXd ks_stat, ks_p;         // times x d, against N(0, t Sigma_ii)
};

QipStats qip_stats(const Environment& env, const Eigen::MatrixXd& sigma, double n,
                   int trajectories, std::vector<double> times, std::uint64_t seed);

// ---- long-range percolation event scan ----------------------------------

// A(x,y): the unit edge {x,y} is present and y carries no other edge of
// length > 1. The scan covers |x| <= n^gamma, n < |y| <= 2n.
struct LrpEventScan {
  int n = 0;
  double gamma = 0;
  std::vector<std::pair<Index, Index>> witnesses;  // all A(x,y) pairs found
  bool a_n = false;
  bool b_n = false;
  std::array<Index, 4> b_witness{-1, -1, -1, -1};  // x, y, x', y'
};

LrpEventScan scan_lrp_events(const Environment& env, int n, double gamma, double s);

// ---- trap probability ---------------------------------------------------

// Monte-Carlo estimate of P(m(0) < l(0) = k) on the infinite lattice
// (coordinates hashed directly, no torus), with Wilson 99% interval.
// pass: interval upper end <= L_k^{-d} and lower end > 0.
BoundCheck trap_probability_mc(const TrapSpec& spec, int k, long long trials,
                               std::uint64_t seed);

}  // namespace clab

#endif
