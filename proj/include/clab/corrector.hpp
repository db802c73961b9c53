#ifndef CLAB_CORRECTOR_HPP
#define CLAB_CORRECTOR_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "clab/env.hpp"

namespace clab {

// The generator (Lf)(x) = sum_y C_{x,y}[f(y) - f(x)] viewed through the
// environment's adjacency; also exposes the explicit sparse matrix of -L
// (positive semidefinite, one-dimensional kernel of constants).
class GeneratorMatrix {
 public:
  explicit GeneratorMatrix(const Environment& env) : env_(env) {}

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;       // (Lf)(x)
  double quadratic(const Eigen::VectorXd& f) const;            // <f, -Lf> = D(f,f)/2
  Eigen::SparseMatrix<double> neg_sparse() const;              // -L

  const Environment& env() const { return env_; }

 private:
  const Environment& env_;
};

// Per-site vector corrector chi with Psi(x) = x + chi(x) harmonic:
// increments of Psi along an edge are displacement(x,y) + chi(y) - chi(x).
struct CorrectorField {
  Eigen::MatrixXd chi;   // sites x d, gauge chi(0) = 0
  double residual = 0;   // max_x |(L Psi)(x)| over components
  int iterations = 0;
  bool converged = false;
};

// Solves (-L) chi_i = r_i with r_i(x) = sum_y C_{x,y} displacement(x,y)_i by
// conjugate gradients restricted to the mean-zero subspace (the operator's
// kernel is the constants). tol is relative to |r|; maxIter = 0 means
// 50 * sqrt(site count).
CorrectorField solve_corrector(const Environment& env, double tol = 1e-10,
                               int maxIter = 0);

// Effective covariance: Sigma_ij = (1/avg pi) * avg_x sum_y C_{x,y}
// (d_i + chi_i(y)-chi_i(x)) (d_j + ...) with d = displacement(x,y).
Eigen::MatrixXd covariance_sigma(const Environment& env, const CorrectorField& chi);

// Growth diagnostics of |chi| over centered balls:
//   S(n)        = max_{|x| <= n} |chi(x)| / n
//   A(delta, n) = n^{-d} #{ |x| <= n : |chi(x)| > delta n }
// with |x| the Euclidean norm of the minimal-image position.
struct SublinearityProfile {
  std::vector<int> radii;
  std::vector<double> deltas;
  Eigen::VectorXd S;        // indexed by radius
  Eigen::MatrixXd A;        // radii x deltas
};

SublinearityProfile sublinearity_profile(const Environment& env, const CorrectorField& chi,
                                         const std::vector<int>& radii,
                                         const std::vector<double>& deltas);

// Dirichlet energy of the harmonic coordinate over one trap's edge set,
// against the two bounds from the trap analysis:
//   energy >= (b_L / L) |Psi(x + L e1) - Psi(x)|^2      (path lower bound)
//   energy <= a_L * sum_{y in boundary} |Psi(y) - Psi(x)|^2
struct TrapEnergyReport {
  double energy = 0;
  double lower = 0, upper = 0;
  bool lower_ok = false, upper_ok = false;
};

TrapEnergyReport trap_energy_check(const Environment& env, const CorrectorField& chi,
                                   const TrapSpec& spec, int k, Index x);

}  // namespace clab

#endif
