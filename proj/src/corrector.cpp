#include "clab/corrector.hpp"

#include <cmath>
#include <stdexcept>

namespace clab {

Eigen::VectorXd GeneratorMatrix::apply(const Eigen::VectorXd& f) const {
  const Index n = env_.sites();
  if (f.size() != n) throw std::invalid_argument("GeneratorMatrix: size mismatch");
  Eigen::VectorXd out(n);
  for (Index x = 0; x < n; ++x) {
    const Index* nb = env_.neighbors(x);
    const double* w = env_.weights(x);
    double acc = -env_.pi()[x] * f[x];
    for (int k = 0; k < env_.degree(x); ++k) acc += w[k] * f[nb[k]];
    out[x] = acc;
  }
  return out;
}

double GeneratorMatrix::quadratic(const Eigen::VectorXd& f) const {
  return -f.dot(apply(f));
}

Eigen::SparseMatrix<double> GeneratorMatrix::neg_sparse() const {
  const Index n = env_.sites();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(env_.edge_count() * 2 + n);
  for (Index x = 0; x < n; ++x) {
    trip.emplace_back(x, x, env_.pi()[x]);
    for (int k = 0; k < env_.degree(x); ++k)
      trip.emplace_back(x, env_.neighbors(x)[k], -env_.weights(x)[k]);
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

namespace {

// rhs of the corrector equation: r_i(x) = sum_y C_{x,y} displacement(x,y)_i
Eigen::MatrixXd corrector_rhs(const Environment& env) {
  const Geometry& g = env.g;
  const Index n = env.sites();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, g.d);
  for (Index x = 0; x < n; ++x) {
    const Index* nb = env.neighbors(x);
    const double* w = env.weights(x);
    for (int k = 0; k < env.degree(x); ++k)
      r.row(x) += w[k] * displacement(x, nb[k], g).cast<double>().transpose();
  }
  return r;
}

// CG for (-L) v = b on the mean-zero subspace; b is re-centered and the
// residual re-projected every iteration to keep the kernel out.
int cg_solve(const GeneratorMatrix& op, Eigen::VectorXd b, Eigen::VectorXd& v,
             double tol, int maxIter) {
  const auto center = [](Eigen::VectorXd& u) { u.array() -= u.mean(); };
  center(b);
  const double target = tol * b.cwiseAbs().maxCoeff();
  v.setZero(b.size());
  Eigen::VectorXd res = b;  // b - A*0
  Eigen::VectorXd p = res;
  double rs = res.squaredNorm();
  int it = 0;
  while (res.cwiseAbs().maxCoeff() > target && it < maxIter) {
    Eigen::VectorXd Ap = -op.apply(p);
    const double alpha = rs / p.dot(Ap);
    v += alpha * p;
    res -= alpha * Ap;
    center(res);
    const double rs2 = res.squaredNorm();
    p = res + (rs2 / rs) * p;
    rs = rs2;
    ++it;
  }
  return it;
}

}  // namespace

CorrectorField solve_corrector(const Environment& env, double tol, int maxIter) {
  if (!(tol > 0)) throw std::invalid_argument("solve_corrector: tol must be positive");
  if (!env.connected()) throw std::invalid_argument("solve_corrector: disconnected environment");
  const Index n = env.sites();
  if (maxIter <= 0) maxIter = static_cast<int>(50 * std::sqrt(static_cast<double>(n))) + 50;

  GeneratorMatrix op(env);
  const Eigen::MatrixXd rhs = corrector_rhs(env);
  CorrectorField field;
  field.chi.resize(n, env.g.d);
  field.converged = true;
  for (int i = 0; i < env.g.d; ++i) {
    Eigen::VectorXd v;
    const int it = cg_solve(op, rhs.col(i), v, tol, maxIter);
    field.iterations = std::max(field.iterations, it);
    if (it >= maxIter) field.converged = false;
    v.array() -= v[0];  // gauge chi(0) = 0
    field.chi.col(i) = v;
  }
  // residual of harmonicity: (L Psi)_i = r_i - (-L) chi_i
  double res = 0;
  for (int i = 0; i < env.g.d; ++i) {
    Eigen::VectorXd h = rhs.col(i) + op.apply(field.chi.col(i));
    res = std::max(res, h.cwiseAbs().maxCoeff());
  }
  field.residual = res;
  return field;
}

Eigen::MatrixXd covariance_sigma(const Environment& env, const CorrectorField& chi) {
  const Geometry& g = env.g;
  const Index n = env.sites();
  if (chi.chi.rows() != n || chi.chi.cols() != g.d)
    throw std::invalid_argument("covariance_sigma: mismatched corrector");
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(g.d, g.d);
  for (Index x = 0; x < n; ++x) {
    const Index* nb = env.neighbors(x);
    const double* w = env.weights(x);
    for (int k = 0; k < env.degree(x); ++k) {
      const Index y = nb[k];
      Eigen::VectorXd inc = displacement(x, y, g).cast<double>() +
                            (chi.chi.row(y) - chi.chi.row(x)).transpose();
      sigma += w[k] * inc * inc.transpose();
    }
  }
  return sigma / (static_cast<double>(n) * env.pi().mean());
}

SublinearityProfile sublinearity_profile(const Environment& env, const CorrectorField& chi,
                                         const std::vector<int>& radii,
                                         const std::vector<double>& deltas) {
  const Geometry& g = env.g;
  for (int n : radii)
    if (n < 1 || n > g.side / 2) throw std::invalid_argument("sublinearity_profile: radius overflow");
  const Index nsites = env.sites();
  Eigen::VectorXd enorm(nsites), cnorm(nsites);
  for (Index x = 0; x < nsites; ++x) {
    enorm[x] = euclid(displacement(Index(0), x, g));
    cnorm[x] = chi.chi.row(x).norm();
  }
  SublinearityProfile prof;
  prof.radii = radii;
  prof.deltas = deltas;
  prof.S = Eigen::VectorXd::Zero(radii.size());
  prof.A = Eigen::MatrixXd::Zero(radii.size(), deltas.size());
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double n = radii[ri];
    for (Index x = 0; x < nsites; ++x) {
      if (enorm[x] > n) continue;
      prof.S[ri] = std::max(prof.S[ri], cnorm[x] / n);
      for (std::size_t di = 0; di < deltas.size(); ++di)
        if (cnorm[x] > deltas[di] * n) prof.A(ri, di) += 1.0;
    }
    prof.A.row(ri) /= std::pow(n, g.d);
  }
  return prof;
}

TrapEnergyReport trap_energy_check(const Environment& env, const CorrectorField& chi,
                                   const TrapSpec& spec, int k, Index x) {
  const Geometry& g = env.g;
  const int L = spec.L(k);
  const TrapEdgeSet set = trap_edge_set(spec, k, x, g);
  // sanity: the trap's weights must actually be present in the environment
  const Edge& probe = set.segment.front();
  if (std::abs(env.conductance(probe.a, probe.b) - spec.bL(L)) > 1e-9 * spec.bL(L))
    throw std::invalid_argument("trap_energy_check: no trap of this scale at x");

  auto psi_inc = [&](Index a, Index b) -> Eigen::VectorXd {
    return displacement(a, b, g).cast<double>() +
           (chi.chi.row(b) - chi.chi.row(a)).transpose();
  };
  TrapEnergyReport rep;
  for (const auto* part : {&set.segment, &set.fringe})
    for (const Edge& e : *part)
      rep.energy += env.conductance(e.a, e.b) * psi_inc(e.a, e.b).squaredNorm();

  // across the segment: Psi(x + L e1) - Psi(x), accumulated edgewise
  Eigen::VectorXd across = Eigen::VectorXd::Zero(g.d);
  Index cur = x;
  for (int j = 0; j < L; ++j) {
    Index nxt = g.step(cur, 0, +1);
    across += psi_inc(cur, nxt);
    cur = nxt;
  }
  rep.lower = spec.bL(L) / L * across.squaredNorm();

  SiteSet D;
  cur = x;
  for (int j = 0; j <= L; ++j) {
    D.push_back(cur);
    cur = g.step(cur, 0, +1);
  }
  double bsum = 0;
  for (Index y : outer_boundary(D, g)) bsum += psi_inc(x, y).squaredNorm();
  rep.upper = spec.aL(L) * bsum;

  rep.lower_ok = rep.energy >= rep.lower * (1 - 1e-9);
  rep.upper_ok = rep.energy <= rep.upper * (1 + 1e-9);
  return rep;
}

}  // namespace clab
