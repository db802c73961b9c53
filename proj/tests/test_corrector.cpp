#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "clab/corrector.hpp"
#include "clab/walk.hpp"
#include "support/oracles.hpp"

using namespace clab;

TEST_CASE("generator action and quadratic form") {
  Geometry g(2, 8);
  Environment env = sample_iid_nn(Marginal::constant(1.0), g, 1);
  GeneratorMatrix op(env);

  Eigen::VectorXd ind = Eigen::VectorXd::Zero(env.sites());
  ind[0] = 1.0;
  Eigen::VectorXd li = op.apply(ind);
  CHECK(li[0] == doctest::Approx(-4.0));
  for (int k = 0; k < env.degree(0); ++k) CHECK(li[env.neighbors(0)[k]] == doctest::Approx(1.0));
  CHECK(op.quadratic(ind) == doctest::Approx(env.pi()[0]));

  // applying to a constant yields zero
  CHECK(op.apply(Eigen::VectorXd::Constant(env.sites(), 3.0)).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));

  // quadratic form equals half the brute-force ordered double sum
  Environment rnd = sample_iid_nn(Marginal::uniform(1, 2), g, 5);
  GeneratorMatrix oprnd(rnd);
  RngStream rng(2, 0);
  Eigen::VectorXd f(rnd.sites());
  for (Index x = 0; x < rnd.sites(); ++x) f[x] = rng.normal();
  double dsum = 0;
  for (Index x = 0; x < rnd.sites(); ++x)
    for (Index y = 0; y < rnd.sites(); ++y) {
      const double c = rnd.conductance(x, y);
      if (c > 0) dsum += c * (f[y] - f[x]) * (f[y] - f[x]);
    }
  CHECK(oprnd.quadratic(f) == doctest::Approx(dsum / 2).epsilon(1e-12));

  // sparse matrix agrees with the matrix-free action
  const Eigen::VectorXd via_sparse = -(oprnd.neg_sparse() * f);
  CHECK((via_sparse - oprnd.apply(f)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constant environment: zero corrector, Sigma = I/d") {
  for (int d : {2, 3}) {
    Geometry g(d, d == 2 ? 8 : 4);
    Environment env = sample_iid_nn(Marginal::constant(1.0), g, 1);
    CorrectorField field = solve_corrector(env);
    CHECK(field.converged);
    CHECK(field.chi.cwiseAbs().maxCoeff() <= 1e-10);
    const Eigen::MatrixXd sigma = covariance_sigma(env, field);
    CHECK((sigma - Eigen::MatrixXd::Identity(d, d) / d).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("layered environment: first component stays zero") {
  // horizontal weights constant per row, vertical all ones: left/right
  // weights agree at every site, so the first coordinate is already harmonic
  Geometry g(2, 8);
  std::vector<Edge> edges;
  for (Index x = 0; x < g.sites(); ++x) {
    const int row = g.coords(x)[1];
    edges.push_back({x, g.step(x, 0, +1), 1.0 + 0.1 * row});
    edges.push_back({x, g.step(x, 1, +1), 1.0});
  }
  Environment env = Environment::from_edges(g, edges, {});
  CorrectorField field = solve_corrector(env);
  CHECK(field.chi.col(0).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("iterative solve matches dense elimination on small tori") {
  for (std::uint64_t seed : {1, 2, 3}) {
    Geometry g(2, 6);
    Environment env = sample_iid_nn(Marginal::uniform(1, 2), g, seed);
    CorrectorField field = solve_corrector(env);
    const Eigen::MatrixXd dense = oracle::dense_corrector(env);
    CHECK((field.chi - dense).cwiseAbs().maxCoeff() < 1e-8);
    // covariance computed from either solution agrees
    CorrectorField densefield{dense, 0, 0, true};
    const Eigen::MatrixXd s1 = covariance_sigma(env, field);
    const Eigen::MatrixXd s2 = covariance_sigma(env, densefield);
    CHECK((s1 - s2).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("gauge invariance of residual and covariance") {
  Geometry g(2, 6);
  Environment env = sample_iid_nn(Marginal::uniform(1, 2), g, 4);
  CorrectorField field = solve_corrector(env);
  const Eigen::MatrixXd sigma = covariance_sigma(env, field);
  CorrectorField shifted = field;
  shifted.chi.rowwise() += Eigen::RowVector2d(0.7, -1.3);
  const Eigen::MatrixXd sigma2 = covariance_sigma(env, shifted);
  CHECK((sigma - sigma2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(sigma.isApprox(sigma.transpose(), 1e-12));
  // positive semidefinite
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  CHECK(es.eigenvalues().minCoeff() > -1e-9);
}

TEST_CASE("disconnected environments are rejected") {
  Geometry g(2, 4);
  // two horizontal rings with no vertical edges: disconnected
  std::vector<Edge> edges;
  for (Index x = 0; x < g.sites(); ++x) edges.push_back({x, g.step(x, 0, +1), 1.0});
  Environment env = Environment::from_edges(g, edges, {});
  CHECK(!env.connected());
  CHECK_THROWS(solve_corrector(env));
}

TEST_CASE("harmonic coordinate is a martingale along the chain") {
  Geometry g(2, 8);
  Environment env = sample_iid_nn(Marginal::uniform(1, 2), g, 6);
  CorrectorField field = solve_corrector(env);
  // empirical mean of Psi(Z_n) - Psi(Z_0) over many short runs
  const int reps = 2000, steps = 50;
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  double sq = 0;
  for (int i = 0; i < reps; ++i) {
    Trajectory traj = run_walk(env, WalkKind::Z, 0, steps, 31, i);
    const Eigen::MatrixXd pos = unwrapped_positions(traj, g);
    const Index last = traj.sites.back();
    Eigen::Vector2d inc = pos.row(steps).transpose() +
                          (field.chi.row(last) - field.chi.row(0)).transpose();
    acc += inc;
    sq += inc.squaredNorm();
  }
  acc /= reps;
  const double sd = std::sqrt(sq / reps / reps);  // per-component scale
  CHECK(acc.norm() < 3 * sd);
}

TEST_CASE("sublinearity profile definitions") {
  Geometry g(2, 16);
  Environment env = sample_iid_nn(Marginal::constant(1.0), g, 1);
  CorrectorField field = solve_corrector(env);
  SublinearityProfile prof = sublinearity_profile(env, field, {2, 4}, {0.1, 0.5});
  CHECK(prof.S.cwiseAbs().maxCoeff() < 1e-9);   // chi = 0
  CHECK(prof.A.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS(sublinearity_profile(env, field, {9}, {0.1}));  // radius overflow
}

TEST_CASE("trap energy bounds on a planted trap") {
  Geometry g(3, 32);
  TrapSpec spec = TrapSpec::with_defaults(3, 2);
  Environment env = plant_trap(spec, 2, 0, g);
  CorrectorField field = solve_corrector(env);
  TrapEnergyReport rep = trap_energy_check(env, field, spec, 2, 0);
  CHECK(rep.energy > 0);
  CHECK(rep.lower_ok);
  CHECK(rep.upper_ok);
  // asking for a trap that is not there fails
  CHECK_THROWS(trap_energy_check(env, field, spec, 2, 1000));
}
