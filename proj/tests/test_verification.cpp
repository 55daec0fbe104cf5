#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "dpep/verification.hpp"

using namespace dpep;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("make_averaging_matrix: N=2 closed form and spectral structure") {
  const double a = 0.37;
  const MatrixXd W = make_averaging_matrix(2, {a}, 7);
  CHECK(W(0, 0) == doctest::Approx((1 + a) / 2).epsilon(1e-12));
  CHECK(W(0, 1) == doctest::Approx((1 - a) / 2).epsilon(1e-12));
  CHECK(W(1, 0) == doctest::Approx((1 - a) / 2).epsilon(1e-12));

  const MatrixXd W5 = make_averaging_matrix(5, {-0.4, 0.1, 0.3, 0.8}, 99);
  CHECK((W5 - W5.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((W5.rowwise().sum() - VectorXd::Ones(5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((W5.colwise().sum().transpose() - VectorXd::Ones(5)).cwiseAbs().maxCoeff() <
        1e-12);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(W5, Eigen::EigenvaluesOnly);
  VectorXd lam = es.eigenvalues();
  std::vector<double> expect{-0.4, 0.1, 0.3, 0.8, 1.0};
  std::sort(expect.begin(), expect.end());
  for (int i = 0; i < 5; ++i)
    CHECK(lam(i) == doctest::Approx(expect[i]).epsilon(1e-10));

  // Same seed, same matrix; different seed, different completion.
  CHECK((make_averaging_matrix(5, {-0.4, 0.1, 0.3, 0.8}, 99) - W5)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  CHECK_THROWS_AS(make_averaging_matrix(1, {}, 0), Error);
  CHECK_THROWS_AS(make_averaging_matrix(3, {0.5}, 0), Error);
  CHECK_THROWS_AS(make_averaging_matrix(2, {1.0}, 0), Error);
}

TEST_CASE("quadratic sampler: class membership and exact minimizer") {
  const double mu = 0.2, L = 1.5;
  const auto inst = sample_quadratic_instance(mu, L, 3, 2, {0.3, -0.1}, 42);
  REQUIRE(inst.functions.size() == 3);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (const auto& fi : inst.functions) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(fi.A, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= mu - 1e-12);
    CHECK(es.eigenvalues().maxCoeff() <= L + 1e-12);

    // Spot check the class inequalities at random point pairs.
    for (int t = 0; t < 5; ++t) {
      VectorXd x(2), y(2);
      for (int j = 0; j < 2; ++j) x(j) = normal(rng), y(j) = normal(rng);
      const VectorXd gx = fi.gradient(x);
      CHECK(fi.value(y) >=
            fi.value(x) + gx.dot(y - x) + 0.5 * mu * (y - x).squaredNorm() - 1e-10);
      CHECK((fi.gradient(x) - fi.gradient(y)).norm() <= L * (x - y).norm() + 1e-10);
    }
  }

  VectorXd gsum = VectorXd::Zero(2);
  for (const auto& fi : inst.functions) gsum += fi.gradient(inst.x_star);
  CHECK(gsum.norm() < 1e-10);

  const double disc = star_gradient_disagreement(inst);
  double acc = 0.0;
  for (const auto& fi : inst.functions) acc += fi.gradient(inst.x_star).squaredNorm();
  CHECK(disc == doctest::Approx(std::sqrt(acc / 3)).epsilon(1e-12));
}

TEST_CASE("max-affine sampler: bounded slopes and optimum at zero") {
  const double R = 2.0;
  const auto inst = sample_max_affine_instance(R, 4, 2, 3, {0.5, 0.5, -0.5}, 11);
  VectorXd g0 = VectorXd::Zero(2);
  for (const auto& fi : inst.functions) {
    for (int j = 0; j < fi.S.rows(); ++j) CHECK(fi.S.row(j).norm() <= R + 1e-12);
    CHECK(fi.value(VectorXd::Zero(2)) == doctest::Approx(0.0));
    g0 += fi.gradient(VectorXd::Zero(2));
  }
  CHECK(g0.norm() < 1e-10);  // x* = 0 is optimal for the average
  CHECK(inst.x_star.norm() == 0.0);
}

TEST_CASE("identical functions and consensus start reduce dgd to centralized") {
  // All agents share one quadratic and one starting point: consensus keeps
  // them equal and each runs plain gradient descent.
  ExplicitInstance inst;
  inst.N = 3;
  inst.d = 1;
  inst.W = make_averaging_matrix(3, {0.6, -0.2}, 3);
  for (int i = 0; i < 3; ++i)
    inst.functions.push_back(LocalFunction::quadratic(
        MatrixXd::Constant(1, 1, 1.0), VectorXd::Constant(1, -1.0)));
  inst.x_star = VectorXd::Constant(1, 1.0);

  MethodParams params;
  params.K = 6;
  params.alpha = 0.4;
  const auto x0 = sample_initial_states(inst, InitialCondition::consensus_start(1.0), 9);
  const auto sim = simulate_method(inst, "dgd", params, x0,
                                   PerformanceCriterion::Kind::MeanSquaredDistanceAtK);
  CHECK(!sim.diverged);

  double z = x0[0](0);
  for (int k = 0; k < params.K; ++k) z = z - params.alpha * (z - 1.0);
  for (int i = 0; i < 3; ++i)
    CHECK(sim.iterates.back()[i](0) == doctest::Approx(z).epsilon(1e-12));
  CHECK(sim.criterion == doctest::Approx((z - 1.0) * (z - 1.0)).epsilon(1e-10));
}

TEST_CASE("simulated criteria stay below the spectral bounds") {
  const double lam = 0.6;
  std::vector<double> eigs2{0.6}, eigs3{0.6, -0.6};

  // DGD on bounded-gradient instances, averaged-iterate value gap.
  {
    BoundRequest req;
    req.method = "dgd";
    req.params.K = 3;
    req.params.alpha = 0.5;
    req.fclass = FunctionClass::bounded_gradient(1.0);
    req.init = InitialCondition::consensus_start(1.0);
    req.criterion = PerformanceCriterion::fval_gap_at_averaged_iterate();
    req.range = SpectralRange::symmetric(lam);
    const auto rep = solve_bound(req);
    REQUIRE(rep.solver.usable());

    for (std::uint64_t seed : {1, 2, 3, 4}) {
      const auto inst = sample_max_affine_instance(1.0, 3, 2, 3, eigs3, seed);
      const auto x0 =
          sample_initial_states(inst, InitialCondition::consensus_start(1.0), seed);
      const auto sim =
          simulate_method(inst, "dgd", req.params, x0,
                          PerformanceCriterion::Kind::FValGapAtAveragedIterate);
      CHECK(!sim.diverged);
      CHECK(sim.criterion <= rep.value + 1e-6);
    }
  }

  // DIGing and EXTRA on quadratics, mean squared distance, with the star
  // gradient bound covering the sampled instances' actual disagreement.
  for (const char* method : {"diging", "extra"}) {
    for (std::uint64_t seed : {10, 11}) {
      const auto inst = sample_quadratic_instance(0.1, 1.0, 2, 1, eigs2, seed);
      BoundRequest req;
      req.method = method;
      req.params.K = 3;
      req.params.alpha = 0.2;
      req.fclass = FunctionClass::smooth_strongly_convex(0.1, 1.0);
      req.init = InitialCondition::mean_squared_distance(1.0);
      req.criterion = PerformanceCriterion::mean_squared_distance_at_K();
      req.range = SpectralRange::symmetric(lam);
      req.star_gradient_bound =
          std::max(1.0, star_gradient_disagreement(inst) + 1e-9);
      const auto rep = solve_bound(req);
      REQUIRE(rep.solver.usable());

      const auto x0 =
          sample_initial_states(inst, InitialCondition::mean_squared_distance(1.0), seed);
      const auto sim =
          simulate_method(inst, method, req.params, x0,
                          PerformanceCriterion::Kind::MeanSquaredDistanceAtK);
      CHECK(!sim.diverged);
      CHECK(sim.criterion <= rep.value + 1e-6);
    }
  }
}

TEST_CASE("time-varying simulation consumes one matrix per class") {
  const auto inst = sample_quadratic_instance(0.5, 1.0, 2, 1, {0.2}, 21);
  MethodParams params;
  params.K = 2;
  params.alpha = 0.3;
  params.matrix_mode = MatrixMode::TimeVarying;
  const auto x0 =
      sample_initial_states(inst, InitialCondition::mean_squared_distance(1.0), 4);

  std::vector<MatrixXd> two{make_averaging_matrix(2, {0.1}, 1),
                            make_averaging_matrix(2, {-0.2}, 2)};
  CHECK_NOTHROW(simulate_method(inst, "dgd", params, x0,
                                PerformanceCriterion::Kind::MeanSquaredDistanceAtK,
                                two));
  // DIGing without per-iteration sharing needs two matrices per iteration.
  params.share_matrix_per_iteration = false;
  CHECK_THROWS_AS(
      simulate_method(inst, "diging", params, x0,
                      PerformanceCriterion::Kind::MeanSquaredDistanceAtK, two),
      Error);
}

TEST_CASE("scalar oracle stays below the spectral bound and is tight for dgd") {
  BoundRequest req;
  req.method = "dgd";
  req.params.K = 3;
  req.params.alpha = 0.5;
  req.fclass = FunctionClass::bounded_gradient(1.0);
  req.init = InitialCondition::consensus_start(1.0);
  req.criterion = PerformanceCriterion::fval_gap_at_averaged_iterate();
  req.range = SpectralRange::symmetric(0.6);

  const auto rep = solve_bound(req);
  REQUIRE(rep.solver.usable());

  const auto oracle = scalar_oracle(req, {-0.6, -0.3, 0.0, 0.3, 0.6});
  CHECK(oracle.samples.size() == 5);
  CHECK(oracle.value <= rep.value + 1e-6);
  CHECK(oracle.value >= 0.99 * rep.value);  // empirical tightness
  CHECK(std::abs(oracle.argmax_lambda2) == doctest::Approx(0.6));

  CHECK_THROWS_AS(scalar_oracle(req, {0.7}), Error);
  BoundRequest no_range = req;
  no_range.range.reset();
  no_range.exact_lambda2 = 0.3;
  CHECK_THROWS_AS(scalar_oracle(no_range), Error);
}

TEST_CASE("oracle at a zero-width range equals the spectral bound") {
  BoundRequest req;
  req.method = "dgd";
  req.params.K = 2;
  req.params.alpha = 0.5;
  req.fclass = FunctionClass::bounded_gradient(1.0);
  req.init = InitialCondition::consensus_start(1.0);
  req.criterion = PerformanceCriterion::fval_gap_at_averaged_iterate();
  req.range = SpectralRange(0.0, 0.0);

  const auto rep = solve_bound(req);
  REQUIRE(rep.solver.usable());
  const auto oracle = scalar_oracle(req, {0.0});
  CHECK(oracle.value == doctest::Approx(rep.value).epsilon(1e-7));
}
