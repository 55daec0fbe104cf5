#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dpep/assembler.hpp"

using namespace dpep;

namespace {

BoundRequest small_dgd(int K, double alpha, double lam) {
  BoundRequest req;
  req.method = "dgd";
  req.params.K = K;
  req.params.alpha = alpha;
  req.fclass = FunctionClass::bounded_gradient(1.0);
  req.init = InitialCondition::consensus_start(1.0);
  req.criterion = PerformanceCriterion::fval_gap_at_averaged_iterate();
  req.range = SpectralRange::symmetric(lam);
  return req;
}

double solved_value(const BoundRequest& req) {
  const auto rep = solve_bound(req);
  REQUIRE(rep.solver.usable());
  return rep.value;
}

// Centralized subgradient-method PEP over a single block, written out from
// scratch (no consensus, no perp leaves, zero gradient at the optimum).
double centralized_subgradient_value(int K, double alpha, double R, double D) {
  GramLayout layout;
  PEPObjectiveAndConstraints pc;

  const PointExpr x0 = PointExpr::leaf(Block::Parallel, layout.new_leaf(Block::Parallel, "x0"));
  const PointExpr xs = PointExpr::leaf(Block::Parallel, layout.new_leaf(Block::Parallel, "xs"));

  std::vector<PointExpr> x{x0}, g;
  std::vector<FValId> f;
  for (int k = 0; k < K; ++k) {
    g.push_back(PointExpr::leaf(Block::Parallel, layout.new_leaf(Block::Parallel, "g")));
    f.push_back(layout.new_fval("f"));
    x.push_back(combine({{1.0, x.back()}, {-alpha, g.back()}}));
  }
  PointExpr xav;
  for (const auto& xi : x) xav.add_scaled(1.0 / (K + 1), xi);
  g.push_back(PointExpr::leaf(Block::Parallel, layout.new_leaf(Block::Parallel, "gav")));
  f.push_back(layout.new_fval("fav"));
  x.resize(K);  // evaluation points: x^0..x^{K-1}
  x.push_back(xav);
  g.push_back(PointExpr{});  // zero gradient at the optimum
  f.push_back(layout.new_fval("fs"));
  x.push_back(xs);

  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      ScalarExpr e = ScalarExpr::fval(f[j]) - ScalarExpr::fval(f[i]);
      e.add_scaled(1.0, inner(g[j], x[i] - x[j]));
      pc.inequalities.push_back(std::move(e));
    }
    ScalarExpr cap = sq_norm(g[i]);
    cap.add_constant(-R * R);
    pc.inequalities.push_back(std::move(cap));
  }
  ScalarExpr init = sq_norm(x0 - xs);
  init.add_constant(-D * D);
  pc.inequalities.push_back(std::move(init));
  pc.equalities.push_back(ScalarExpr::fval(f[n - 1]));
  pc.objective = ScalarExpr::fval(f[n - 2]) - ScalarExpr::fval(f[n - 1]);

  layout.freeze();
  const auto r = default_solver().solve(to_standard_form(layout, pc), SolverSettings{});
  REQUIRE(r.usable());
  return r.objective;
}

}  // namespace

TEST_CASE("custom zero objective solves to zero") {
  BoundRequest req = small_dgd(1, 0.5, 0.5);
  req.criterion = PerformanceCriterion::custom_expr(ScalarExpr(0.0));
  CHECK(solved_value(req) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("K=0 mean squared distance saturates the initial condition") {
  BoundRequest req;
  req.method = "dgd";
  req.params.K = 0;
  req.fclass = FunctionClass::bounded_gradient(1.0);
  req.init = InitialCondition::consensus_start(1.0);
  req.criterion = PerformanceCriterion::mean_squared_distance_at_K();
  CHECK(solved_value(req) == doctest::Approx(1.0).epsilon(1e-6));

  req.init = InitialCondition::mean_squared_distance(2.0);
  CHECK(solved_value(req) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("dgd K=10 layout counts: 13 par leaves, n(n-1)+n interpolation rows") {
  BoundRequest req = small_dgd(10, 0.3, 0.5);
  const auto p = assemble_pep(req);
  // par leaves: x0, x*, g^0..g^9, g_av.
  CHECK(p.ctx.layout.num_leaves(Block::Parallel) == 13);
  // perp leaves: g^0..g^9, g_av, g*, 9 consensus outputs (the consensus
  // start makes the first step exact: x0 has no perp part).
  CHECK(p.ctx.layout.num_leaves(Block::Perp) == 21);
  CHECK(p.ctx.evals.evals().size() == 12);  // star, x^0..x^9, xav

  int interp = 0;
  for (const auto& e : p.pc.inequalities) (void)e, ++interp;
  // 12*11 pairs + 12 caps + 1 initial condition.
  CHECK(interp == 12 * 11 + 12 + 1);

  // One 9-column consensus class: LMIs of size 9.
  REQUIRE(p.pc.lmis.size() == 3);
  for (const auto& [m, s] : p.pc.lmis) CHECK(m.dim() == 9);
  CHECK(p.pc.equalities.size() == 36 + 1);  // k(k-1)/2 symmetry + f* gauge

  // With a mean-squared-distance start x0 keeps a perp part and all 10
  // consensus applications register.
  BoundRequest req2 = req;
  req2.init = InitialCondition::mean_squared_distance(1.0);
  const auto p2 = assemble_pep(req2);
  CHECK(p2.ctx.layout.num_leaves(Block::Perp) == 23);
  REQUIRE(p2.pc.lmis.size() == 3);
  for (const auto& [m, s] : p2.pc.lmis) CHECK(m.dim() == 10);
}

TEST_CASE("mean squared distance start emits one inequality with constant -D^2") {
  BoundRequest req = small_dgd(1, 0.5, 0.5);
  req.init = InitialCondition::mean_squared_distance(1.0);
  const auto p = assemble_pep(req);
  CHECK(!p.x0.zero(Block::Perp));
  bool found = false;
  for (const auto& e : p.pc.inequalities)
    if (e.constant() == -1.0 && e.fval_terms().empty()) found = true;
  CHECK(found);
}

TEST_CASE("consensus start has a structurally par-only initial point") {
  const auto p = assemble_pep(small_dgd(1, 0.5, 0.5));
  CHECK(p.x0.zero(Block::Perp));
}

TEST_CASE("a request without any consensus model is rejected") {
  BoundRequest req = small_dgd(1, 0.5, 0.5);
  req.range.reset();
  CHECK_THROWS_AS(assemble_pep(req), Error);
}

TEST_CASE("exact scalar mode matches the point-spectrum LMI mode") {
  const double c = 0.6;
  BoundRequest lmi = small_dgd(2, 0.5, 0.0);
  lmi.range = SpectralRange(c, c);
  BoundRequest exact = small_dgd(2, 0.5, 0.0);
  exact.exact_lambda2 = c;

  const double v_lmi = solved_value(lmi);
  const double v_exact = solved_value(exact);
  CHECK(v_lmi == doctest::Approx(v_exact).epsilon(1e-5));
}

TEST_CASE("dgd at lambda = 0 dominates the centralized subgradient PEP") {
  // At lambda = 0 the consensus step zeroes every perp component, but the
  // agents still evaluate subgradients at distinct points and the perp parts
  // of those subgradients feed back into the iterates, so the decentralized
  // worst case legitimately exceeds the single-sequence centralized one.
  const int K = 3;
  const double alpha = 0.4;
  const double v_dec = solved_value(small_dgd(K, alpha, 0.0));
  const double v_cen = centralized_subgradient_value(K, alpha, 1.0, 1.0);
  // Closed form for the centralized averaged-iterate bound.
  const double closed = (1.0 + alpha * alpha * (K + 1)) / (2.0 * alpha * (K + 1));
  CHECK(v_cen == doctest::Approx(closed).epsilon(1e-5));
  CHECK(v_dec >= v_cen - 1e-6);
}

TEST_CASE("reconstruction reproduces the objective and satisfies constraints") {
  const auto problem = assemble_pep(small_dgd(2, 0.5, 0.5));
  const auto rep = solve_pep(problem);
  REQUIRE(rep.solver.usable());

  const auto wc = reconstruct(problem, rep);
  CHECK(wc.ok);
  CHECK(wc.max_residual < 1e-6);
  CHECK(wc.objective_recomputed == doctest::Approx(rep.value).epsilon(1e-6));
  CHECK(wc.entries.size() == problem.ctx.evals.evals().size());
  // Gram blocks rebuilt from the factor match the solver output.
  const Eigen::MatrixXd Gp = wc.P_par.transpose() * wc.P_par;
  CHECK((Gp - rep.G_par).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("scaling homogeneity: value(D, R) = D R value(1, 1) for F_R") {
  const int K = 2;
  const double lam = 0.5;
  const double a0 = 0.5;
  BoundRequest base = small_dgd(K, a0, lam);
  const double v11 = solved_value(base);

  // Scaling x by D and gradient bounds by R rescales alpha by D / R.
  BoundRequest d2 = small_dgd(K, a0 * 2.0, lam);
  d2.init = InitialCondition::consensus_start(2.0);
  CHECK(solved_value(d2) == doctest::Approx(2.0 * v11).epsilon(1e-5));

  BoundRequest r3 = small_dgd(K, a0 / 3.0, lam);
  r3.fclass = FunctionClass::bounded_gradient(3.0);
  CHECK(solved_value(r3) == doctest::Approx(3.0 * v11).epsilon(1e-5));
}

TEST_CASE("scaling homogeneity: value(c D) = c^2 value(D) for smooth classes") {
  BoundRequest req;
  req.method = "dgd";
  req.params.K = 2;
  req.params.alpha = 0.3;
  req.fclass = FunctionClass::smooth_strongly_convex(0.1, 1.0);
  req.init = InitialCondition::mean_squared_distance(1.0);
  req.criterion = PerformanceCriterion::mean_squared_distance_at_K();
  req.range = SpectralRange::symmetric(0.5);
  const double v1 = solved_value(req);
  req.init = InitialCondition::mean_squared_distance(2.0);
  CHECK(solved_value(req) == doctest::Approx(4.0 * v1).epsilon(1e-5));
}

TEST_CASE("worst case is nondecreasing in the spectral radius") {
  double prev = -1.0;
  for (double lam : {0.0, 0.4, 0.8}) {
    const double v = solved_value(small_dgd(2, 0.5, lam));
    CHECK(v >= prev - 1e-7);
    prev = v;
  }
}
