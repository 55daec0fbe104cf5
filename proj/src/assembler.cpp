#include "dpep/assembler.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace dpep {

PEPProblem assemble_pep(const BoundRequest& req) {
  if (!req.range && !req.exact_lambda2)
    throw Error("either a spectral range or an exact lambda2 must be given");
  req.params.validate();

  PEPProblem p;
  ProblemContext& ctx = p.ctx;

  // A point spectrum admits a single matrix (lam * I on the perp block), so
  // both the exact-scalar oracle and a degenerate range substitute the
  // scalar action structurally; emitting ||y - lam x||^2 <= 0 instead would
  // leave the SDP without a strictly feasible point.
  std::optional<double> exact = req.exact_lambda2;
  if (!exact && req.range && req.range->lam_minus == req.range->lam_plus)
    exact = req.range->lam_minus;
  if (exact) ctx.consensus.set_exact_scalar(*exact);

  const Evaluation star = ctx.evals.add_optimum(ctx.layout);

  // Initial point per the initial condition: a consensus start has no perp
  // component at all.
  p.x0 = PointExpr::leaf(Block::Parallel,
                         ctx.layout.new_leaf(Block::Parallel, "x_par[0]"));
  if (req.init.kind == InitialCondition::Kind::MeanSquaredDistance)
    p.x0 = p.x0 + PointExpr::leaf(Block::Perp,
                                  ctx.layout.new_leaf(Block::Perp, "x_perp[0]"));

  p.trace = build_method(req.method, ctx, req.params, p.x0);

  switch (req.criterion.kind) {
    case PerformanceCriterion::Kind::FValGapAtAveragedIterate: {
      if (static_cast<int>(p.trace.iterates.size()) != req.params.K + 1)
        throw Error("averaged-iterate criterion needs the full iterate list");
      const Evaluation& av =
          ctx.evals.add_evaluation(ctx.layout, averaged_iterate(p.trace), "xav");
      p.pc.objective = fval_gap(av, star);
      break;
    }
    case PerformanceCriterion::Kind::MeanSquaredDistanceAtK:
      p.pc.objective = sq_norm(p.trace.iterates.back() - star.point);
      break;
    case PerformanceCriterion::Kind::Custom:
      p.pc.objective = req.criterion.custom;
      break;
  }

  for (auto& e : interpolation_constraints(ctx.evals, req.fclass))
    p.pc.inequalities.push_back(std::move(e));

  if (!exact) {
    auto sc = spectral_constraints(ctx.consensus, *req.range);
    for (auto& e : sc.equalities) p.pc.equalities.push_back(std::move(e));
    for (auto& e : sc.inequalities) p.pc.inequalities.push_back(std::move(e));
    for (auto& l : sc.lmis) p.pc.lmis.push_back(std::move(l));
  }

  // Initial condition: ||x0 - x*||^2 <= D^2 (the consensus-start variant is
  // the same inequality, with x0 structurally confined to the par block).
  {
    ScalarExpr ic = sq_norm(p.x0 - star.point);
    ic.add_constant(-req.init.D * req.init.D);
    p.pc.inequalities.push_back(std::move(ic));
  }

  // Smooth classes leave gradient norms uncapped, so the disagreement of
  // the local gradients at the optimum (the star's perp gradient) must be
  // bounded explicitly or the worst case is infinite for every method.
  if (req.fclass.kind == FunctionClass::Kind::SmoothStronglyConvex) {
    const double B = req.star_gradient_bound
                         ? *req.star_gradient_bound
                         : req.fclass.L * req.init.D;
    if (!(B > 0)) throw Error("star gradient bound must be positive");
    ScalarExpr sg = sq_norm(star.grad);
    sg.add_constant(-B * B);
    p.pc.inequalities.push_back(std::move(sg));
  }

  if (req.gauge_fstar) p.pc.equalities.push_back(ScalarExpr::fval(star.fval));

  ctx.layout.freeze();
  p.form = to_standard_form(ctx.layout, p.pc);
  return p;
}

PEPSolveReport solve_pep(const PEPProblem& problem, const SolverAdapter& adapter,
                         const SolverSettings& settings) {
  PEPSolveReport rep;
  rep.solver = adapter.solve(problem.form, settings);
  if (rep.solver.usable()) {
    const VariableIndex vars(problem.ctx.layout);
    rep.value = rep.solver.objective;
    rep.G_par = vars.unpack_gram(Block::Parallel, rep.solver.y);
    rep.G_perp = vars.unpack_gram(Block::Perp, rep.solver.y);
    rep.f_v = vars.unpack_fvals(rep.solver.y);
  }
  return rep;
}

PEPSolveReport solve_bound(const BoundRequest& req, const SolverSettings& settings) {
  const PEPProblem p = assemble_pep(req);
  return solve_pep(p, default_solver(), settings);
}

double eval_scalar(const ScalarExpr& e, const Eigen::MatrixXd& G_par,
                   const Eigen::MatrixXd& G_perp, const Eigen::VectorXd& f_v) {
  double v = e.constant();
  for (const auto& [k, c] : e.gram_terms()) {
    const Eigen::MatrixXd& G = k.block == Block::Parallel ? G_par : G_perp;
    v += c * G(k.i, k.j);
  }
  for (const auto& [id, c] : e.fval_terms()) v += c * f_v(id);
  return v;
}

Eigen::MatrixXd eval_matrix(const MatrixExpr& m, const Eigen::MatrixXd& G_par,
                            const Eigen::MatrixXd& G_perp,
                            const Eigen::VectorXd& f_v) {
  Eigen::MatrixXd M(m.dim(), m.dim());
  for (int r = 0; r < m.dim(); ++r)
    for (int c = r; c < m.dim(); ++c)
      M(r, c) = M(c, r) = eval_scalar(m.at(r, c), G_par, G_perp, f_v);
  return M;
}

Eigen::VectorXd eval_point(const PointExpr& p, Block b, const Eigen::MatrixXd& P) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(P.rows());
  for (const auto& [id, c] : p.coeffs(b)) v += c * P.col(id);
  return v;
}

namespace {

// Coordinates from a PSD matrix: rows scaled eigenvectors above the clip.
Eigen::MatrixXd factor_gram(const Eigen::MatrixXd& G, double tol) {
  if (G.rows() == 0) return Eigen::MatrixXd(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const auto& lam = es.eigenvalues();
  const double clip = tol * std::max(1.0, lam.cwiseAbs().maxCoeff());
  std::vector<int> keep;
  for (int i = 0; i < lam.size(); ++i)
    if (lam(i) > clip) keep.push_back(i);
  Eigen::MatrixXd P(static_cast<int>(keep.size()), G.cols());
  for (std::size_t r = 0; r < keep.size(); ++r)
    P.row(static_cast<int>(r)) =
        std::sqrt(lam(keep[r])) * es.eigenvectors().col(keep[r]).transpose();
  return P;
}

}  // namespace

WorstCaseData reconstruct(const PEPProblem& problem, const PEPSolveReport& report,
                          double tol) {
  if (!report.solver.usable())
    throw Error("reconstruction needs an Optimal or NearOptimal solution");

  WorstCaseData wc;
  wc.P_par = factor_gram(report.G_par, tol);
  wc.P_perp = factor_gram(report.G_perp, tol);

  for (const auto& ev : problem.ctx.evals.evals()) {
    WorstCaseData::Entry e;
    e.label = ev.label;
    e.x_par = eval_point(ev.point, Block::Parallel, wc.P_par);
    e.x_perp = eval_point(ev.point, Block::Perp, wc.P_perp);
    e.g_par = eval_point(ev.grad, Block::Parallel, wc.P_par);
    e.g_perp = eval_point(ev.grad, Block::Perp, wc.P_perp);
    e.f = report.f_v(ev.fval);
    wc.entries.push_back(std::move(e));
  }

  // Re-check everything against the reconstructed (factorized) Gram data,
  // not the raw solver output.
  const Eigen::MatrixXd Gp = wc.P_par.transpose() * wc.P_par;
  const Eigen::MatrixXd Gq = wc.P_perp.transpose() * wc.P_perp;
  double resid = 0.0;
  for (const auto& e : problem.pc.equalities)
    resid = std::max(resid, std::abs(eval_scalar(e, Gp, Gq, report.f_v)));
  for (const auto& e : problem.pc.inequalities)
    resid = std::max(resid, eval_scalar(e, Gp, Gq, report.f_v));
  for (const auto& [m, sign] : problem.pc.lmis) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        eval_matrix(m, Gp, Gq, report.f_v), Eigen::EigenvaluesOnly);
    if (sign == MatrixSign::PositiveSemidefinite)
      resid = std::max(resid, -es.eigenvalues().minCoeff());
    else
      resid = std::max(resid, es.eigenvalues().maxCoeff());
  }
  wc.max_residual = resid;
  wc.objective_recomputed = eval_scalar(problem.pc.objective, Gp, Gq, report.f_v);

  const double obj_err = std::abs(wc.objective_recomputed - report.value);
  if (resid > 10.0 * std::sqrt(tol) || obj_err > 10.0 * std::sqrt(tol)) {
    wc.ok = false;
    wc.message = "reconstruction residual above tolerance";
  } else {
    wc.ok = true;
  }
  return wc;
}

}  // namespace dpep
