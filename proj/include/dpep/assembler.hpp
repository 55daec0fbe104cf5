#ifndef DPEP_ASSEMBLER_HPP
#define DPEP_ASSEMBLER_HPP

// Assembles a complete performance-estimation SDP for one method, function
// class, initial condition and criterion; solves it through a solver
// adapter; and reconstructs an explicit worst-case realization from the
// solved Gram blocks.

#include <optional>

#include "dpep/methods.hpp"
#include "dpep/solver.hpp"
#include "dpep/standard_form.hpp"

namespace dpep {

struct InitialCondition {
  enum class Kind { ConsensusStart, MeanSquaredDistance };
  Kind kind = Kind::ConsensusStart;
  double D = 1.0;

  static InitialCondition consensus_start(double D) {
    if (!(D > 0)) throw Error("initial distance bound D must be positive");
    return InitialCondition{Kind::ConsensusStart, D};
  }
  static InitialCondition mean_squared_distance(double D) {
    if (!(D > 0)) throw Error("initial distance bound D must be positive");
    return InitialCondition{Kind::MeanSquaredDistance, D};
  }
};

struct PerformanceCriterion {
  enum class Kind { FValGapAtAveragedIterate, MeanSquaredDistanceAtK, Custom };
  Kind kind = Kind::FValGapAtAveragedIterate;
  ScalarExpr custom;

  static PerformanceCriterion fval_gap_at_averaged_iterate() {
    return PerformanceCriterion{Kind::FValGapAtAveragedIterate, {}};
  }
  static PerformanceCriterion mean_squared_distance_at_K() {
    return PerformanceCriterion{Kind::MeanSquaredDistanceAtK, {}};
  }
  static PerformanceCriterion custom_expr(ScalarExpr e) {
    return PerformanceCriterion{Kind::Custom, std::move(e)};
  }
};

struct BoundRequest {
  std::string method = "dgd";
  MethodParams params;
  FunctionClass fclass = FunctionClass::bounded_gradient(1.0);
  InitialCondition init = InitialCondition::consensus_start(1.0);
  PerformanceCriterion criterion = PerformanceCriterion::fval_gap_at_averaged_iterate();
  // Consensus model: a spectral range for the unknown matrices, or an exact
  // scalar action (the N = 2 oracle), applied to every matrix class.
  std::optional<SpectralRange> range = SpectralRange::symmetric(0.0);
  std::optional<double> exact_lambda2;
  bool gauge_fstar = true;  // add f_* = 0 to remove the value-shift degeneracy
  // Bound on the optimum's perp gradient, i.e. on how much the local
  // gradients may disagree at x*. Smooth classes put no cap on gradient
  // norms, so without this bound the worst case is infinite for every
  // method here: an adversary can scale the disagreement at the optimum
  // freely while keeping x^0 = x*, and the iterates scale with it. Defaults
  // to L * D for smooth classes (which keeps the D^2 scaling of the bound
  // exact); ignored for bounded-gradient classes, which cap ||g*|| already.
  std::optional<double> star_gradient_bound;
};

struct PEPProblem {
  ProblemContext ctx;
  MethodTrace trace;
  PointExpr x0;
  PEPObjectiveAndConstraints pc;
  SDPStandardForm form;
};

PEPProblem assemble_pep(const BoundRequest& req);

struct PEPSolveReport {
  SolverResult solver;
  double value = 0.0;  // upper bound on the worst case when usable
  Eigen::MatrixXd G_par, G_perp;
  Eigen::VectorXd f_v;
};

PEPSolveReport solve_pep(const PEPProblem& problem,
                         const SolverAdapter& adapter = default_solver(),
                         const SolverSettings& settings = SolverSettings{});

/// One-call convenience: assemble then solve.
PEPSolveReport solve_bound(const BoundRequest& req,
                           const SolverSettings& settings = SolverSettings{});

// ---- numeric evaluation of expressions under explicit Gram data ----

double eval_scalar(const ScalarExpr& e, const Eigen::MatrixXd& G_par,
                   const Eigen::MatrixXd& G_perp, const Eigen::VectorXd& f_v);
Eigen::MatrixXd eval_matrix(const MatrixExpr& m, const Eigen::MatrixXd& G_par,
                            const Eigen::MatrixXd& G_perp,
                            const Eigen::VectorXd& f_v);

// ---- worst-case reconstruction ----

struct WorstCaseData {
  struct Entry {
    std::string label;
    Eigen::VectorXd x_par, x_perp, g_par, g_perp;
    double f = 0.0;
  };
  std::vector<Entry> entries;
  // Explicit coordinates of every leaf: column l holds the coordinates of
  // leaf l in dimension = numerical rank of the block.
  Eigen::MatrixXd P_par, P_perp;
  double objective_recomputed = 0.0;
  double max_residual = 0.0;
  bool ok = false;
  std::string message;
};

/// Factorizes the solved Gram blocks (eigenvalue clipping at tol), recovers
/// explicit coordinates for every leaf, and re-checks every constraint and
/// the objective on the reconstructed data.
WorstCaseData reconstruct(const PEPProblem& problem, const PEPSolveReport& report,
                          double tol = 1e-7);

Eigen::VectorXd eval_point(const PointExpr& p, Block b, const Eigen::MatrixXd& P);

}  // namespace dpep

#endif
