#ifndef DPEP_EXPERIMENT_HPP
#define DPEP_EXPERIMENT_HPP

// Parameter sweeps over the spectral radius: assemble and solve one bound
// per lambda, optionally optimizing the step size, and emit deterministic
// CSV tables. Also hosts the verification suite driver (simulation
// soundness and the scalar-oracle tightness probe).

#include <cstdint>

#include "dpep/verification.hpp"

namespace dpep {

struct AlphaSearch {
  double lo = 0.0;  // 0 means a class-based default ([0.01/L, 2/L] smooth)
  double hi = 0.0;
  int grid_points = 25;
  int refine_iters = 20;
};

struct ExperimentConfig {
  std::string method = "dgd";
  MethodParams params;  // alpha ignored when optimize_alpha is set
  FunctionClass fclass = FunctionClass::bounded_gradient(1.0);
  InitialCondition init = InitialCondition::consensus_start(1.0);
  PerformanceCriterion::Kind criterion =
      PerformanceCriterion::Kind::FValGapAtAveragedIterate;
  std::vector<double> lambda_grid{0.0, 0.3, 0.6, 0.9};
  bool optimize_alpha = false;
  AlphaSearch alpha_search;
  std::optional<double> star_gradient_bound;
  SolverSettings solver;
  std::uint64_t seed = 1;
  std::string label;  // column label in merged tables; defaults to method+mode

  int verify_instances = 20;       // seeded instances per lambda in verify
  int oracle_grid_points = 41;     // lambda2 grid size for the oracle probe

  std::string effective_label() const;
  void validate() const;
};

/// Parses a JSON experiment description. Unknown keys are rejected. Keys:
/// method, K, alpha ("optimize" or a number), R | {mu, L}, D, criterion
/// ("fval-gap" | "msd"), init ("consensus" | "msd"), matrix_mode
/// ("constant" | "time-varying"), share_matrix_per_iteration, lambda_grid,
/// alpha_search {lo, hi, grid_points, refine_iters}, star_gradient_bound,
/// solver {feas_tol, gap_tol, max_iter, verbose}, seed, label,
/// verify_instances, oracle_grid_points.
ExperimentConfig config_from_json(const std::string& text);

/// Plain string table with a fixed column order; to_csv is deterministic
/// for identical inputs (UTF-8, comma separators, '.' decimals).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;
  std::string to_csv() const;
};

/// The request a sweep solves at one grid point.
BoundRequest request_from_config(const ExperimentConfig& config, double lambda,
                                 double alpha);

struct SweepRow {
  double lambda = 0.0;
  double alpha = 0.0;
  bool ok = false;
  double bound = 0.0;
  std::string status;
  double primal_infeas = 0.0, dual_infeas = 0.0, rel_gap = 0.0;
  int par_dim = 0, perp_dim = 0;
  double wall_ms = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool all_ok = false;
  Table table() const;  // lambda,alpha,bound,status,pinf,dinf,gap,par,perp,wall_ms
};

/// One solve per lambda in the grid; failures are recorded per row and the
/// sweep continues.
SweepResult run_sweep(const ExperimentConfig& config);

struct AlphaResult {
  double alpha_star = 0.0;
  double bound = 0.0;
  int evaluations = 0;
};

/// Coarse log-spaced grid over the search range, then golden-section
/// refinement around the best grid point. Unimodality in alpha is assumed;
/// the coarse grid guards against local dips.
AlphaResult optimize_alpha(const ExperimentConfig& config, double lambda);

/// Solves every config on the shared lambda grid and merges the bounds into
/// one table with a column per config label. Grids and criteria must match.
struct CompareResult {
  std::vector<SweepResult> per_config;
  Table table;
};
CompareResult compare_methods(const std::vector<ExperimentConfig>& configs);

struct VerifyRow {
  std::string check;
  bool pass = false;
  std::string detail;
};

struct VerifyResult {
  std::vector<VerifyRow> rows;
  bool all_pass = false;
  Table table() const;  // check,pass,detail
};

/// Per lambda: scalar-oracle soundness (oracle <= bound + 1e-6, gap
/// reported) and seeded explicit-instance simulations staying below the
/// bound. Instance samplers follow the function class: max-affine for the
/// bounded-gradient class, quadratics for the smooth class (with the star
/// gradient bound widened to cover each sampled instance).
VerifyResult run_verification(const ExperimentConfig& config);

}  // namespace dpep

#endif
