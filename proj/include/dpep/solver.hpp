#ifndef DPEP_SOLVER_HPP
#define DPEP_SOLVER_HPP

// Conic solver adapter contract and the built-in interior-point solver.
// The built-in solver is an infeasible primal-dual path-following method
// with Nesterov-Todd scaling and an adaptive centering parameter, operating
// directly on the block LMI standard form. Equalities are kept explicit and
// handled through a second Schur complement.

#include <memory>
#include <string>

#include "dpep/standard_form.hpp"

namespace dpep {

struct SolverSettings {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  bool verbose = false;
};

enum class SolveStatus { Optimal, NearOptimal, Infeasible, Unbounded, SolverFailure };

const char* status_name(SolveStatus s);

struct SolverResult {
  SolveStatus status = SolveStatus::SolverFailure;
  double objective = 0.0;  // b^T y + obj_const
  Eigen::VectorXd y;
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
  double rel_gap = 0.0;
  int iterations = 0;
  std::string message;

  bool usable() const {
    return status == SolveStatus::Optimal || status == SolveStatus::NearOptimal;
  }
};

/// Deterministic given identical inputs and settings; concurrent independent
/// invocations must be safe.
class SolverAdapter {
public:
  virtual ~SolverAdapter() = default;
  virtual std::string name() const = 0;
  virtual SolverResult solve(const SDPStandardForm& form,
                             const SolverSettings& settings) const = 0;
};

class InteriorPointSolver final : public SolverAdapter {
public:
  std::string name() const override { return "dpep-ipm"; }
  SolverResult solve(const SDPStandardForm& form,
                     const SolverSettings& settings) const override;
};

const SolverAdapter& default_solver();

}  // namespace dpep

#endif
