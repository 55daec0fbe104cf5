#ifndef DPEP_METHODS_HPP
#define DPEP_METHODS_HPP

// Decentralized first-order methods expressed as traces of gradient,
// consensus and combination operations in basis b. The builders only record
// symbolic updates; the consensus matrices stay abstract.

#include <string>
#include <vector>

#include "dpep/consensus.hpp"
#include "dpep/function_class.hpp"

namespace dpep {

/// One PEP under construction: the layout plus the consensus registry and
/// the evaluation set that methods and constraints write into.
struct ProblemContext {
  GramLayout layout;
  ConsensusRegistry consensus;
  EvaluationSet evals;
};

enum class MatrixMode { Constant, TimeVarying };

struct MethodParams {
  int K = 1;
  double alpha = 1.0;
  MatrixMode matrix_mode = MatrixMode::Constant;
  // In time-varying mode, DIGing's two consensus applications within one
  // iteration share a matrix by default (the algorithm applies the same W^k
  // to x and s); set false to give every application its own class.
  bool share_matrix_per_iteration = true;

  void validate() const {
    if (K < 0) throw Error("iteration count K must be >= 0");
    if (!(alpha > 0)) throw Error("step size alpha must be positive");
  }
};

struct MethodTrace {
  std::vector<PointExpr> iterates;          // x^0 ... x^K
  std::vector<std::size_t> eval_indices;    // gradient evaluations, in order
  std::vector<MatrixClassId> consensus_ids; // distinct ids, in creation order
};

MethodTrace build_dgd(ProblemContext& ctx, const MethodParams& params,
                      const PointExpr& x0);
MethodTrace build_diging(ProblemContext& ctx, const MethodParams& params,
                         const PointExpr& x0);
MethodTrace build_extra(ProblemContext& ctx, const MethodParams& params,
                        const PointExpr& x0);

/// Builder lookup by method name ("dgd", "diging", "extra").
MethodTrace build_method(const std::string& name, ProblemContext& ctx,
                         const MethodParams& params, const PointExpr& x0);
bool method_known(const std::string& name);
std::vector<std::string> method_names();

/// Average of all iterates, projected on the consensus subspace: the
/// criterion evaluates f at a consensus point, whose perp part is zero.
PointExpr averaged_iterate(const MethodTrace& trace);

}  // namespace dpep

#endif
