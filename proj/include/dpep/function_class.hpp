#ifndef DPEP_FUNCTION_CLASS_HPP
#define DPEP_FUNCTION_CLASS_HPP

// Function classes and their interpolation conditions, applied to a set of
// labeled evaluations (point, gradient, function value). Two classes are
// supported: convex functions with bounded (sub)gradient norm, and smooth
// (strongly) convex functions.

#include <optional>
#include <vector>

#include "dpep/expr.hpp"

namespace dpep {

struct FunctionClass {
  enum class Kind { BoundedGradientConvex, SmoothStronglyConvex };

  Kind kind = Kind::BoundedGradientConvex;
  double R = 1.0;   // gradient norm bound (BoundedGradientConvex)
  double mu = 0.0;  // strong convexity modulus (SmoothStronglyConvex)
  double L = 1.0;   // smoothness modulus (SmoothStronglyConvex)

  static FunctionClass bounded_gradient(double R) {
    if (!(R > 0)) throw Error("gradient bound R must be positive");
    FunctionClass c;
    c.kind = Kind::BoundedGradientConvex;
    c.R = R;
    return c;
  }

  static FunctionClass smooth_strongly_convex(double mu, double L) {
    if (!(mu >= 0) || !(L > 0) || !(mu <= L))
      throw Error("smooth strongly convex class requires 0 <= mu <= L < inf");
    FunctionClass c;
    c.kind = Kind::SmoothStronglyConvex;
    c.mu = mu;
    c.L = L;
    return c;
  }
};

struct Evaluation {
  std::string label;
  PointExpr point;
  PointExpr grad;
  FValId fval = -1;
};

/// Labeled triples fed to the interpolation conditions; index set
/// {0,...,K,*} in the usual PEP discretization. At most one evaluation is
/// the optimum (the "star").
class EvaluationSet {
public:
  /// Creates an evaluation at the given point (or at a fresh point if
  /// `point` is empty), with fresh gradient leaves in both blocks and a
  /// fresh function-value symbol.
  const Evaluation& add_evaluation(GramLayout& layout,
                                   std::optional<PointExpr> point,
                                   const std::string& label);

  /// Creates the optimum evaluation: its point has no perp component and
  /// its gradient has no parallel component.
  const Evaluation& add_optimum(GramLayout& layout,
                                const std::string& label = "*");

  const std::vector<Evaluation>& evals() const { return evals_; }
  bool has_star() const { return star_.has_value(); }
  const Evaluation& star() const {
    if (!star_) throw Error("no optimum evaluation in the set");
    return evals_[*star_];
  }

private:
  void check_label(const std::string& label) const;

  std::vector<Evaluation> evals_;
  std::optional<std::size_t> star_;
};

/// Interpolation conditions for the class, each returned as a normalized
/// "expr <= 0" ScalarExpr. Emits n(n-1) pairwise inequalities, plus n
/// gradient-norm caps for the bounded-gradient class.
std::vector<ScalarExpr> interpolation_constraints(const EvaluationSet& set,
                                                  const FunctionClass& cls);

/// f_a - f_b, the building block of function-value gap criteria.
ScalarExpr fval_gap(const Evaluation& a, const Evaluation& b);

}  // namespace dpep

#endif
