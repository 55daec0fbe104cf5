#include "dpep/function_class.hpp"

namespace dpep {

void EvaluationSet::check_label(const std::string& label) const {
  for (const auto& e : evals_)
    if (e.label == label) throw Error("duplicate evaluation label: " + label);
}

const Evaluation& EvaluationSet::add_evaluation(GramLayout& layout,
                                                std::optional<PointExpr> point,
                                                const std::string& label) {
  check_label(label);
  Evaluation e;
  e.label = label;
  if (point) {
    e.point = std::move(*point);
  } else {
    e.point = PointExpr::leaf(Block::Parallel,
                              layout.new_leaf(Block::Parallel, "x_par[" + label + "]")) +
              PointExpr::leaf(Block::Perp,
                              layout.new_leaf(Block::Perp, "x_perp[" + label + "]"));
  }
  // A gradient at a consensus point may still have a perp component, so
  // leaves are created in both blocks regardless of the point structure.
  e.grad = PointExpr::leaf(Block::Parallel,
                           layout.new_leaf(Block::Parallel, "g_par[" + label + "]")) +
           PointExpr::leaf(Block::Perp,
                           layout.new_leaf(Block::Perp, "g_perp[" + label + "]"));
  e.fval = layout.new_fval("f[" + label + "]");
  evals_.push_back(std::move(e));
  return evals_.back();
}

const Evaluation& EvaluationSet::add_optimum(GramLayout& layout,
                                             const std::string& label) {
  if (star_) throw Error("optimum evaluation already exists");
  check_label(label);
  // At the optimum: x_perp = 0 and the parallel gradient vanishes; only the
  // complementary components get leaves.
  Evaluation e;
  e.label = label;
  e.point = PointExpr::leaf(Block::Parallel,
                            layout.new_leaf(Block::Parallel, "x_par[" + label + "]"));
  e.grad = PointExpr::leaf(Block::Perp,
                           layout.new_leaf(Block::Perp, "g_perp[" + label + "]"));
  e.fval = layout.new_fval("f[" + label + "]");
  evals_.push_back(std::move(e));
  star_ = evals_.size() - 1;
  return evals_.back();
}

namespace {

// f_i >= f_j + <g_j, x_i - x_j>, normalized to "expr <= 0".
ScalarExpr convexity_pair(const Evaluation& ei, const Evaluation& ej) {
  ScalarExpr e = ScalarExpr::fval(ej.fval) - ScalarExpr::fval(ei.fval);
  e.add_scaled(1.0, inner(ej.grad, ei.point - ej.point));
  return e;
}

}  // namespace

std::vector<ScalarExpr> interpolation_constraints(const EvaluationSet& set,
                                                  const FunctionClass& cls) {
  const auto& evals = set.evals();
  if (evals.empty()) throw Error("interpolation on an empty evaluation set");

  std::vector<ScalarExpr> out;
  switch (cls.kind) {
    case FunctionClass::Kind::BoundedGradientConvex: {
      for (std::size_t i = 0; i < evals.size(); ++i)
        for (std::size_t j = 0; j < evals.size(); ++j)
          if (i != j) out.push_back(convexity_pair(evals[i], evals[j]));
      // The gradient bound holds everywhere, including at the optimum and
      // auxiliary points: <g_i, g_i> - R^2 <= 0.
      for (const auto& e : evals) {
        ScalarExpr cap = sq_norm(e.grad);
        cap.add_constant(-cls.R * cls.R);
        out.push_back(std::move(cap));
      }
      break;
    }
    case FunctionClass::Kind::SmoothStronglyConvex: {
      if (cls.mu >= cls.L)
        throw Error("mu = L is a degenerate (quadratic-only) class");
      const double q = 1.0 / (2.0 * (1.0 - cls.mu / cls.L));
      for (std::size_t i = 0; i < evals.size(); ++i) {
        for (std::size_t j = 0; j < evals.size(); ++j) {
          if (i == j) continue;
          const Evaluation& ei = evals[i];
          const Evaluation& ej = evals[j];
          ScalarExpr e = convexity_pair(ei, ej);
          const PointExpr dg = ei.grad - ej.grad;
          const PointExpr dx = ei.point - ej.point;
          e.add_scaled(q / cls.L, sq_norm(dg));
          e.add_scaled(q * cls.mu, sq_norm(dx));
          // - (2 mu / L) <g_j - g_i, x_j - x_i> = - (2 mu / L) <dg, dx>
          // with dg, dx oriented i - j.
          e.add_scaled(-q * 2.0 * cls.mu / cls.L, inner(dg, dx));
          out.push_back(std::move(e));
        }
      }
      break;
    }
  }
  return out;
}

ScalarExpr fval_gap(const Evaluation& a, const Evaluation& b) {
  return ScalarExpr::fval(a.fval) - ScalarExpr::fval(b.fval);
}

}  // namespace dpep
