#include "dpep/consensus.hpp"

#include <cmath>

namespace dpep {

PointExpr consensus_step(GramLayout& layout, ConsensusRegistry& reg,
                         const PointExpr& p, MatrixClassId id) {
  if (!reg.known(id)) throw Error("unknown consensus matrix-class id");
  // A structurally zero perp input maps to exactly zero under every matrix
  // of the class; registering it would add an all-zero column to X and make
  // the spectral LMIs degenerate (no strictly feasible point).
  if (p.zero(Block::Perp)) return p.par_part();
  if (reg.exact_scalar()) {
    PointExpr out = p.par_part();
    out.add_scaled(*reg.exact_scalar(), p - p.par_part());
    return out;
  }
  const int k = [&] {
    auto it = reg.pairs().find(id);
    return it == reg.pairs().end() ? 0 : static_cast<int>(it->second.size());
  }();
  PointExpr out_perp = PointExpr::leaf(
      Block::Perp, layout.new_leaf(Block::Perp, "y_perp[cls=" + std::to_string(id) +
                                                    ",col=" + std::to_string(k) + "]"));
  PointExpr in_perp;
  in_perp.add_scaled(1.0, p);
  in_perp = in_perp - in_perp.par_part();  // keep only the perp coefficients
  reg.register_pair(id, in_perp, out_perp);
  return p.par_part() + out_perp;
}

SpectralConstraints spectral_constraints(const ConsensusRegistry& reg,
                                         const SpectralRange& range) {
  const double lm = range.lam_minus;
  const double lp = range.lam_plus;
  SpectralConstraints out;

  for (const auto& [id, cols] : reg.pairs()) {
    const int k = static_cast<int>(cols.size());
    if (k == 0) throw Error("consensus matrix class with no registered pair");

    auto x = [&](int a) -> const PointExpr& { return cols[a].first; };
    auto y = [&](int a) -> const PointExpr& { return cols[a].second; };

    // Symmetrized entries; the symmetry itself is enforced by equalities.
    auto xty = [&](int a, int b) {
      ScalarExpr e = inner(x(a), y(b));
      e.add_scaled(1.0, inner(x(b), y(a)));
      return 0.5 * e;
    };
    auto xtx = [&](int a, int b) { return inner(x(a), x(b)); };
    auto var_red = [&](int a, int b) {
      // entry (a,b) of (Y - lm X)^T (Y - lp X), symmetrized
      ScalarExpr e = inner(y(a) - lm * x(a), y(b) - lp * x(b));
      e.add_scaled(1.0, inner(y(b) - lm * x(b), y(a) - lp * x(a)));
      return 0.5 * e;
    };

    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b)
        out.equalities.push_back(inner(x(a), y(b)) - inner(x(b), y(a)));

    if (k == 1) {
      // Single column: the LMIs are scalar inequalities.
      out.inequalities.push_back(lm * xtx(0, 0) - xty(0, 0));
      out.inequalities.push_back(xty(0, 0) - lp * xtx(0, 0));
      out.inequalities.push_back(var_red(0, 0));
      continue;
    }

    MatrixExpr lower(k), upper(k), quad(k);
    for (int a = 0; a < k; ++a) {
      for (int b = a; b < k; ++b) {
        lower.at(a, b) = xty(a, b) - lm * xtx(a, b);     // >= 0
        upper.at(a, b) = lp * xtx(a, b) - xty(a, b);     // >= 0
        quad.at(a, b) = var_red(a, b);                   // <= 0
      }
    }
    out.lmis.emplace_back(std::move(lower), MatrixSign::PositiveSemidefinite);
    out.lmis.emplace_back(std::move(upper), MatrixSign::PositiveSemidefinite);
    out.lmis.emplace_back(std::move(quad), MatrixSign::NegativeSemidefinite);
  }
  return out;
}

std::vector<ScalarExpr> exact_scalar_consensus_constraints(
    const GramLayout& layout, const ConsensusRegistry& reg,
    const std::map<MatrixClassId, double>& values) {
  std::vector<ScalarExpr> out;
  for (const auto& [id, cols] : reg.pairs()) {
    auto it = values.find(id);
    if (it == values.end())
      throw Error("missing lambda2 value for consensus matrix class " +
                  std::to_string(id));
    const double lam2 = it->second;
    if (!(std::abs(lam2) < 1.0))
      throw Error("exact scalar consensus requires |lambda2| < 1");
    for (const auto& [xin, yout] : cols) {
      const PointExpr diff = yout - lam2 * xin;
      for (const auto& leaf : layout.leaves(Block::Perp)) {
        ScalarExpr e = inner(diff, PointExpr::leaf(Block::Perp, leaf.id));
        if (!e.is_zero()) out.push_back(std::move(e));
      }
    }
  }
  return out;
}

}  // namespace dpep
