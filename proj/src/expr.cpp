#include "dpep/expr.hpp"

namespace dpep {

PointExpr combine(const std::vector<std::pair<double, PointExpr>>& terms) {
  PointExpr r;
  for (const auto& [s, p] : terms) r.add_scaled(s, p);
  return r;
}

ScalarExpr inner(const PointExpr& a, const PointExpr& b) {
  ScalarExpr e;
  for (Block blk : {Block::Parallel, Block::Perp}) {
    for (const auto& [i, ca] : a.coeffs(blk)) {
      for (const auto& [j, cb] : b.coeffs(blk)) {
        e.add_gram(gram_key(blk, i, j), ca * cb);
      }
    }
  }
  return e;
}

}  // namespace dpep
