#ifndef DPEP_CONSENSUS_HPP
#define DPEP_CONSENSUS_HPP

// Consensus steps in basis b and the spectral constraints on the unknown
// perp-block averaging matrix. A consensus step leaves the parallel part of
// a point untouched and maps its perp part through a symmetric matrix whose
// eigenvalues lie in a known range; the matrix itself is never formed. All
// applications registered under one matrix-class id are constrained jointly
// (constant matrix); distinct ids are constrained independently
// (time-varying matrices).

#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "dpep/expr.hpp"

namespace dpep {

struct SpectralRange {
  double lam_minus;
  double lam_plus;

  SpectralRange(double lm, double lp) : lam_minus(lm), lam_plus(lp) {
    if (!(-1.0 < lm && lm <= lp && lp < 1.0))
      throw Error("spectral range must satisfy -1 < lam_minus <= lam_plus < 1");
  }
  static SpectralRange symmetric(double lam) { return SpectralRange(-lam, lam); }
};

using MatrixClassId = int;

class ConsensusRegistry {
public:
  MatrixClassId new_class() { return next_id_++; }

  bool known(MatrixClassId id) const { return id >= 0 && id < next_id_; }

  void register_pair(MatrixClassId id, PointExpr input_perp, PointExpr output_perp) {
    if (!known(id)) throw Error("unknown consensus matrix-class id");
    pairs_[id].emplace_back(std::move(input_perp), std::move(output_perp));
  }

  const std::map<MatrixClassId, std::vector<std::pair<PointExpr, PointExpr>>>&
  pairs() const {
    return pairs_;
  }

  /// Switches every class to an exact scalar action: the perp block of each
  /// matrix is lam2 times the identity (the N = 2 oracle, and the only
  /// member of a point-spectrum class). Consensus steps then substitute
  /// y_perp = lam2 x_perp structurally instead of registering pairs.
  void set_exact_scalar(double lam2) {
    if (!(std::abs(lam2) < 1.0))
      throw Error("exact scalar consensus requires |lambda2| < 1");
    exact_ = lam2;
  }
  std::optional<double> exact_scalar() const { return exact_; }

private:
  std::map<MatrixClassId, std::vector<std::pair<PointExpr, PointExpr>>> pairs_;
  std::optional<double> exact_;
  MatrixClassId next_id_ = 0;
};

/// One consensus step: the output keeps the input's parallel part and gets a
/// fresh perp leaf; the (input_perp, output_perp) pair is registered under
/// the given matrix class. An input with a structurally zero perp part maps
/// to its parallel part exactly (no leaf, no registration).
PointExpr consensus_step(GramLayout& layout, ConsensusRegistry& reg,
                         const PointExpr& p, MatrixClassId id);

struct SpectralConstraints {
  std::vector<ScalarExpr> equalities;    // expr == 0 (symmetry of X^T Y)
  std::vector<ScalarExpr> inequalities;  // expr <= 0 (single-column classes)
  std::vector<std::pair<MatrixExpr, MatrixSign>> lmis;
};

/// Necessary constraints for Y = W X with W symmetric and eigenvalues in the
/// range: symmetry of X^T Y, the eigenvalue sandwich
/// lam_minus X^T X <= X^T Y <= lam_plus X^T X, and
/// (Y - lam_minus X)^T (Y - lam_plus X) <= 0. Classes with a single
/// registered pair degenerate to three scalar inequalities.
SpectralConstraints spectral_constraints(const ConsensusRegistry& reg,
                                         const SpectralRange& range);

/// Exact scalar consensus: pins output = lam2 * input within the Gram
/// geometry by requiring <y - lam2 x, z> = 0 against every perp leaf z.
/// This models the N = 2 case, where the perp block of W acts as lam2 times
/// the identity.
std::vector<ScalarExpr> exact_scalar_consensus_constraints(
    const GramLayout& layout, const ConsensusRegistry& reg,
    const std::map<MatrixClassId, double>& values);

}  // namespace dpep

#endif
