#ifndef DPEP_STANDARD_FORM_HPP
#define DPEP_STANDARD_FORM_HPP

// Solver-neutral standard form of an assembled PEP:
//
//   maximize   b^T y + obj_const
//   such that  F0_k + sum_i y_i F_{k,i}  is PSD for every block k,
//              E y = d,
//
// where the decision vector y stacks the upper-triangular entries of the two
// Gram blocks followed by the function values. The two Gram blocks appear as
// PSD blocks whose F matrices are unit basis matrices; every scalar
// inequality becomes a 1x1 block and every LMI a block of its own size.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dpep/expr.hpp"

namespace dpep {

struct SDPBlock {
  std::string name;
  int size = 0;
  Eigen::MatrixXd F0;  // size x size, symmetric

  // Sparse symmetric coefficient: variable `var` contributes val to entries
  // (row, col) and (col, row) of the block matrix (row <= col).
  struct Coef {
    int var;
    int row;
    int col;
    double val;
  };
  std::vector<Coef> coefs;  // sorted by var
};

struct SDPStandardForm {
  int num_vars = 0;
  std::vector<SDPBlock> blocks;
  Eigen::MatrixXd E;  // equalities E y = d (possibly 0 rows)
  Eigen::VectorXd d;
  Eigen::VectorXd b;  // maximize b^T y + obj_const
  double obj_const = 0.0;
  std::vector<std::string> var_names;

  /// Deterministic, diffable text dump for debugging.
  std::string dump() const;
  std::string stats() const;
};

/// Maps layout symbols to variable indices in the standard form: first the
/// parallel Gram entries (column-major upper triangle), then the perp Gram
/// entries, then the function values.
class VariableIndex {
public:
  explicit VariableIndex(const GramLayout& layout);

  int num_vars() const { return total_; }
  int gram_var(const GramKey& k) const;
  int fval_var(FValId id) const;
  int num_leaves(Block b) const { return b == Block::Parallel ? npar_ : nperp_; }
  int num_fvals() const { return nf_; }

  /// Inverse maps, used when unpacking a solution vector.
  Eigen::MatrixXd unpack_gram(Block b, const Eigen::VectorXd& y) const;
  Eigen::VectorXd unpack_fvals(const Eigen::VectorXd& y) const;

private:
  int npar_ = 0, nperp_ = 0, nf_ = 0, total_ = 0;
};

struct PEPObjectiveAndConstraints {
  ScalarExpr objective;                  // maximize
  std::vector<ScalarExpr> equalities;    // expr == 0
  std::vector<ScalarExpr> inequalities;  // expr <= 0
  std::vector<std::pair<MatrixExpr, MatrixSign>> lmis;
};

SDPStandardForm to_standard_form(const GramLayout& layout,
                                 const PEPObjectiveAndConstraints& pc);

}  // namespace dpep

#endif
