#ifndef DPEP_EXPR_HPP
#define DPEP_EXPR_HPP

// Symbolic point algebra over the two Gram blocks (consensus "par" block and
// its orthogonal complement "perp" block), together with affine expressions
// in Gram entries and function values. Nothing in here knows about the
// problem dimension or the number of agents: a point is a linear combination
// of abstract basis leaves, and scalar products become entries of the two
// Gram matrices.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace dpep {

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Block : std::uint8_t { Parallel = 0, Perp = 1 };

inline const char* block_name(Block b) {
  return b == Block::Parallel ? "par" : "perp";
}

using LeafId = int;
using FValId = int;

struct BasisLeaf {
  LeafId id = -1;
  Block block = Block::Parallel;
  std::string label;
};

struct FValSymbol {
  FValId id = -1;
  std::string label;
};

/// Ordered, deterministic record of all basis leaves and function-value
/// symbols of one problem. Once frozen (for SDP emission) no new leaf may
/// be created.
class GramLayout {
public:
  LeafId new_leaf(Block block, std::string label) {
    require_open();
    auto& v = leaves(block);
    const LeafId id = static_cast<LeafId>(v.size());
    v.push_back(BasisLeaf{id, block, std::move(label)});
    return id;
  }

  FValId new_fval(std::string label) {
    require_open();
    const FValId id = static_cast<FValId>(fvals_.size());
    fvals_.push_back(FValSymbol{id, std::move(label)});
    return id;
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  const std::vector<BasisLeaf>& leaves(Block b) const {
    return b == Block::Parallel ? par_ : perp_;
  }
  int num_leaves(Block b) const {
    return static_cast<int>(leaves(b).size());
  }
  const std::vector<FValSymbol>& fvals() const { return fvals_; }
  int num_fvals() const { return static_cast<int>(fvals_.size()); }

private:
  std::vector<BasisLeaf>& leaves(Block b) {
    return b == Block::Parallel ? par_ : perp_;
  }
  void require_open() const {
    if (frozen_) throw Error("GramLayout is frozen; no new symbols allowed");
  }

  std::vector<BasisLeaf> par_;
  std::vector<BasisLeaf> perp_;
  std::vector<FValSymbol> fvals_;
  bool frozen_ = false;
};

/// A vector expressed per block as a sparse linear combination of leaves.
/// Either block may be empty (the zero vector in that block).
class PointExpr {
public:
  PointExpr() = default;

  static PointExpr leaf(Block block, LeafId id) {
    PointExpr p;
    p.mutable_coeffs(block)[id] = 1.0;
    return p;
  }

  const std::map<LeafId, double>& coeffs(Block b) const {
    return b == Block::Parallel ? par_ : perp_;
  }

  bool zero(Block b) const { return coeffs(b).empty(); }
  bool zero() const { return par_.empty() && perp_.empty(); }

  PointExpr& add_scaled(double s, const PointExpr& other) {
    for (Block b : {Block::Parallel, Block::Perp}) {
      auto& mine = mutable_coeffs(b);
      for (const auto& [id, c] : other.coeffs(b)) {
        const double v = mine[id] + s * c;
        if (v == 0.0)
          mine.erase(id);
        else
          mine[id] = v;
      }
    }
    return *this;
  }

  /// Keeps only the parallel-block part (projection onto the consensus
  /// subspace).
  PointExpr par_part() const {
    PointExpr p;
    p.par_ = par_;
    return p;
  }

  friend PointExpr operator*(double s, const PointExpr& p) {
    PointExpr r;
    if (s != 0.0) r.add_scaled(s, p);
    return r;
  }
  friend PointExpr operator+(const PointExpr& a, const PointExpr& b) {
    PointExpr r = a;
    r.add_scaled(1.0, b);
    return r;
  }
  friend PointExpr operator-(const PointExpr& a, const PointExpr& b) {
    PointExpr r = a;
    r.add_scaled(-1.0, b);
    return r;
  }

private:
  std::map<LeafId, double>& mutable_coeffs(Block b) {
    return b == Block::Parallel ? par_ : perp_;
  }

  std::map<LeafId, double> par_;
  std::map<LeafId, double> perp_;
};

PointExpr combine(const std::vector<std::pair<double, PointExpr>>& terms);

/// Canonical (upper-triangular) key of one Gram entry.
struct GramKey {
  Block block;
  LeafId i;  // i <= j
  LeafId j;

  friend bool operator<(const GramKey& a, const GramKey& b) {
    return std::tie(a.block, a.i, a.j) < std::tie(b.block, b.i, b.j);
  }
  friend bool operator==(const GramKey& a, const GramKey& b) {
    return a.block == b.block && a.i == b.i && a.j == b.j;
  }
};

inline GramKey gram_key(Block b, LeafId i, LeafId j) {
  return i <= j ? GramKey{b, i, j} : GramKey{b, j, i};
}

/// Affine expression in Gram entries and function values. The coefficient on
/// an off-diagonal key (i,j), i<j, multiplies the single entry G_ij (each
/// symmetric pair is folded into its canonical key).
class ScalarExpr {
public:
  ScalarExpr() = default;
  explicit ScalarExpr(double c) : constant_(c) {}

  static ScalarExpr fval(FValId id, double coef = 1.0) {
    ScalarExpr e;
    if (coef != 0.0) e.fval_[id] = coef;
    return e;
  }

  const std::map<GramKey, double>& gram_terms() const { return gram_; }
  const std::map<FValId, double>& fval_terms() const { return fval_; }
  double constant() const { return constant_; }

  void add_gram(const GramKey& k, double v) {
    if (v == 0.0) return;
    const double nv = gram_[k] + v;
    if (nv == 0.0)
      gram_.erase(k);
    else
      gram_[k] = nv;
  }
  void add_fval(FValId id, double v) {
    if (v == 0.0) return;
    const double nv = fval_[id] + v;
    if (nv == 0.0)
      fval_.erase(id);
    else
      fval_[id] = nv;
  }
  void add_constant(double v) { constant_ += v; }

  ScalarExpr& add_scaled(double s, const ScalarExpr& other) {
    if (s == 0.0) return *this;
    for (const auto& [k, v] : other.gram_) add_gram(k, s * v);
    for (const auto& [k, v] : other.fval_) add_fval(k, s * v);
    constant_ += s * other.constant_;
    return *this;
  }

  bool is_zero() const {
    return gram_.empty() && fval_.empty() && constant_ == 0.0;
  }

  friend ScalarExpr operator*(double s, const ScalarExpr& e) {
    ScalarExpr r;
    r.add_scaled(s, e);
    return r;
  }
  friend ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
    ScalarExpr r = a;
    r.add_scaled(1.0, b);
    return r;
  }
  friend ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
    ScalarExpr r = a;
    r.add_scaled(-1.0, b);
    return r;
  }

private:
  std::map<GramKey, double> gram_;
  std::map<FValId, double> fval_;
  double constant_ = 0.0;
};

/// inner(a, b) = sum over blocks of a_block^T G_block b_block. Blocks are
/// orthogonal by construction, so no cross-block term can appear.
ScalarExpr inner(const PointExpr& a, const PointExpr& b);

inline ScalarExpr sq_norm(const PointExpr& a) { return inner(a, a); }

enum class MatrixSign { PositiveSemidefinite, NegativeSemidefinite };

/// Structurally symmetric matrix of scalar expressions; only the upper
/// triangle (row-major, row <= col) is stored.
class MatrixExpr {
public:
  explicit MatrixExpr(int dim) : dim_(dim), upper_(dim * (dim + 1) / 2) {
    if (dim <= 0) throw Error("MatrixExpr dimension must be positive");
  }

  int dim() const { return dim_; }

  ScalarExpr& at(int r, int c) { return upper_[index(r, c)]; }
  const ScalarExpr& at(int r, int c) const { return upper_[index(r, c)]; }

private:
  std::size_t index(int r, int c) const {
    if (r > c) std::swap(r, c);
    if (r < 0 || c >= dim_) throw Error("MatrixExpr index out of range");
    return static_cast<std::size_t>(r) * dim_ -
           static_cast<std::size_t>(r) * (r - 1) / 2 + (c - r);
  }

  int dim_;
  std::vector<ScalarExpr> upper_;
};

}  // namespace dpep

#endif
