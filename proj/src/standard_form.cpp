#include "dpep/standard_form.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace dpep {

namespace {

int tri_count(int n) { return n * (n + 1) / 2; }

// Column-major upper triangle: (0,0), (0,1), (1,1), (0,2), ...
int tri_index(int i, int j) { return j * (j + 1) / 2 + i; }

}  // namespace

VariableIndex::VariableIndex(const GramLayout& layout) {
  if (!layout.frozen()) throw Error("layout must be frozen before SDP emission");
  npar_ = layout.num_leaves(Block::Parallel);
  nperp_ = layout.num_leaves(Block::Perp);
  nf_ = layout.num_fvals();
  total_ = tri_count(npar_) + tri_count(nperp_) + nf_;
}

int VariableIndex::gram_var(const GramKey& k) const {
  const int n = k.block == Block::Parallel ? npar_ : nperp_;
  if (k.i < 0 || k.j >= n || k.i > k.j) throw Error("gram key out of range");
  const int base = k.block == Block::Parallel ? 0 : tri_count(npar_);
  return base + tri_index(k.i, k.j);
}

int VariableIndex::fval_var(FValId id) const {
  if (id < 0 || id >= nf_) throw Error("fval id out of range");
  return tri_count(npar_) + tri_count(nperp_) + id;
}

Eigen::MatrixXd VariableIndex::unpack_gram(Block b, const Eigen::VectorXd& y) const {
  const int n = b == Block::Parallel ? npar_ : nperp_;
  const int base = b == Block::Parallel ? 0 : tri_count(npar_);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) G(i, j) = G(j, i) = y(base + tri_index(i, j));
  return G;
}

Eigen::VectorXd VariableIndex::unpack_fvals(const Eigen::VectorXd& y) const {
  return y.segment(tri_count(npar_) + tri_count(nperp_), nf_);
}

namespace {

// Accumulates one affine ScalarExpr into (coefficient row, constant).
void expr_to_row(const VariableIndex& vars, const ScalarExpr& e,
                 Eigen::VectorXd& row, double& cst) {
  for (const auto& [k, v] : e.gram_terms()) row(vars.gram_var(k)) += v;
  for (const auto& [id, v] : e.fval_terms()) row(vars.fval_var(id)) += v;
  cst += e.constant();
}

void add_lmi_block(const VariableIndex& vars, const MatrixExpr& m, double sign,
                   const std::string& name, SDPStandardForm& form) {
  SDPBlock blk;
  blk.name = name;
  blk.size = m.dim();
  blk.F0 = Eigen::MatrixXd::Zero(m.dim(), m.dim());
  std::map<std::tuple<int, int, int>, double> coefs;  // (var,row,col) -> val
  for (int r = 0; r < m.dim(); ++r) {
    for (int c = r; c < m.dim(); ++c) {
      const ScalarExpr& e = m.at(r, c);
      blk.F0(r, c) += sign * e.constant();
      blk.F0(c, r) = blk.F0(r, c);
      for (const auto& [k, v] : e.gram_terms())
        coefs[{vars.gram_var(k), r, c}] += sign * v;
      for (const auto& [id, v] : e.fval_terms())
        coefs[{vars.fval_var(id), r, c}] += sign * v;
    }
  }
  for (const auto& [key, v] : coefs) {
    if (v == 0.0) continue;
    const auto& [var, r, c] = key;
    blk.coefs.push_back(SDPBlock::Coef{var, r, c, v});
  }
  form.blocks.push_back(std::move(blk));
}

}  // namespace

SDPStandardForm to_standard_form(const GramLayout& layout,
                                 const PEPObjectiveAndConstraints& pc) {
  const VariableIndex vars(layout);
  SDPStandardForm form;
  form.num_vars = vars.num_vars();

  // Variable names, for the dump.
  form.var_names.reserve(form.num_vars);
  for (Block b : {Block::Parallel, Block::Perp}) {
    const auto& leaves = layout.leaves(b);
    for (int j = 0; j < static_cast<int>(leaves.size()); ++j)
      for (int i = 0; i <= j; ++i)
        form.var_names.push_back("G_" + std::string(block_name(b)) + "(" +
                                 leaves[i].label + "," + leaves[j].label + ")");
  }
  for (const auto& f : layout.fvals()) form.var_names.push_back(f.label);

  // The two Gram blocks are PSD variables: block matrix == G(y).
  for (Block b : {Block::Parallel, Block::Perp}) {
    const int n = vars.num_leaves(b);
    if (n == 0) continue;
    SDPBlock blk;
    blk.name = std::string("G_") + block_name(b);
    blk.size = n;
    blk.F0 = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= j; ++i)
        blk.coefs.push_back(
            SDPBlock::Coef{vars.gram_var(GramKey{b, i, j}), i, j, 1.0});
    std::sort(blk.coefs.begin(), blk.coefs.end(),
              [](const auto& a, const auto& c) { return a.var < c.var; });
    form.blocks.push_back(std::move(blk));
  }

  // Scalar inequalities expr <= 0 become 1x1 blocks holding -expr >= 0.
  int ineq_no = 0;
  for (const auto& e : pc.inequalities) {
    SDPBlock blk;
    blk.name = "ineq" + std::to_string(ineq_no++);
    blk.size = 1;
    blk.F0 = Eigen::MatrixXd::Zero(1, 1);
    Eigen::VectorXd row = Eigen::VectorXd::Zero(form.num_vars);
    double cst = 0.0;
    expr_to_row(vars, e, row, cst);
    blk.F0(0, 0) = -cst;
    for (int v = 0; v < form.num_vars; ++v)
      if (row(v) != 0.0) blk.coefs.push_back(SDPBlock::Coef{v, 0, 0, -row(v)});
    form.blocks.push_back(std::move(blk));
  }

  int lmi_no = 0;
  for (const auto& [m, sign] : pc.lmis) {
    const double s = sign == MatrixSign::PositiveSemidefinite ? 1.0 : -1.0;
    add_lmi_block(vars, m, s, "lmi" + std::to_string(lmi_no++), form);
  }

  const int neq = static_cast<int>(pc.equalities.size());
  form.E = Eigen::MatrixXd::Zero(neq, form.num_vars);
  form.d = Eigen::VectorXd::Zero(neq);
  for (int r = 0; r < neq; ++r) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(form.num_vars);
    double cst = 0.0;
    expr_to_row(vars, pc.equalities[r], row, cst);
    form.E.row(r) = row;
    form.d(r) = -cst;
  }

  form.b = Eigen::VectorXd::Zero(form.num_vars);
  {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(form.num_vars);
    double cst = 0.0;
    expr_to_row(vars, pc.objective, row, cst);
    form.b = row;
    form.obj_const = cst;
  }
  return form;
}

std::string SDPStandardForm::stats() const {
  std::ostringstream os;
  os << "vars=" << num_vars << " blocks=" << blocks.size() << " (sizes:";
  std::map<int, int> sizes;
  for (const auto& b : blocks) sizes[b.size]++;
  for (const auto& [sz, cnt] : sizes) os << " " << cnt << "x" << sz;
  os << ") equalities=" << E.rows();
  return os.str();
}

std::string SDPStandardForm::dump() const {
  std::ostringstream os;
  os.precision(17);
  os << "# " << stats() << "\n";
  os << "objective const " << obj_const << "\n";
  for (int v = 0; v < num_vars; ++v)
    if (b(v) != 0.0) os << "objective " << var_names[v] << " " << b(v) << "\n";
  for (const auto& blk : blocks) {
    os << "block " << blk.name << " size " << blk.size << "\n";
    for (int r = 0; r < blk.size; ++r)
      for (int c = r; c < blk.size; ++c)
        if (blk.F0(r, c) != 0.0)
          os << "  F0 " << r << " " << c << " " << blk.F0(r, c) << "\n";
    for (const auto& co : blk.coefs)
      os << "  F " << var_names[co.var] << " " << co.row << " " << co.col << " "
         << co.val << "\n";
  }
  for (int r = 0; r < E.rows(); ++r) {
    os << "eq " << r << " rhs " << d(r) << "\n";
    for (int v = 0; v < num_vars; ++v)
      if (E(r, v) != 0.0) os << "  " << var_names[v] << " " << E(r, v) << "\n";
  }
  return os.str();
}

}  // namespace dpep
