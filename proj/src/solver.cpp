#include "dpep/solver.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

namespace dpep {

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::NearOptimal: return "NearOptimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::SolverFailure: return "SolverFailure";
  }
  return "?";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct FEntry {
  int row, col;
  double val;
};

struct BlockVar {
  int var;  // compressed variable index
  std::vector<FEntry> entries;
};

struct WorkBlock {
  int size = 0;
  MatrixXd F0;
  std::vector<BlockVar> vars;
};

double dotF(const std::vector<FEntry>& es, const MatrixXd& M) {
  double s = 0.0;
  for (const auto& e : es)
    s += e.row == e.col ? e.val * M(e.row, e.col) : 2.0 * e.val * M(e.row, e.col);
  return s;
}

void addF(MatrixXd& M, const std::vector<FEntry>& es, double scale) {
  for (const auto& e : es) {
    M(e.row, e.col) += scale * e.val;
    if (e.row != e.col) M(e.col, e.row) += scale * e.val;
  }
}

// Largest step alpha in [0, 1] keeping S + alpha * dS positive definite,
// scaled back by tau.
double step_to_boundary(const MatrixXd& S, const MatrixXd& dS, double tau) {
  Eigen::LLT<MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatrixXd L = llt.matrixL();
  MatrixXd A = L.triangularView<Eigen::Lower>().solve(dS);
  A = L.triangularView<Eigen::Lower>().solve(A.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (A + A.transpose()),
                                             Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0.0) return 1.0;
  return std::min(1.0, -tau / lmin);
}

struct State {
  VectorXd y, nu;
  std::vector<MatrixXd> X, Z;
};

}  // namespace

SolverResult InteriorPointSolver::solve(const SDPStandardForm& form,
                                        const SolverSettings& settings) const {
  SolverResult res;
  try {
    const int nfull = form.num_vars;

    // Variables that touch no block and no equality cannot influence
    // feasibility; a nonzero objective coefficient on one makes the problem
    // unbounded.
    std::vector<bool> used(nfull, false);
    for (const auto& blk : form.blocks)
      for (const auto& c : blk.coefs) used[c.var] = true;
    for (int r = 0; r < form.E.rows(); ++r)
      for (int v = 0; v < nfull; ++v)
        if (form.E(r, v) != 0.0) used[v] = true;
    std::vector<int> to_compressed(nfull, -1), to_full;
    for (int v = 0; v < nfull; ++v) {
      if (used[v]) {
        to_compressed[v] = static_cast<int>(to_full.size());
        to_full.push_back(v);
      } else if (form.b(v) != 0.0) {
        res.status = SolveStatus::Unbounded;
        res.message = "free variable with nonzero objective coefficient";
        return res;
      }
    }
    const int m = static_cast<int>(to_full.size());

    std::vector<WorkBlock> blocks;
    for (const auto& blk : form.blocks) {
      if (blk.size <= 0) continue;
      WorkBlock wb;
      wb.size = blk.size;
      wb.F0 = blk.F0;
      int last = -1;
      for (const auto& c : blk.coefs) {
        const int v = to_compressed[c.var];
        if (wb.vars.empty() || v != last) {
          wb.vars.push_back(BlockVar{v, {}});
          last = v;
        }
        wb.vars.back().entries.push_back(FEntry{c.row, c.col, c.val});
      }
      blocks.push_back(std::move(wb));
    }
    const int nblocks = static_cast<int>(blocks.size());

    VectorXd b(m);
    for (int v = 0; v < m; ++v) b(v) = form.b(to_full[v]);

    // Equalities, reduced to independent rows.
    MatrixXd E;
    VectorXd d;
    {
      MatrixXd Eu(form.E.rows(), m);
      for (int v = 0; v < m; ++v) Eu.col(v) = form.E.col(to_full[v]);
      if (Eu.rows() > 0) {
        Eigen::ColPivHouseholderQR<MatrixXd> qr(Eu.transpose());
        qr.setThreshold(1e-10);
        const int rank = static_cast<int>(qr.rank());
        const auto perm = qr.colsPermutation().indices();
        E.resize(rank, m);
        d.resize(rank);
        for (int r = 0; r < rank; ++r) {
          E.row(r) = Eu.row(perm(r));
          d(r) = form.d(perm(r));
        }
      } else {
        E.resize(0, m);
        d.resize(0);
      }
    }
    const int p = static_cast<int>(E.rows());

    int ntot = 0;
    for (const auto& blk : blocks) ntot += blk.size;
    if (m == 0 || ntot == 0) {
      res.status = SolveStatus::Optimal;
      res.objective = form.obj_const;
      res.y = VectorXd::Zero(nfull);
      return res;
    }

    double data_scale = 1.0;
    for (const auto& blk : blocks)
      data_scale = std::max(data_scale, blk.F0.cwiseAbs().maxCoeff());
    const double bscale = 1.0 + b.cwiseAbs().maxCoeff();
    const double dscale = 1.0 + (p > 0 ? d.cwiseAbs().maxCoeff() : 0.0);

    State s;
    s.y = VectorXd::Zero(m);
    s.nu = VectorXd::Zero(p);
    const double init = std::max({10.0, data_scale, bscale});
    for (const auto& blk : blocks) {
      s.X.push_back(MatrixXd::Identity(blk.size, blk.size) * init);
      s.Z.push_back(MatrixXd::Identity(blk.size, blk.size) * init);
    }

    auto apply_A = [&](const VectorXd& yv, int k) {
      MatrixXd D = MatrixXd::Zero(blocks[k].size, blocks[k].size);
      for (const auto& bv : blocks[k].vars) addF(D, bv.entries, yv(bv.var));
      return D;
    };
    auto apply_At = [&](const std::vector<MatrixXd>& Ms) {
      VectorXd out = VectorXd::Zero(m);
      for (int k = 0; k < nblocks; ++k)
        for (const auto& bv : blocks[k].vars) out(bv.var) += dotF(bv.entries, Ms[k]);
      return out;
    };

    double best_metric = std::numeric_limits<double>::infinity();
    SolverResult best_res;
    int stall = 0;

    std::vector<MatrixXd> Rd(nblocks), W(nblocks), Zinv(nblocks), T(nblocks);
    MatrixXd M(m, m), MEt, K;
    Eigen::LLT<MatrixXd> mllt;
    Eigen::LDLT<MatrixXd> kldlt;

    for (int iter = 0; iter < settings.max_iter; ++iter) {
      // Residuals.
      for (int k = 0; k < nblocks; ++k)
        Rd[k] = blocks[k].F0 + apply_A(s.y, k) - s.Z[k];
      const VectorXd re = d - E * s.y;
      const VectorXd Ax = apply_At(s.X);
      const VectorXd rc = -b - Ax + E.transpose() * s.nu;

      double xz_total = 0.0;
      for (int k = 0; k < nblocks; ++k)
        xz_total += (s.X[k].array() * s.Z[k].array()).sum();
      const double mu = xz_total / ntot;

      double rd_norm = 0.0;
      for (int k = 0; k < nblocks; ++k)
        rd_norm = std::max(rd_norm, Rd[k].cwiseAbs().maxCoeff());
      const double pinf =
          std::max(rd_norm / (1.0 + data_scale),
                   p > 0 ? re.cwiseAbs().maxCoeff() / dscale : 0.0);
      // Residuals are measured relative to the magnitudes that produced
      // them; the dual multipliers may legitimately grow large on problems
      // with a degenerate dual face.
      const double dinf = rc.cwiseAbs().maxCoeff() /
                          (1.0 + std::max(bscale, Ax.cwiseAbs().maxCoeff()));
      const double pobj = b.dot(s.y);
      double dobj = s.nu.size() > 0 ? d.dot(s.nu) : 0.0;
      for (int k = 0; k < nblocks; ++k)
        dobj += (blocks[k].F0.array() * s.X[k].array()).sum();
      // Complementarity gap; the classic pobj - dobj difference equals
      // -<X,Z> plus residual terms already covered by pinf and dinf.
      const double gap = xz_total / (1.0 + std::abs(pobj) + std::abs(dobj));

      res.iterations = iter;
      res.primal_infeas = pinf;
      res.dual_infeas = dinf;
      res.rel_gap = gap;
      res.y = VectorXd::Zero(nfull);
      for (int v = 0; v < m; ++v) res.y(to_full[v]) = s.y(v);
      res.objective = b.dot(s.y) + form.obj_const;

      if (settings.verbose) {
        double xmax = 0.0, zmax = 0.0;
        for (int k = 0; k < nblocks; ++k) {
          xmax = std::max(xmax, s.X[k].cwiseAbs().maxCoeff());
          zmax = std::max(zmax, s.Z[k].cwiseAbs().maxCoeff());
        }
        std::ostringstream os;
        os << "iter " << iter << " mu " << mu << " pinf " << pinf << " dinf "
           << dinf << " gap " << gap << " obj " << pobj << " Xmax " << xmax
           << " Zmax " << zmax << " numax "
           << (p > 0 ? s.nu.cwiseAbs().maxCoeff() : 0.0);
        res.message = os.str();
        fprintf(stderr, "%s\n", os.str().c_str());
      }

      if (pinf <= settings.feas_tol && dinf <= settings.feas_tol &&
          gap <= settings.gap_tol) {
        res.status = SolveStatus::Optimal;
        return res;
      }

      // Rough divergence checks.
      if (std::abs(pobj) > 1e12 * bscale && pinf < 1e-6) {
        res.status = SolveStatus::Unbounded;
        res.message = "objective diverging with small residuals";
        return res;
      }
      const double metric = std::max({pinf, dinf, gap});
      if (metric < best_metric) {
        best_metric = metric;
        best_res = res;
        stall = 0;
      } else if (++stall > 25) {
        break;
      }

      // NT scaling per block: W Z W = X.
      bool scale_ok = true;
      for (int k = 0; k < nblocks; ++k) {
        Eigen::LLT<MatrixXd> lltx(s.X[k]);
        if (lltx.info() != Eigen::Success) { scale_ok = false; break; }
        const MatrixXd Lx = lltx.matrixL();
        const MatrixXd S = Lx.transpose() * s.Z[k] * Lx;
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
        if (es.eigenvalues().minCoeff() <= 0) { scale_ok = false; break; }
        const MatrixXd U = es.eigenvectors();
        const VectorXd lam_isqrt = es.eigenvalues().array().rsqrt();
        W[k] = Lx * U * lam_isqrt.asDiagonal() * U.transpose() * Lx.transpose();
        Eigen::LLT<MatrixXd> lltz(s.Z[k]);
        if (lltz.info() != Eigen::Success) { scale_ok = false; break; }
        Zinv[k] = lltz.solve(MatrixXd::Identity(blocks[k].size, blocks[k].size));
        T[k] = W[k] * Rd[k] * W[k];
      }
      if (!scale_ok) break;

      // Schur complement M_vu = sum_k <F_kv, W_k F_ku W_k>.
      M.setZero();
      for (int k = 0; k < nblocks; ++k) {
        const int n = blocks[k].size;
        MatrixXd V(n, n);
        const auto& bvars = blocks[k].vars;
        for (std::size_t a = 0; a < bvars.size(); ++a) {
          V.setZero();
          for (const auto& e : bvars[a].entries) {
            if (e.row == e.col) {
              V.noalias() += e.val * (W[k].col(e.row) * W[k].row(e.row));
            } else {
              V.noalias() += e.val * (W[k].col(e.row) * W[k].row(e.col));
              V.noalias() += e.val * (W[k].col(e.col) * W[k].row(e.row));
            }
          }
          for (std::size_t c = a; c < bvars.size(); ++c) {
            const double val = dotF(bvars[c].entries, V);
            M(bvars[a].var, bvars[c].var) += val;
            if (bvars[a].var != bvars[c].var) M(bvars[c].var, bvars[a].var) += val;
          }
        }
      }

      // Factor M (with a ridge fallback) and the equality Schur complement.
      double ridge = 0.0;
      for (int attempt = 0; attempt < 6; ++attempt) {
        mllt.compute(ridge > 0 ? MatrixXd(M + ridge * MatrixXd::Identity(m, m))
                               : M);
        if (mllt.info() == Eigen::Success) break;
        ridge = ridge == 0.0 ? 1e-14 * M.trace() / m : ridge * 100;
      }
      if (mllt.info() != Eigen::Success) break;
      if (p > 0) {
        MEt = mllt.solve(E.transpose());
        K = E * MEt;
        kldlt.compute(0.5 * (K + K.transpose()));
        if (kldlt.info() != Eigen::Success) break;
      }

      // Solves M dy + E^T dnu = h, E dy = re, with iterative refinement:
      // M grows ill-conditioned as mu shrinks and plain backsolves lose the
      // digits the dual residual needs.
      auto kkt_solve = [&](const VectorXd& h, VectorXd& dy, VectorXd& dnu) {
        const VectorXd t = mllt.solve(h);
        if (p > 0) {
          dnu = kldlt.solve(E * t - re);
          dy = t - MEt * dnu;
        } else {
          dnu.resize(0);
          dy = t;
        }
        for (int r = 0; r < 2; ++r) {
          const VectorXd r1 =
              h - M * dy - (p > 0 ? VectorXd(E.transpose() * dnu) : VectorXd::Zero(m));
          const VectorXd c1 = mllt.solve(r1);
          if (p > 0) {
            const VectorXd r2 = re - E * dy;
            const VectorXd cnu = kldlt.solve(E * c1 - r2);
            dnu += cnu;
            dy += c1 - MEt * cnu;
          } else {
            dy += c1;
          }
        }
      };

      auto directions = [&](double sigmu, State& dir) {
        VectorXd h = -apply_At(s.X) - apply_At(T) - rc;
        if (sigmu != 0.0) h += sigmu * apply_At(Zinv);
        kkt_solve(h, dir.y, dir.nu);
        dir.X.resize(nblocks);
        dir.Z.resize(nblocks);
        for (int k = 0; k < nblocks; ++k) {
          dir.Z[k] = apply_A(dir.y, k) + Rd[k];
          dir.X[k] = -s.X[k] - W[k] * dir.Z[k] * W[k];
          if (sigmu != 0.0) dir.X[k] += sigmu * Zinv[k];
          dir.X[k] = 0.5 * (dir.X[k] + dir.X[k].transpose()).eval();
          dir.Z[k] = 0.5 * (dir.Z[k] + dir.Z[k].transpose()).eval();
        }
      };

      const double tau = iter < 3 ? 0.9 : 0.98;

      // Affine (predictor) direction fixes the centering parameter.
      State aff;
      directions(0.0, aff);
      double ax = 1.0, az = 1.0;
      for (int k = 0; k < nblocks; ++k) {
        ax = std::min(ax, step_to_boundary(s.X[k], aff.X[k], tau));
        az = std::min(az, step_to_boundary(s.Z[k], aff.Z[k], tau));
      }
      double mu_aff = 0.0;
      for (int k = 0; k < nblocks; ++k)
        mu_aff += ((s.X[k] + ax * aff.X[k]).array() *
                   (s.Z[k] + az * aff.Z[k]).array()).sum();
      mu_aff /= ntot;
      double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
      sigma = std::min(0.9, std::max(1e-6, sigma));

      State dir;
      directions(sigma * mu, dir);
      ax = az = 1.0;
      for (int k = 0; k < nblocks; ++k) {
        ax = std::min(ax, step_to_boundary(s.X[k], dir.X[k], tau));
        az = std::min(az, step_to_boundary(s.Z[k], dir.Z[k], tau));
      }
      if (ax <= 1e-10 && az <= 1e-10) break;

      for (int k = 0; k < nblocks; ++k) {
        s.X[k] += ax * dir.X[k];
        s.Z[k] += az * dir.Z[k];
      }
      // y and Z share the primal residual Rd; X and nu share the dual
      // residual rc, so nu moves with the X step.
      s.y += az * dir.y;
      if (p > 0) s.nu += ax * dir.nu;
    }

    // Did not hit the target; fall back to the best iterate seen and
    // classify it.
    const double final_metric =
        std::max({res.primal_infeas, res.dual_infeas, res.rel_gap});
    if (best_metric < final_metric) {
      const std::string msg = res.message;
      res = best_res;
      res.message = msg;
    }
    // Degenerate duals (ubiquitous here: interpolation constraints carry
    // redundancy) let the dual variables grow and pin the attainable gap a
    // few decades above the target while the iterate is fully feasible, so
    // the gap gets a wider near-optimality window than the residuals.
    // The dual residual gets an extra decade on top of that: near-degenerate
    // spectral LMIs (small eigenvalue ranges) can stall it around 1e2 times
    // the target while the primal iterate is feasible to machine precision
    // and the gap certifies the value to ~gap accuracy.
    if (res.primal_infeas <= 10.0 * settings.feas_tol &&
        res.dual_infeas <= 100.0 * settings.feas_tol &&
        res.rel_gap <= 1e3 * settings.gap_tol) {
      res.status = SolveStatus::NearOptimal;
      res.message = "stopped near the target tolerances";
    } else if (res.primal_infeas > 1e-4 && res.rel_gap < 1e-6) {
      res.status = SolveStatus::Infeasible;
      res.message = "residuals suggest an infeasible model";
    } else {
      res.status = SolveStatus::SolverFailure;
      if (res.message.empty()) res.message = "no convergence";
    }
    return res;
  } catch (const std::exception& ex) {
    res.status = SolveStatus::SolverFailure;
    res.message = ex.what();
    return res;
  }
}

const SolverAdapter& default_solver() {
  static InteriorPointSolver solver;
  return solver;
}

}  // namespace dpep
