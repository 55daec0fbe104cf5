#include "dpep/verification.hpp"

#include <Eigen/QR>
#include <cmath>
#include <random>

namespace dpep {

namespace {

Eigen::MatrixXd random_normal(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = normal(rng);
  return m;
}

Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
  return Eigen::HouseholderQR<Eigen::MatrixXd>(random_normal(n, n, rng))
      .householderQ();
}

}  // namespace

LocalFunction LocalFunction::quadratic(Eigen::MatrixXd A, Eigen::VectorXd b) {
  LocalFunction f;
  f.kind = Kind::Quadratic;
  f.A = std::move(A);
  f.b = std::move(b);
  return f;
}

LocalFunction LocalFunction::max_affine(Eigen::MatrixXd S, Eigen::VectorXd o) {
  if (S.rows() == 0 || S.rows() != o.size())
    throw Error("max-affine function needs matching pieces");
  LocalFunction f;
  f.kind = Kind::MaxAffine;
  f.S = std::move(S);
  f.o = std::move(o);
  return f;
}

double LocalFunction::value(const Eigen::VectorXd& x) const {
  if (kind == Kind::Quadratic) return 0.5 * x.dot(A * x) + b.dot(x);
  return (S * x + o).maxCoeff();
}

Eigen::VectorXd LocalFunction::gradient(const Eigen::VectorXd& x) const {
  if (kind == Kind::Quadratic) return A * x + b;
  int arg = 0;
  (S * x + o).maxCoeff(&arg);
  return S.row(arg).transpose();
}

double ExplicitInstance::f(const Eigen::VectorXd& x) const {
  double v = 0.0;
  for (const auto& fi : functions) v += fi.value(x);
  return v / static_cast<double>(N);
}

Eigen::MatrixXd make_averaging_matrix(int N, const std::vector<double>& eigs,
                                      std::uint64_t seed) {
  if (N < 2) throw Error("averaging matrix needs N >= 2");
  if (static_cast<int>(eigs.size()) != N - 1)
    throw Error("averaging matrix needs N - 1 eigenvalues besides 1");
  for (double e : eigs)
    if (!(std::abs(e) < 1.0))
      throw Error("averaging matrix eigenvalues must satisfy |e| < 1");

  std::mt19937_64 rng(seed);
  Eigen::MatrixXd M = random_normal(N, N, rng);
  M.col(0).setOnes();
  Eigen::MatrixXd Q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ();
  if (Q(0, 0) < 0) Q.col(0) = -Q.col(0);

  Eigen::VectorXd lam(N);
  lam(0) = 1.0;
  for (int i = 0; i < N - 1; ++i) lam(i + 1) = eigs[i];
  return Q * lam.asDiagonal() * Q.transpose();
}

ExplicitInstance sample_quadratic_instance(double mu, double L, int N, int d,
                                           const std::vector<double>& eigs,
                                           std::uint64_t seed) {
  if (!(0 < mu && mu <= L)) throw Error("quadratic sampler needs 0 < mu <= L");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> spec(mu, L);

  ExplicitInstance inst;
  inst.N = N;
  inst.d = d;
  inst.W = make_averaging_matrix(N, eigs, rng());

  Eigen::MatrixXd A_sum = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b_sum = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < N; ++i) {
    const Eigen::MatrixXd Q = random_orthogonal(d, rng);
    Eigen::VectorXd lam(d);
    for (int j = 0; j < d; ++j) lam(j) = spec(rng);
    Eigen::MatrixXd A = Q * lam.asDiagonal() * Q.transpose();
    A = 0.5 * (A + A.transpose());
    const Eigen::VectorXd b = random_normal(d, 1, rng);
    A_sum += A;
    b_sum += b;
    inst.functions.push_back(LocalFunction::quadratic(std::move(A), b));
  }
  inst.x_star = A_sum.ldlt().solve(-b_sum);
  return inst;
}

ExplicitInstance sample_max_affine_instance(double R, int N, int d, int pieces,
                                            const std::vector<double>& eigs,
                                            std::uint64_t seed) {
  if (!(R > 0) || pieces < 1) throw Error("max-affine sampler needs R > 0, pieces >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ExplicitInstance inst;
  inst.N = N;
  inst.d = d;
  inst.W = make_averaging_matrix(N, eigs, rng());
  inst.x_star = Eigen::VectorXd::Zero(d);

  // Slopes active at x* = 0, summing to zero across agents so that 0 is a
  // subgradient of the average function there.
  Eigen::MatrixXd G0 = random_normal(N, d, rng);
  G0.rowwise() -= G0.colwise().mean();
  double maxn = 0.0;
  for (int i = 0; i < N; ++i) maxn = std::max(maxn, G0.row(i).norm());
  if (maxn > 0) G0 *= 0.9 * R / maxn;

  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd S(pieces, d);
    Eigen::VectorXd o(pieces);
    S.row(0) = G0.row(i);
    o(0) = 0.0;
    for (int j = 1; j < pieces; ++j) {
      Eigen::VectorXd s = random_normal(d, 1, rng);
      const double n = s.norm();
      if (n > 0) s *= R * unit(rng) / n;
      S.row(j) = s.transpose();
      o(j) = -0.5 * unit(rng);  // inactive at 0, active nearby
    }
    inst.functions.push_back(LocalFunction::max_affine(std::move(S), std::move(o)));
  }
  return inst;
}

double star_gradient_disagreement(const ExplicitInstance& inst) {
  double acc = 0.0;
  for (const auto& fi : inst.functions) acc += fi.gradient(inst.x_star).squaredNorm();
  return std::sqrt(acc / static_cast<double>(inst.N));
}

std::vector<Eigen::VectorXd> sample_initial_states(const ExplicitInstance& inst,
                                                   const InitialCondition& init,
                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> x0;
  if (init.kind == InitialCondition::Kind::ConsensusStart) {
    Eigen::VectorXd u = random_normal(inst.d, 1, rng);
    const double n = u.norm();
    u = n > 0 ? Eigen::VectorXd(init.D * u / n) : Eigen::VectorXd::Zero(inst.d);
    if (n == 0) u(0) = init.D;
    for (int i = 0; i < inst.N; ++i) x0.push_back(inst.x_star + u);
    return x0;
  }
  Eigen::MatrixXd Z = random_normal(inst.N, inst.d, rng);
  const double msd = Z.squaredNorm() / static_cast<double>(inst.N);
  if (msd > 0) Z *= init.D / std::sqrt(msd);
  for (int i = 0; i < inst.N; ++i)
    x0.push_back(inst.x_star + Z.row(i).transpose());
  return x0;
}

namespace {

struct MatrixSupply {
  const ExplicitInstance& inst;
  const MethodParams& params;
  const std::vector<Eigen::MatrixXd>& seq;
  std::size_t next = 0;

  // Mirrors the symbolic builders: constant mode reuses one matrix, the
  // time-varying mode consumes the supplied sequence per matrix class.
  const Eigen::MatrixXd& fresh() {
    if (params.matrix_mode == MatrixMode::Constant || seq.empty())
      return seq.empty() ? inst.W : seq[0];
    if (next >= seq.size())
      throw Error("not enough matrices supplied for time-varying simulation");
    return seq[next++];
  }
};

Eigen::MatrixXd agent_grads(const ExplicitInstance& inst, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd G(inst.N, inst.d);
  for (int i = 0; i < inst.N; ++i)
    G.row(i) = inst.functions[i].gradient(X.row(i).transpose()).transpose();
  return G;
}

}  // namespace

SimulatorResult simulate_method(const ExplicitInstance& inst,
                                const std::string& method,
                                const MethodParams& params,
                                const std::vector<Eigen::VectorXd>& x0,
                                PerformanceCriterion::Kind criterion,
                                const std::vector<Eigen::MatrixXd>& W_seq) {
  params.validate();
  if (!method_known(method)) throw Error("unknown method: " + method);
  if (static_cast<int>(x0.size()) != inst.N)
    throw Error("one initial state per agent required");
  if (static_cast<int>(inst.functions.size()) != inst.N)
    throw Error("one local function per agent required");

  Eigen::MatrixXd X(inst.N, inst.d);
  for (int i = 0; i < inst.N; ++i) X.row(i) = x0[i].transpose();

  MatrixSupply supply{inst, params, W_seq};
  std::vector<Eigen::MatrixXd> history{X};

  if (method == "dgd") {
    for (int k = 0; k < params.K; ++k) {
      const Eigen::MatrixXd& W = supply.fresh();
      X = W * X - params.alpha * agent_grads(inst, X);
      history.push_back(X);
    }
  } else if (method == "diging") {
    Eigen::MatrixXd S = agent_grads(inst, X);
    Eigen::MatrixXd G_prev = S;
    for (int k = 0; k < params.K; ++k) {
      const Eigen::MatrixXd& W = supply.fresh();
      const Eigen::MatrixXd X_next = W * X - params.alpha * S;
      const Eigen::MatrixXd& Ws =
          params.matrix_mode == MatrixMode::TimeVarying &&
                  !params.share_matrix_per_iteration
              ? supply.fresh()
              : W;
      const Eigen::MatrixXd G = agent_grads(inst, X_next);
      S = Ws * S + G - G_prev;
      G_prev = G;
      X = X_next;
      history.push_back(X);
    }
  } else {  // extra
    if (params.K > 0) {
      Eigen::MatrixXd C_prev = supply.fresh() * X;
      Eigen::MatrixXd G_prev = agent_grads(inst, X);
      Eigen::MatrixXd X_prev = X;
      X = C_prev - params.alpha * G_prev;
      history.push_back(X);
      for (int k = 1; k < params.K; ++k) {
        const Eigen::MatrixXd G = agent_grads(inst, X);
        const Eigen::MatrixXd C = supply.fresh() * X;
        const Eigen::MatrixXd X_next = X + C - 0.5 * X_prev - 0.5 * C_prev -
                                       params.alpha * (G - G_prev);
        X_prev = X;
        C_prev = C;
        G_prev = G;
        X = X_next;
        history.push_back(X);
      }
    }
  }

  SimulatorResult res;
  for (const auto& Xk : history) {
    std::vector<Eigen::VectorXd> row;
    for (int i = 0; i < inst.N; ++i) row.push_back(Xk.row(i).transpose());
    res.iterates.push_back(std::move(row));
    if (!Xk.allFinite() || Xk.norm() > 1e12) res.diverged = true;
  }

  const Eigen::MatrixXd& XK = history.back();
  if (criterion == PerformanceCriterion::Kind::MeanSquaredDistanceAtK) {
    res.criterion = (XK.rowwise() - inst.x_star.transpose()).squaredNorm() /
                    static_cast<double>(inst.N);
  } else if (criterion == PerformanceCriterion::Kind::FValGapAtAveragedIterate) {
    Eigen::VectorXd xav = Eigen::VectorXd::Zero(inst.d);
    for (const auto& Xk : history) xav += Xk.colwise().mean().transpose();
    xav /= static_cast<double>(history.size());
    res.criterion = inst.f(xav) - inst.f(inst.x_star);
  } else {
    throw Error("custom criteria cannot be simulated generically");
  }
  return res;
}

OracleResult scalar_oracle(const BoundRequest& base, std::vector<double> grid,
                           const SolverSettings& settings) {
  if (!base.range)
    throw Error("the scalar oracle needs a spectral range to sample from");
  const double lm = base.range->lam_minus;
  const double lp = base.range->lam_plus;
  if (grid.empty()) {
    const int n = 41;
    for (int i = 0; i < n; ++i)
      grid.push_back(n == 1 ? lm : lm + (lp - lm) * i / (n - 1));
  }

  OracleResult out;
  bool first = true;
  for (double g : grid) {
    if (g < lm - 1e-12 || g > lp + 1e-12)
      throw Error("oracle grid point outside the spectral range");
    BoundRequest req = base;
    req.range.reset();
    req.exact_lambda2 = g;
    const PEPSolveReport rep = solve_bound(req, settings);
    if (!rep.solver.usable())
      throw Error("oracle solve failed at lambda2 = " + std::to_string(g));
    out.samples.emplace_back(g, rep.value);
    if (first || rep.value > out.value) {
      out.value = rep.value;
      out.argmax_lambda2 = g;
      first = false;
    }
  }
  return out;
}

}  // namespace dpep
