#ifndef DPEP_VERIFICATION_HPP
#define DPEP_VERIFICATION_HPP

// Independent checks on the spectral bounds: explicit instances with
// constructed averaging matrices are simulated at the agent level and must
// stay below the bound, and an exact scalar-consensus oracle (the N = 2
// case, where the perp block of W acts as a scalar) probes the bound from
// below over a grid of admissible eigenvalues.

#include <cstdint>
#include <vector>

#include "dpep/assembler.hpp"

namespace dpep {

struct LocalFunction {
  enum class Kind { Quadratic, MaxAffine };
  Kind kind = Kind::Quadratic;

  // Quadratic: f(x) = x'Ax/2 + b'x.
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  // MaxAffine: f(x) = max_j (S.row(j) x + o(j)); the subgradient is the
  // slope of an active piece.
  Eigen::MatrixXd S;
  Eigen::VectorXd o;

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  static LocalFunction quadratic(Eigen::MatrixXd A, Eigen::VectorXd b);
  static LocalFunction max_affine(Eigen::MatrixXd S, Eigen::VectorXd o);
};

struct ExplicitInstance {
  int N = 2;
  int d = 1;
  Eigen::MatrixXd W;                     // symmetric, rows/columns sum to 1
  std::vector<LocalFunction> functions;  // one per agent
  Eigen::VectorXd x_star;                // minimizer of (1/N) sum f_i

  double f(const Eigen::VectorXd& x) const;  // (1/N) sum f_i(x)
};

/// W = Q diag(1, eigs) Q' with Q orthogonal and first column 1/sqrt(N):
/// symmetric, generalized doubly stochastic, spectrum exactly {1} + eigs.
/// The completion of Q is a seeded random orthonormal basis.
Eigen::MatrixXd make_averaging_matrix(int N, const std::vector<double>& eigs,
                                      std::uint64_t seed);

/// Quadratic instance f_i(x) = x'A_i x/2 + b_i'x with spectrum(A_i) in
/// [mu, L]; the global minimizer is computed exactly.
ExplicitInstance sample_quadratic_instance(double mu, double L, int N, int d,
                                           const std::vector<double>& eigs,
                                           std::uint64_t seed);

/// Max-affine instance with all slopes of norm <= R and x* = 0 by
/// construction: each f_i has an affine piece active at 0 whose slopes sum
/// to zero across agents.
ExplicitInstance sample_max_affine_instance(double R, int N, int d, int pieces,
                                            const std::vector<double>& eigs,
                                            std::uint64_t seed);

/// sqrt((1/N) sum ||grad f_i(x*)||^2): the norm of the optimum's perp
/// gradient in basis b (the par part vanishes by optimality). Smooth-class
/// bounds for this instance need star_gradient_bound >= this value.
double star_gradient_disagreement(const ExplicitInstance& inst);

/// Initial agent states on the boundary of the initial condition:
/// consensus start puts every agent at one random point with
/// ||x0 - x*|| = D; the mean-squared-distance start spreads the agents with
/// (1/N) sum ||x_i0 - x*||^2 = D^2.
std::vector<Eigen::VectorXd> sample_initial_states(const ExplicitInstance& inst,
                                                   const InitialCondition& init,
                                                   std::uint64_t seed);

struct SimulatorResult {
  std::vector<std::vector<Eigen::VectorXd>> iterates;  // iterates[k][agent]
  double criterion = 0.0;
  bool diverged = false;
};

/// Runs the literal agent-level recursion of the named method and evaluates
/// the criterion with the same formula as the PEP. W_seq supplies one matrix
/// per matrix class in the order the symbolic builders create them
/// (time-varying mode); when empty, every class uses inst.W.
SimulatorResult simulate_method(const ExplicitInstance& inst,
                                const std::string& method,
                                const MethodParams& params,
                                const std::vector<Eigen::VectorXd>& x0,
                                PerformanceCriterion::Kind criterion,
                                const std::vector<Eigen::MatrixXd>& W_seq = {});

struct OracleResult {
  double value = 0.0;          // max over the grid
  double argmax_lambda2 = 0.0;
  std::vector<std::pair<double, double>> samples;  // (lambda2, bound)
};

/// Exact scalar-consensus oracle: solves the request with every lambda2 in
/// the grid substituted exactly and returns the maximum. Each grid point is
/// an admissible matrix, so the result is a lower bound on the spectral
/// bound of the same request. Default grid: 41 equispaced points on
/// [-lam, lam] taken from the request's range.
OracleResult scalar_oracle(const BoundRequest& base,
                           std::vector<double> grid = {},
                           const SolverSettings& settings = SolverSettings{});

}  // namespace dpep

#endif
