#include "dpep/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

namespace dpep {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::string ExperimentConfig::effective_label() const {
  if (!label.empty()) return label;
  return method + (params.matrix_mode == MatrixMode::TimeVarying ? "-tv" : "-const");
}

void ExperimentConfig::validate() const {
  if (!method_known(method)) throw Error("unknown method: " + method);
  if (lambda_grid.empty()) throw Error("lambda grid must not be empty");
  for (double l : lambda_grid)
    if (!(0.0 <= l && l < 1.0))
      throw Error("lambda grid values must lie in [0, 1)");
  if (!optimize_alpha && !(params.alpha > 0))
    throw Error("step size alpha must be positive");
  if (params.K < 0) throw Error("iteration count K must be >= 0");
  if (alpha_search.grid_points < 2 || alpha_search.refine_iters < 0)
    throw Error("alpha search needs >= 2 grid points and >= 0 refinements");
  if (verify_instances < 1 || oracle_grid_points < 1)
    throw Error("verification needs at least one instance and one grid point");
}

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw Error("config must be a JSON object");

  ExperimentConfig c;
  double R = 1.0, mu = -1.0, L = -1.0, D = 1.0;
  std::string init_kind = "consensus";

  for (const auto& [key, val] : j.items()) {
    try {
      if (key == "method") c.method = val.get<std::string>();
      else if (key == "K") c.params.K = val.get<int>();
      else if (key == "alpha") {
        if (val.is_string() && val.get<std::string>() == "optimize")
          c.optimize_alpha = true;
        else
          c.params.alpha = val.get<double>();
      } else if (key == "R") R = val.get<double>();
      else if (key == "mu") mu = val.get<double>();
      else if (key == "L") L = val.get<double>();
      else if (key == "D") D = val.get<double>();
      else if (key == "criterion") {
        const auto s = val.get<std::string>();
        if (s == "fval-gap")
          c.criterion = PerformanceCriterion::Kind::FValGapAtAveragedIterate;
        else if (s == "msd")
          c.criterion = PerformanceCriterion::Kind::MeanSquaredDistanceAtK;
        else
          throw Error("criterion must be \"fval-gap\" or \"msd\"");
      } else if (key == "init") init_kind = val.get<std::string>();
      else if (key == "matrix_mode") {
        const auto s = val.get<std::string>();
        if (s == "constant") c.params.matrix_mode = MatrixMode::Constant;
        else if (s == "time-varying") c.params.matrix_mode = MatrixMode::TimeVarying;
        else throw Error("matrix_mode must be \"constant\" or \"time-varying\"");
      } else if (key == "share_matrix_per_iteration")
        c.params.share_matrix_per_iteration = val.get<bool>();
      else if (key == "lambda_grid")
        c.lambda_grid = val.get<std::vector<double>>();
      else if (key == "alpha_search") {
        for (const auto& [k2, v2] : val.items()) {
          if (k2 == "lo") c.alpha_search.lo = v2.get<double>();
          else if (k2 == "hi") c.alpha_search.hi = v2.get<double>();
          else if (k2 == "grid_points") c.alpha_search.grid_points = v2.get<int>();
          else if (k2 == "refine_iters") c.alpha_search.refine_iters = v2.get<int>();
          else throw Error("unknown alpha_search key: " + k2);
        }
      } else if (key == "star_gradient_bound")
        c.star_gradient_bound = val.get<double>();
      else if (key == "solver") {
        for (const auto& [k2, v2] : val.items()) {
          if (k2 == "feas_tol") c.solver.feas_tol = v2.get<double>();
          else if (k2 == "gap_tol") c.solver.gap_tol = v2.get<double>();
          else if (k2 == "max_iter") c.solver.max_iter = v2.get<int>();
          else if (k2 == "verbose") c.solver.verbose = v2.get<bool>();
          else throw Error("unknown solver key: " + k2);
        }
      } else if (key == "seed") c.seed = val.get<std::uint64_t>();
      else if (key == "label") c.label = val.get<std::string>();
      else if (key == "verify_instances") c.verify_instances = val.get<int>();
      else if (key == "oracle_grid_points") c.oracle_grid_points = val.get<int>();
      else throw Error("unknown config key: " + key);
    } catch (const nlohmann::json::exception& e) {
      throw Error("config key \"" + key + "\": " + e.what());
    }
  }

  if (mu >= 0 || L >= 0) {
    if (!(mu >= 0 && L > 0))
      throw Error("smooth class needs both mu and L");
    c.fclass = FunctionClass::smooth_strongly_convex(mu, L);
  } else {
    c.fclass = FunctionClass::bounded_gradient(R);
  }

  if (init_kind == "consensus")
    c.init = InitialCondition::consensus_start(D);
  else if (init_kind == "msd")
    c.init = InitialCondition::mean_squared_distance(D);
  else
    throw Error("init must be \"consensus\" or \"msd\"");

  c.validate();
  return c;
}

std::string Table::to_csv() const {
  std::string out;
  auto append_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  };
  append_row(header);
  for (const auto& row : cells) append_row(row);
  return out;
}

BoundRequest request_from_config(const ExperimentConfig& config, double lambda,
                                 double alpha) {
  BoundRequest req;
  req.method = config.method;
  req.params = config.params;
  req.params.alpha = alpha;
  req.fclass = config.fclass;
  req.init = config.init;
  req.criterion =
      config.criterion == PerformanceCriterion::Kind::FValGapAtAveragedIterate
          ? PerformanceCriterion::fval_gap_at_averaged_iterate()
          : PerformanceCriterion::mean_squared_distance_at_K();
  req.range = SpectralRange::symmetric(lambda);
  req.star_gradient_bound = config.star_gradient_bound;
  return req;
}

namespace {

SweepRow solve_one(const ExperimentConfig& config, double lambda, double alpha) {
  SweepRow row;
  row.lambda = lambda;
  row.alpha = alpha;
  const double t0 = now_ms();
  try {
    const PEPProblem p = assemble_pep(request_from_config(config, lambda, alpha));
    row.par_dim = p.ctx.layout.num_leaves(Block::Parallel);
    row.perp_dim = p.ctx.layout.num_leaves(Block::Perp);
    const PEPSolveReport rep = solve_pep(p, default_solver(), config.solver);
    row.status = status_name(rep.solver.status);
    row.primal_infeas = rep.solver.primal_infeas;
    row.dual_infeas = rep.solver.dual_infeas;
    row.rel_gap = rep.solver.rel_gap;
    row.ok = rep.solver.usable();
    if (row.ok) row.bound = rep.value;
  } catch (const Error& e) {
    row.status = std::string("error: ") + e.what();
    row.ok = false;
  }
  row.wall_ms = now_ms() - t0;
  return row;
}

}  // namespace

Table SweepResult::table() const {
  Table t;
  t.header = {"lambda", "alpha",      "bound",    "status",  "primal_infeas",
              "dual_infeas", "rel_gap", "par_dim", "perp_dim", "wall_ms"};
  for (const auto& r : rows)
    t.cells.push_back({fmt(r.lambda), fmt(r.alpha), r.ok ? fmt(r.bound) : "nan",
                       r.status, fmt(r.primal_infeas), fmt(r.dual_infeas),
                       fmt(r.rel_gap), std::to_string(r.par_dim),
                       std::to_string(r.perp_dim), fmt(r.wall_ms)});
  return t;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepResult res;
  res.all_ok = true;
  for (double lambda : config.lambda_grid) {
    double alpha = config.params.alpha;
    if (config.optimize_alpha) {
      try {
        alpha = optimize_alpha(config, lambda).alpha_star;
      } catch (const Error& e) {
        SweepRow row;
        row.lambda = lambda;
        row.status = std::string("error: ") + e.what();
        res.rows.push_back(std::move(row));
        res.all_ok = false;
        continue;
      }
    }
    res.rows.push_back(solve_one(config, lambda, alpha));
    res.all_ok = res.all_ok && res.rows.back().ok;
  }
  return res;
}

AlphaResult optimize_alpha(const ExperimentConfig& config, double lambda) {
  config.validate();
  double lo = config.alpha_search.lo;
  double hi = config.alpha_search.hi;
  if (!(lo > 0) || !(hi > lo)) {
    if (config.fclass.kind == FunctionClass::Kind::SmoothStronglyConvex) {
      lo = 0.01 / config.fclass.L;
      hi = 2.0 / config.fclass.L;
    } else {
      lo = 0.01 * config.init.D / config.fclass.R;
      hi = 2.0 * config.init.D / config.fclass.R;
    }
  }

  AlphaResult best;
  best.bound = std::numeric_limits<double>::infinity();
  auto eval = [&](double alpha) {
    ++best.evaluations;
    const SweepRow row = solve_one(config, lambda, alpha);
    const double v = row.ok ? row.bound : std::numeric_limits<double>::infinity();
    if (v < best.bound) {
      best.bound = v;
      best.alpha_star = alpha;
    }
    return v;
  };

  const int n = config.alpha_search.grid_points;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i)
    grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  int ibest = 0;
  double vbest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double v = eval(grid[i]);
    if (v < vbest) {
      vbest = v;
      ibest = i;
    }
  }
  if (!std::isfinite(vbest)) throw Error("every alpha evaluation failed");

  // Golden-section refinement on the bracket around the best grid point.
  double a = grid[std::max(ibest - 1, 0)];
  double b = grid[std::min(ibest + 1, n - 1)];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < config.alpha_search.refine_iters; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = eval(x2);
    }
  }
  return best;
}

CompareResult compare_methods(const std::vector<ExperimentConfig>& configs) {
  if (configs.empty()) throw Error("nothing to compare");
  for (const auto& c : configs) {
    c.validate();
    if (c.lambda_grid != configs.front().lambda_grid)
      throw Error("compared configs must share one lambda grid");
    if (c.criterion != configs.front().criterion)
      throw Error("compared configs must share one criterion");
  }

  CompareResult res;
  res.table.header = {"lambda"};
  for (const auto& c : configs) {
    res.per_config.push_back(run_sweep(c));
    res.table.header.push_back(c.effective_label());
  }
  const auto& grid = configs.front().lambda_grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<std::string> row{fmt(grid[i])};
    for (const auto& sweep : res.per_config)
      row.push_back(sweep.rows[i].ok ? fmt(sweep.rows[i].bound) : "nan");
    res.table.cells.push_back(std::move(row));
  }
  return res;
}

Table VerifyResult::table() const {
  Table t;
  t.header = {"check", "pass", "detail"};
  for (const auto& r : rows)
    t.cells.push_back({r.check, r.pass ? "pass" : "FAIL", r.detail});
  return t;
}

namespace {

std::vector<double> spread_eigs(int N, double lambda, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> eigs;
  for (int i = 0; i < N - 1; ++i) eigs.push_back(lambda * unit(rng));
  if (!eigs.empty()) eigs[0] = lambda;  // keep the extreme eigenvalue present
  return eigs;
}

}  // namespace

VerifyResult run_verification(const ExperimentConfig& config) {
  config.validate();
  VerifyResult res;
  res.all_pass = true;
  auto push = [&res](std::string check, bool pass, std::string detail) {
    res.rows.push_back({std::move(check), pass, std::move(detail)});
    res.all_pass = res.all_pass && pass;
  };

  const bool smooth =
      config.fclass.kind == FunctionClass::Kind::SmoothStronglyConvex;
  const auto crit_kind = config.criterion;

  for (std::size_t li = 0; li < config.lambda_grid.size(); ++li) {
    const double lambda = config.lambda_grid[li];
    double alpha = config.params.alpha;
    if (config.optimize_alpha) alpha = optimize_alpha(config, lambda).alpha_star;
    const std::string tag = " lambda=" + fmt(lambda);

    // Sample the instances first: the smooth-class bound must cover the
    // largest gradient disagreement at the optimum among them.
    std::vector<ExplicitInstance> instances;
    double max_disagreement = 0.0;
    std::mt19937_64 rng(config.seed + 977 * li);
    const int Ns[3] = {2, 3, 5};
    const int ds[2] = {1, 2};
    for (int t = 0; t < config.verify_instances; ++t) {
      const int N = Ns[t % 3];
      const int d = ds[(t / 3) % 2];
      const auto eigs = spread_eigs(N, lambda, rng);
      const std::uint64_t s = rng();
      ExplicitInstance inst =
          smooth ? sample_quadratic_instance(config.fclass.mu, config.fclass.L,
                                             N, d, eigs, s)
                 : sample_max_affine_instance(config.fclass.R, N, d, 3, eigs, s);
      max_disagreement = std::max(max_disagreement, star_gradient_disagreement(inst));
      instances.push_back(std::move(inst));
    }

    BoundRequest req = request_from_config(config, lambda, alpha);
    if (smooth)
      req.star_gradient_bound =
          std::max(req.star_gradient_bound.value_or(config.fclass.L * config.init.D),
                   max_disagreement + 1e-9);
    PEPSolveReport rep;
    try {
      rep = solve_bound(req, config.solver);
    } catch (const Error& e) {
      push("bound" + tag, false, std::string("error: ") + e.what());
      continue;
    }
    if (!rep.solver.usable()) {
      push("bound" + tag, false,
           std::string("solver status ") + status_name(rep.solver.status));
      continue;
    }

    // Scalar-consensus oracle: a lower bound by construction; the gap to
    // the spectral bound is reported (empirically small, not a theorem).
    try {
      std::vector<double> grid;
      const int n = config.oracle_grid_points;
      for (int i = 0; i < n; ++i)
        grid.push_back(n == 1 ? lambda
                              : -lambda + 2.0 * lambda * i / (n - 1));
      const OracleResult oracle = scalar_oracle(req, grid, config.solver);
      const bool sound = oracle.value <= rep.value + 1e-6;
      const double gap =
          rep.value > 0 ? (rep.value - oracle.value) / rep.value : 0.0;
      push("oracle" + tag, sound,
           "bound=" + fmt(rep.value) + " oracle=" + fmt(oracle.value) +
               " rel_gap=" + fmt(gap) + " argmax=" + fmt(oracle.argmax_lambda2));
    } catch (const Error& e) {
      push("oracle" + tag, false, std::string("error: ") + e.what());
    }

    // Simulation soundness: every explicit run stays below the bound.
    double worst = -std::numeric_limits<double>::infinity();
    bool pass = true;
    std::string fail_note;
    for (std::size_t t = 0; t < instances.size(); ++t) {
      const auto& inst = instances[t];
      const auto x0 = sample_initial_states(inst, config.init, rng());
      std::vector<Eigen::MatrixXd> W_seq;
      if (config.params.matrix_mode == MatrixMode::TimeVarying)
        for (int k = 0; k < 2 * config.params.K + 2; ++k)
          W_seq.push_back(
              make_averaging_matrix(inst.N, spread_eigs(inst.N, lambda, rng), rng()));
      MethodParams mp = config.params;
      mp.alpha = alpha;
      const SimulatorResult sim =
          simulate_method(inst, config.method, mp, x0, crit_kind, W_seq);
      worst = std::max(worst, sim.criterion);
      if (sim.diverged || !(sim.criterion <= rep.value + 1e-6)) {
        pass = false;
        fail_note = sim.diverged ? " (diverged)" : "";
      }
    }
    push("simulation" + tag, pass,
         "instances=" + std::to_string(instances.size()) + " worst=" + fmt(worst) +
             " bound=" + fmt(rep.value) + fail_note);
  }
  return res;
}

}  // namespace dpep
