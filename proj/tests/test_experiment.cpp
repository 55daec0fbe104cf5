#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "dpep/experiment.hpp"

using namespace dpep;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.method = "dgd";
  c.params.K = 2;
  c.params.alpha = 0.5;
  c.fclass = FunctionClass::bounded_gradient(1.0);
  c.init = InitialCondition::consensus_start(1.0);
  c.criterion = PerformanceCriterion::Kind::FValGapAtAveragedIterate;
  c.lambda_grid = {0.0, 0.5};
  return c;
}

// All columns except the trailing wall-time one.
std::vector<std::string> stable_part(const Table& t) {
  std::vector<std::string> out;
  for (const auto& row : t.cells)
    for (std::size_t i = 0; i + 1 < row.size(); ++i) out.push_back(row[i]);
  return out;
}

}  // namespace

TEST_CASE("json config parsing") {
  const auto c = config_from_json(R"({
    "method": "diging", "K": 5, "alpha": "optimize",
    "mu": 0.1, "L": 1.0, "D": 2.0,
    "criterion": "msd", "init": "msd", "matrix_mode": "time-varying",
    "lambda_grid": [0.1, 0.2], "seed": 7,
    "alpha_search": {"grid_points": 9, "refine_iters": 4}
  })");
  CHECK(c.method == "diging");
  CHECK(c.params.K == 5);
  CHECK(c.optimize_alpha);
  CHECK(c.fclass.kind == FunctionClass::Kind::SmoothStronglyConvex);
  CHECK(c.fclass.mu == 0.1);
  CHECK(c.init.kind == InitialCondition::Kind::MeanSquaredDistance);
  CHECK(c.init.D == 2.0);
  CHECK(c.criterion == PerformanceCriterion::Kind::MeanSquaredDistanceAtK);
  CHECK(c.params.matrix_mode == MatrixMode::TimeVarying);
  CHECK(c.lambda_grid == std::vector<double>{0.1, 0.2});
  CHECK(c.alpha_search.grid_points == 9);
  CHECK(c.seed == 7);
  CHECK(c.effective_label() == "diging-tv");

  CHECK_THROWS_AS(config_from_json("{\"metod\": \"dgd\"}"), Error);
  CHECK_THROWS_AS(config_from_json("{\"criterion\": \"best\"}"), Error);
  CHECK_THROWS_AS(config_from_json("{\"mu\": 0.1}"), Error);  // L missing
  CHECK_THROWS_AS(config_from_json("not json"), Error);
  CHECK_THROWS_AS(config_from_json("{\"lambda_grid\": [1.5]}"), Error);
}

TEST_CASE("run_sweep: one row per grid point, bounds increase with lambda") {
  const auto res = run_sweep(small_config());
  REQUIRE(res.rows.size() == 2);
  CHECK(res.all_ok);
  CHECK(res.rows[0].ok);
  CHECK(res.rows[1].ok);
  CHECK(res.rows[1].bound >= res.rows[0].bound - 1e-6);
  CHECK(res.rows[0].status == "Optimal");
  CHECK(res.rows[0].par_dim > 0);

  auto single = small_config();
  single.lambda_grid = {0.3};
  CHECK(run_sweep(single).rows.size() == 1);
}

TEST_CASE("sweep tables are deterministic apart from timing") {
  const auto a = run_sweep(small_config()).table();
  const auto b = run_sweep(small_config()).table();
  CHECK(a.header == b.header);
  CHECK(stable_part(a) == stable_part(b));
  REQUIRE(a.header.size() == 10);
  CHECK(a.header.front() == "lambda");
  CHECK(a.header.back() == "wall_ms");
  // CSV shape: header + one line per row, comma-separated.
  const std::string csv = a.to_csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("optimize_alpha never loses to its own evaluations") {
  auto c = small_config();
  c.lambda_grid = {0.4};
  c.alpha_search.grid_points = 7;
  c.alpha_search.refine_iters = 6;
  const auto best = optimize_alpha(c, 0.4);
  CHECK(best.evaluations >= 7);
  CHECK(best.bound > 0);

  for (double alpha : {0.2, 0.5, 0.9}) {
    c.params.alpha = alpha;
    const auto row = run_sweep(c).rows.front();
    REQUIRE(row.ok);
    CHECK(best.bound <= row.bound + 1e-7);
  }
}

TEST_CASE("compare_methods merges bounds over a shared grid") {
  auto a = small_config();
  auto b = small_config();
  b.method = "extra";
  const auto cmp = compare_methods({a, b});
  REQUIRE(cmp.table.header.size() == 3);
  CHECK(cmp.table.header[1] == "dgd-const");
  CHECK(cmp.table.header[2] == "extra-const");
  REQUIRE(cmp.table.cells.size() == 2);
  CHECK(cmp.per_config.size() == 2);
  CHECK(cmp.per_config[0].all_ok);
  CHECK(cmp.per_config[1].all_ok);

  b.lambda_grid = {0.0};
  CHECK_THROWS_AS(compare_methods({a, b}), Error);
}

TEST_CASE("verification driver passes on a small bounded-gradient setup") {
  auto c = small_config();
  c.lambda_grid = {0.5};
  c.verify_instances = 4;
  c.oracle_grid_points = 5;
  const auto res = run_verification(c);
  REQUIRE(res.rows.size() == 2);  // oracle + simulation
  for (const auto& r : res.rows) {
    INFO(r.check, ": ", r.detail);
    CHECK(r.pass);
  }
  CHECK(res.all_pass);
  CHECK(res.table().header == std::vector<std::string>{"check", "pass", "detail"});
}

TEST_CASE("verification driver passes on a small smooth time-varying setup") {
  ExperimentConfig c;
  c.method = "diging";
  c.params.K = 2;
  c.params.alpha = 0.2;
  c.params.matrix_mode = MatrixMode::TimeVarying;
  c.fclass = FunctionClass::smooth_strongly_convex(0.1, 1.0);
  c.init = InitialCondition::mean_squared_distance(1.0);
  c.criterion = PerformanceCriterion::Kind::MeanSquaredDistanceAtK;
  c.lambda_grid = {0.4};
  c.verify_instances = 3;
  c.oracle_grid_points = 3;
  const auto res = run_verification(c);
  for (const auto& r : res.rows) {
    INFO(r.check, ": ", r.detail);
    CHECK(r.pass);
  }
  CHECK(res.all_pass);
}
