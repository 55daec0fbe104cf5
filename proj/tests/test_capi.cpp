#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <string>

#include "dpep.h"

namespace {

const char* kSmallConfig = R"({
  "method": "dgd", "K": 2, "alpha": 0.5, "R": 1.0, "D": 1.0,
  "lambda_grid": [0.0, 0.5]
})";

struct ConfigHandle {
  dpep_config* c = nullptr;
  explicit ConfigHandle(const char* json) {
    REQUIRE(dpep_config_parse(json, &c) == DPEP_OK);
  }
  ~ConfigHandle() { dpep_config_free(c); }
};

}  // namespace

TEST_CASE("version and error strings are always available") {
  CHECK(dpep_version() != nullptr);
  CHECK(dpep_last_error() != nullptr);
}

TEST_CASE("config parsing reports errors through status and message") {
  dpep_config* c = nullptr;
  CHECK(dpep_config_parse("not json", &c) == DPEP_ERR_ARGUMENT);
  CHECK(c == nullptr);
  CHECK(std::string(dpep_last_error()).find("parse") != std::string::npos);

  CHECK(dpep_config_parse("{\"metod\": \"dgd\"}", &c) == DPEP_ERR_ARGUMENT);
  CHECK(dpep_config_parse(nullptr, &c) == DPEP_ERR_ARGUMENT);
  CHECK(dpep_config_parse(kSmallConfig, nullptr) == DPEP_ERR_ARGUMENT);

  CHECK(dpep_config_parse(kSmallConfig, &c) == DPEP_OK);
  REQUIRE(c != nullptr);
  dpep_config_free(c);
  dpep_config_free(nullptr);
}

TEST_CASE("sweep produces a table with the documented shape") {
  ConfigHandle cfg(kSmallConfig);
  dpep_table* t = nullptr;
  int all_ok = 0;
  REQUIRE(dpep_run_sweep(cfg.c, &t, &all_ok) == DPEP_OK);
  REQUIRE(t != nullptr);
  CHECK(all_ok == 1);
  CHECK(dpep_table_rows(t) == 2);
  CHECK(dpep_table_cols(t) == 10);
  CHECK(std::string(dpep_table_header(t, 0)) == "lambda");
  CHECK(std::string(dpep_table_cell(t, 0, 0)) == "0");
  CHECK(std::string(dpep_table_cell(t, 1, 3)) == "Optimal");
  CHECK(dpep_table_header(t, 99) == nullptr);
  CHECK(dpep_table_cell(t, 5, 0) == nullptr);

  char* csv = nullptr;
  REQUIRE(dpep_table_csv(t, &csv) == DPEP_OK);
  REQUIRE(csv != nullptr);
  CHECK(std::strstr(csv, "lambda,alpha,bound") == csv);
  dpep_string_free(csv);
  dpep_table_free(t);
  dpep_table_free(nullptr);
}

TEST_CASE("solve_bound matches the sweep and the oracle stays below it") {
  ConfigHandle cfg(kSmallConfig);
  double bound = 0.0;
  char* status = nullptr;
  REQUIRE(dpep_solve_bound(cfg.c, 0.5, &bound, &status) == DPEP_OK);
  REQUIRE(status != nullptr);
  CHECK(std::string(status) == "Optimal");
  dpep_string_free(status);
  CHECK(bound > 0.0);

  dpep_table* t = nullptr;
  REQUIRE(dpep_run_sweep(cfg.c, &t, nullptr) == DPEP_OK);
  const double sweep_bound = std::stod(dpep_table_cell(t, 1, 2));
  CHECK(bound == doctest::Approx(sweep_bound).epsilon(1e-9));
  dpep_table_free(t);

  double oracle = 0.0, argmax = -2.0;
  REQUIRE(dpep_scalar_oracle(cfg.c, 0.5, &oracle, &argmax) == DPEP_OK);
  CHECK(oracle <= bound + 1e-6);
  CHECK(oracle > 0.0);
  CHECK(argmax >= -0.5);
  CHECK(argmax <= 0.5);
}

TEST_CASE("optimize_alpha works and fixed-alpha entry points reject it") {
  ConfigHandle cfg(R"({
    "method": "dgd", "K": 2, "alpha": "optimize", "R": 1.0, "D": 1.0,
    "lambda_grid": [0.4],
    "alpha_search": {"grid_points": 7, "refine_iters": 4}
  })");
  double alpha = 0.0, bound = 0.0;
  REQUIRE(dpep_optimize_alpha(cfg.c, 0.4, &alpha, &bound) == DPEP_OK);
  CHECK(alpha > 0.0);
  CHECK(bound > 0.0);

  double unused = 0.0;
  CHECK(dpep_solve_bound(cfg.c, 0.4, &unused, nullptr) == DPEP_ERR_ARGUMENT);
  CHECK(dpep_scalar_oracle(cfg.c, 0.4, &unused, nullptr) == DPEP_ERR_ARGUMENT);
  CHECK(std::string(dpep_last_error()).find("optimiz") != std::string::npos);
}

TEST_CASE("compare merges one bound column per config") {
  ConfigHandle a(kSmallConfig);
  ConfigHandle b(R"({
    "method": "extra", "K": 2, "alpha": 0.5, "R": 1.0, "D": 1.0,
    "lambda_grid": [0.0, 0.5]
  })");
  const dpep_config* configs[] = {a.c, b.c};
  dpep_table* t = nullptr;
  int all_ok = 0;
  REQUIRE(dpep_compare(configs, 2, &t, &all_ok) == DPEP_OK);
  REQUIRE(t != nullptr);
  CHECK(all_ok == 1);
  CHECK(dpep_table_cols(t) == 3);
  CHECK(dpep_table_rows(t) == 2);
  CHECK(std::string(dpep_table_header(t, 1)) == "dgd-const");
  CHECK(std::string(dpep_table_header(t, 2)) == "extra-const");
  dpep_table_free(t);

  // Mismatched grids surface as an argument error, not a crash.
  ConfigHandle c(R"({
    "method": "dgd", "K": 2, "alpha": 0.5, "R": 1.0, "D": 1.0,
    "lambda_grid": [0.1]
  })");
  const dpep_config* bad[] = {a.c, c.c};
  CHECK(dpep_compare(bad, 2, &t, &all_ok) == DPEP_ERR_ARGUMENT);
}

TEST_CASE("verification runs through the C boundary") {
  ConfigHandle cfg(R"({
    "method": "dgd", "K": 2, "alpha": 0.5, "R": 1.0, "D": 1.0,
    "lambda_grid": [0.5], "verify_instances": 3, "oracle_grid_points": 3
  })");
  dpep_table* t = nullptr;
  int all_pass = 0;
  REQUIRE(dpep_verify(cfg.c, &t, &all_pass) == DPEP_OK);
  REQUIRE(t != nullptr);
  CHECK(all_pass == 1);
  CHECK(dpep_table_rows(t) == 2);
  CHECK(std::string(dpep_table_header(t, 0)) == "check");
  dpep_table_free(t);
}
