#include "dpep.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "dpep/experiment.hpp"

// C boundary: every exception is converted to a status code plus a
// thread-local message retrievable through dpep_last_error().

extern "C" {
struct dpep_config {
  dpep::ExperimentConfig cfg;
};

struct dpep_table {
  dpep::Table table;
};
}

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
dpep_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const dpep::Error& e) {
    set_error(e.what());
    return DPEP_ERR_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return DPEP_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown failure");
    return DPEP_ERR_INTERNAL;
  }
}

dpep_status require(bool ok, const char* msg) {
  if (ok) return DPEP_OK;
  set_error(msg);
  return DPEP_ERR_ARGUMENT;
}

// Requests built from a config need a concrete step size.
dpep_status concrete_alpha(const dpep::ExperimentConfig& cfg, double* alpha) {
  if (cfg.optimize_alpha) {
    set_error(
        "config requests step-size optimization; use dpep_optimize_alpha or "
        "set a numeric alpha");
    return DPEP_ERR_ARGUMENT;
  }
  *alpha = cfg.params.alpha;
  return DPEP_OK;
}

}  // namespace

extern "C" {

const char* dpep_version(void) { return "1.0.0"; }

const char* dpep_last_error(void) { return g_last_error.c_str(); }

dpep_status dpep_config_parse(const char* json_text, dpep_config** out) {
  if (auto s = require(json_text && out, "json_text and out must be non-NULL"))
    return s;
  *out = nullptr;
  return guarded([&] {
    auto cfg = dpep::config_from_json(json_text);
    cfg.validate();
    *out = new dpep_config{std::move(cfg)};
    return DPEP_OK;
  });
}

void dpep_config_free(dpep_config* config) { delete config; }

size_t dpep_table_rows(const dpep_table* table) {
  return table ? table->table.cells.size() : 0;
}

size_t dpep_table_cols(const dpep_table* table) {
  return table ? table->table.header.size() : 0;
}

const char* dpep_table_header(const dpep_table* table, size_t col) {
  if (!table || col >= table->table.header.size()) return nullptr;
  return table->table.header[col].c_str();
}

const char* dpep_table_cell(const dpep_table* table, size_t row, size_t col) {
  if (!table || row >= table->table.cells.size()) return nullptr;
  const auto& r = table->table.cells[row];
  if (col >= r.size()) return nullptr;
  return r[col].c_str();
}

dpep_status dpep_table_csv(const dpep_table* table, char** out) {
  if (auto s = require(table && out, "table and out must be non-NULL"))
    return s;
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(table->table.to_csv());
    return require(*out != nullptr, "out of memory");
  });
}

void dpep_table_free(dpep_table* table) { delete table; }

void dpep_string_free(char* s) { std::free(s); }

dpep_status dpep_run_sweep(const dpep_config* config, dpep_table** out,
                           int* all_ok) {
  if (auto s = require(config && out, "config and out must be non-NULL"))
    return s;
  *out = nullptr;
  return guarded([&] {
    const auto res = dpep::run_sweep(config->cfg);
    *out = new dpep_table{res.table()};
    if (all_ok) *all_ok = res.all_ok ? 1 : 0;
    return DPEP_OK;
  });
}

dpep_status dpep_optimize_alpha(const dpep_config* config, double lam,
                                double* alpha_star, double* bound) {
  if (auto s = require(config && alpha_star && bound,
                       "config, alpha_star and bound must be non-NULL"))
    return s;
  return guarded([&] {
    const auto res = dpep::optimize_alpha(config->cfg, lam);
    *alpha_star = res.alpha_star;
    *bound = res.bound;
    return DPEP_OK;
  });
}

dpep_status dpep_compare(const dpep_config* const* configs, size_t count,
                         dpep_table** out, int* all_ok) {
  if (auto s = require(configs && out && count > 0,
                       "configs and out must be non-NULL and count positive"))
    return s;
  *out = nullptr;
  for (size_t i = 0; i < count; ++i)
    if (auto s = require(configs[i] != nullptr, "configs entries must be non-NULL"))
      return s;
  return guarded([&] {
    std::vector<dpep::ExperimentConfig> cfgs;
    cfgs.reserve(count);
    for (size_t i = 0; i < count; ++i) cfgs.push_back(configs[i]->cfg);
    const auto res = dpep::compare_methods(cfgs);
    *out = new dpep_table{res.table};
    if (all_ok) {
      *all_ok = 1;
      for (const auto& sweep : res.per_config)
        if (!sweep.all_ok) *all_ok = 0;
    }
    return DPEP_OK;
  });
}

dpep_status dpep_verify(const dpep_config* config, dpep_table** out,
                        int* all_pass) {
  if (auto s = require(config && out, "config and out must be non-NULL"))
    return s;
  *out = nullptr;
  return guarded([&] {
    const auto res = dpep::run_verification(config->cfg);
    *out = new dpep_table{res.table()};
    if (all_pass) *all_pass = res.all_pass ? 1 : 0;
    return DPEP_OK;
  });
}

dpep_status dpep_solve_bound(const dpep_config* config, double lam,
                             double* bound, char** solver_status) {
  if (auto s = require(config && bound, "config and bound must be non-NULL"))
    return s;
  if (solver_status) *solver_status = nullptr;
  double alpha = 0.0;
  if (auto s = concrete_alpha(config->cfg, &alpha)) return s;
  return guarded([&]() -> dpep_status {
    const auto req = dpep::request_from_config(config->cfg, lam, alpha);
    const auto rep = dpep::solve_bound(req, config->cfg.solver);
    if (solver_status)
      *solver_status = dup_string(dpep::status_name(rep.solver.status));
    if (!rep.solver.usable()) {
      set_error(std::string("solver did not reach a usable solution: ") +
                dpep::status_name(rep.solver.status) + ", " +
                rep.solver.message);
      return DPEP_ERR_SOLVER;
    }
    *bound = rep.value;
    return DPEP_OK;
  });
}

dpep_status dpep_scalar_oracle(const dpep_config* config, double lam,
                               double* value, double* argmax_lambda2) {
  if (auto s = require(config && value, "config and value must be non-NULL"))
    return s;
  double alpha = 0.0;
  if (auto s = concrete_alpha(config->cfg, &alpha)) return s;
  return guarded([&] {
    const auto req = dpep::request_from_config(config->cfg, lam, alpha);
    std::vector<double> grid;
    const int n = config->cfg.oracle_grid_points;
    for (int i = 0; i < n; ++i)
      grid.push_back(n == 1 ? lam : -lam + 2.0 * lam * i / (n - 1));
    const auto res = dpep::scalar_oracle(req, grid, config->cfg.solver);
    *value = res.value;
    if (argmax_lambda2) *argmax_lambda2 = res.argmax_lambda2;
    return DPEP_OK;
  });
}

}  // extern "C"
