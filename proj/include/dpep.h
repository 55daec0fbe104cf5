#ifndef DPEP_H
#define DPEP_H

/* C interface to the dpep library: worst-case performance bounds for
 * decentralized first-order methods via semidefinite programming.
 *
 * All entry points return a dpep_status; on any failure the thread-local
 * message from dpep_last_error() describes the problem. Objects returned
 * through out-parameters are owned by the caller and released with the
 * matching _free function. Strings returned through char** out-parameters
 * are released with dpep_string_free.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  DPEP_OK = 0,
  DPEP_ERR_ARGUMENT = 1, /* bad input: NULL handle, malformed config, ... */
  DPEP_ERR_SOLVER = 2,   /* the SDP solve did not reach a usable solution */
  DPEP_ERR_INTERNAL = 3  /* unexpected failure */
} dpep_status;

/* Experiment description parsed from JSON; see the README for the schema. */
typedef struct dpep_config dpep_config;

/* Rectangular string table with a header row. */
typedef struct dpep_table dpep_table;

const char* dpep_version(void);

/* Message for the most recent failure on this thread; never NULL. The
 * pointer stays valid until the next dpep_* call on the same thread. */
const char* dpep_last_error(void);

dpep_status dpep_config_parse(const char* json_text, dpep_config** out);
void dpep_config_free(dpep_config* config);

size_t dpep_table_rows(const dpep_table* table); /* data rows, header excluded */
size_t dpep_table_cols(const dpep_table* table);
const char* dpep_table_header(const dpep_table* table, size_t col);
const char* dpep_table_cell(const dpep_table* table, size_t row, size_t col);
dpep_status dpep_table_csv(const dpep_table* table, char** out);
void dpep_table_free(dpep_table* table);
void dpep_string_free(char* s);

/* One bound per lambda in the config's grid. Failed rows are recorded in
 * the table and *all_ok is set to 0; the call itself still succeeds. */
dpep_status dpep_run_sweep(const dpep_config* config, dpep_table** out,
                           int* all_ok);

/* Step-size search at one lambda: coarse log grid plus golden-section
 * refinement, as configured by the config's alpha_search block. */
dpep_status dpep_optimize_alpha(const dpep_config* config, double lam,
                                double* alpha_star, double* bound);

/* Solves every config over the shared lambda grid and merges the bounds
 * into one table with a column per config label. */
dpep_status dpep_compare(const dpep_config* const* configs, size_t count,
                         dpep_table** out, int* all_ok);

/* Verification suite: scalar-oracle soundness and explicit-instance
 * simulation soundness per lambda. *all_pass reports the aggregate. */
dpep_status dpep_verify(const dpep_config* config, dpep_table** out,
                        int* all_pass);

/* Single spectral bound at one lambda with the config's step size. */
dpep_status dpep_solve_bound(const dpep_config* config, double lam,
                             double* bound, char** solver_status);

/* Exact scalar-consensus oracle at one lambda: the maximum bound over a
 * grid of admissible lambda2 values (a lower bound on the spectral one). */
dpep_status dpep_scalar_oracle(const dpep_config* config, double lam,
                               double* value, double* argmax_lambda2);

#ifdef __cplusplus
}
#endif

#endif
