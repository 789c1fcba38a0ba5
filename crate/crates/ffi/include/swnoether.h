#ifndef SWNOETHER_H
#define SWNOETHER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes shared by every function.
typedef enum SwStatus {
  SW_STATUS_OK = 0,
  // A checked verification did not hold.
  SW_STATUS_VERIFICATION_FAILED = 1,
  // Invalid configuration or argument.
  SW_STATUS_CONFIG_ERROR = 2,
  // Newton failure, singular Jacobian or folded element.
  SW_STATUS_SOLVER_ERROR = 3,
  SW_STATUS_NULL_POINTER = 4,
  SW_STATUS_INVALID_UTF8 = 5,
  SW_STATUS_IO_ERROR = 6,
  SW_STATUS_NOT_FOUND = 7,
  SW_STATUS_PANIC = 8,
} SwStatus;

// Subcommands for [`sw_execute`].
typedef enum SwCommand {
  SW_COMMAND_DERIVE = 0,
  SW_COMMAND_CHECK = 1,
  SW_COMMAND_RUN = 2,
  SW_COMMAND_CONVERGE = 3,
} SwCommand;

// Opaque configuration handle.
typedef struct SwConfig SwConfig;

// Opaque handle to a finished run.
typedef struct SwRun SwRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library from the same thread.
const char *sw_last_error_message(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be null or a pointer returned by this library and not yet freed.
void sw_string_free(char *s);

// Library version as a static string.
const char *sw_version(void);

// New configuration with every default.
struct SwConfig *sw_config_default(void);

// Parses TOML text into `*out`. Relative paths resolve against the
// working directory.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a writable pointer.
enum SwStatus sw_config_from_toml(const char *toml, struct SwConfig **out);

// Loads a TOML file into `*out`; relative paths inside resolve against
// the file's directory.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum SwStatus sw_config_load(const char *path, struct SwConfig **out);

// Effective configuration as TOML; free with [`sw_string_free`]. Null on a
// null handle.
//
// # Safety
// `config` must be null or a live handle.
char *sw_config_to_toml(const struct SwConfig *config);

// Sets the output directory of `run` and `converge`.
//
// # Safety
// `config` must be a live handle and `dir` a NUL-terminated string.
enum SwStatus sw_config_set_output_dir(struct SwConfig *config, const char *dir);

// Sets the mesh perturbation seed.
//
// # Safety
// `config` must be a live handle.
enum SwStatus sw_config_set_seed(struct SwConfig *config, uint64_t seed);

// Checks ranges and referenced files.
//
// # Safety
// `config` must be a live handle.
enum SwStatus sw_config_validate(const struct SwConfig *config);

// # Safety
// `config` must be null or a handle not yet freed.
void sw_config_free(struct SwConfig *config);

// Runs a subcommand. The text report goes to `*report` when `report` is
// not null (free with [`sw_string_free`]). Returns `Ok`,
// `VerificationFailed`, `ConfigError` or `SolverError` like the CLI exit
// codes.
//
// # Safety
// `config` must be a live handle; `report` null or writable.
enum SwStatus sw_execute(const struct SwConfig *config, enum SwCommand command, char **report);

// Marches every slab without writing files and stores the result in `*out`.
//
// # Safety
// `config` must be a live handle and `out` a writable pointer.
enum SwStatus sw_run(const struct SwConfig *config, struct SwRun **out);

// Number of time knots, slab ends included; 0 on a null handle.
//
// # Safety
// `run` must be null or a live handle.
size_t sw_run_num_knots(const struct SwRun *run);

// Number of tracked quantities; 0 on a null handle.
//
// # Safety
// `run` must be null or a live handle.
size_t sw_run_num_quantities(const struct SwRun *run);

// Name of quantity `i`, e.g. `energy` or `pv:hat(40)`; free with
// [`sw_string_free`]. Null when out of range.
//
// # Safety
// `run` must be null or a live handle.
char *sw_run_quantity_name(const struct SwRun *run, size_t i);

// Writes `∫ A^t` of `quantity` at `knot` to `*value`.
//
// # Safety
// `run` must be a live handle, `quantity` a NUL-terminated string and
// `value` writable.
enum SwStatus sw_run_conserved(const struct SwRun *run,
                               const char *quantity,
                               size_t knot,
                               double *value);

// Writes `max_k |Q_k - Q_0|` of `quantity` to `*value`.
//
// # Safety
// `run` must be a live handle, `quantity` a NUL-terminated string and
// `value` writable.
enum SwStatus sw_run_drift(const struct SwRun *run, const char *quantity, double *value);

// Largest identity sum relative to its terms over every row; NaN on a
// null handle.
//
// # Safety
// `run` must be null or a live handle.
double sw_run_worst_identity_sum(const struct SwRun *run);

// Total Newton iterations over all slabs; -1 on a null handle.
//
// # Safety
// `run` must be null or a live handle.
int sw_run_newton_iterations(const struct SwRun *run);

// Writes the Noether residual report as CSV.
//
// # Safety
// `run` must be a live handle and `path` a NUL-terminated string.
enum SwStatus sw_run_write_report(const struct SwRun *run, const char *path);

// # Safety
// `run` must be null or a handle not yet freed.
void sw_run_free(struct SwRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWNOETHER_H */
