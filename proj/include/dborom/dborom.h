#ifndef DBOROM_DBOROM_H
#define DBOROM_DBOROM_H

/* C interface to the low-rank transport solver. All entry points return a
 * dbo_status; on failure a human-readable message is copied (truncated, always
 * NUL-terminated) into the caller's err buffer when one is supplied. Handles
 * are opaque and single-threaded: share them across threads only with external
 * locking. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dbo_status {
  DBO_OK = 0,
  DBO_ERR_USAGE = 1,   /* bad arguments at the API boundary */
  DBO_ERR_CONFIG = 2,  /* configuration rejected */
  DBO_ERR_RUNTIME = 3  /* I/O or numerical failure while running */
} dbo_status;

enum {
  DBO_SNAPSHOT_LOW_RANK = 0,
  DBO_SNAPSHOT_FULL_ORDER = 1
};

typedef struct dbo_config dbo_config;
typedef struct dbo_snapshot dbo_snapshot;

/* Library version, "major.minor.patch". */
const char* dbo_version(void);

/* Worker threads for the species source loop; n <= 0 resets to the
 * DBO_ROM_THREADS environment variable (default 1). Results are identical
 * for every thread count. */
dbo_status dbo_set_threads(int n, char* err, size_t err_len);

/* --- configuration ------------------------------------------------------ */

/* Benchmark defaults; never fails given a valid out pointer. */
dbo_status dbo_config_default(dbo_config** out, char* err, size_t err_len);

/* Parse + validate a config file or an in-memory config text. */
dbo_status dbo_config_load(const char* path, dbo_config** out, char* err, size_t err_len);
dbo_status dbo_config_parse(const char* text, dbo_config** out, char* err, size_t err_len);

/* Single-key override, e.g. dbo_config_set(cfg, "species.ic_seed", "7").
 * Values use the file grammar. Overrides are not cross-checked until
 * dbo_config_validate or a run. */
dbo_status dbo_config_set(dbo_config* cfg, const char* dotted_key, const char* value, char* err,
                          size_t err_len);
dbo_status dbo_config_validate(const dbo_config* cfg, char* err, size_t err_len);

/* Canonical text of the resolved configuration. Two-call pattern: pass
 * buf = NULL to receive the required size (including the terminating NUL)
 * in *len, then call again with a buffer at least that large. */
dbo_status dbo_config_describe(const dbo_config* cfg, char* buf, size_t* len, char* err,
                               size_t err_len);

void dbo_config_free(dbo_config* cfg);

/* --- runs ---------------------------------------------------------------- */

/* Advance the factored (low-rank) or full-order system per the config and
 * write snapshots plus diagnostics into the configured output directory.
 * Nonzero quiet suppresses progress logging on stderr. */
dbo_status dbo_run_low_rank(const dbo_config* cfg, int quiet, char* err, size_t err_len);
dbo_status dbo_run_full_order(const dbo_config* cfg, int quiet, char* err, size_t err_len);

/* Match snapshot times of a factored run against a full-order run and write
 * compare_error.csv / compare_spectra.csv into out_dir. */
dbo_status dbo_compare_runs(const char* dbo_dir, const char* fom_dir, const char* out_dir,
                            int quiet, char* err, size_t err_len);

/* Plain-text figure data: species profiles, error vs time, singular values
 * for the reference run and each factored run. */
dbo_status dbo_export_figures(const char* fom_dir, const char* const* run_dirs, size_t n_runs,
                              const char* out_dir, int quiet, char* err, size_t err_len);

/* --- snapshot files ------------------------------------------------------ */

dbo_status dbo_snapshot_open(const char* path, dbo_snapshot** out, char* err, size_t err_len);

/* kind: one of the DBO_SNAPSHOT_* constants. */
dbo_status dbo_snapshot_kind(const dbo_snapshot* snap, int* kind);
dbo_status dbo_snapshot_count(const dbo_snapshot* snap, size_t* count);

/* Record metadata. rank is 0 for full-order records. Null output pointers
 * are skipped. */
dbo_status dbo_snapshot_info(const dbo_snapshot* snap, size_t index, double* t, uint64_t* n_grid,
                             uint64_t* rank, uint64_t* n_species, char* err, size_t err_len);

/* Species columns of record `index`, written column-major into out
 * (n_grid rows by n_species columns). species holds 0-based indices;
 * species = NULL selects every species in the record. out_len is the
 * capacity of out in doubles. */
dbo_status dbo_snapshot_reconstruct(dbo_snapshot* snap, size_t index, const int* species,
                                    size_t n_species, double* out, size_t out_len, char* err,
                                    size_t err_len);

void dbo_snapshot_free(dbo_snapshot* snap);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DBOROM_DBOROM_H */
