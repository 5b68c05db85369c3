/* C interface to the reduced-path-integral toolkit. All handles are opaque;
 * strings returned from report accessors stay owned by the report and remain
 * valid until it is freed. fibermc_last_error() is thread local. */
#ifndef FIBERMC_H
#define FIBERMC_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct fibermc_config fibermc_config;
typedef struct fibermc_report fibermc_report;

/* Library version, e.g. "0.1.0". */
const char* fibermc_version(void);

/* Last error message on this thread; empty string when none. */
const char* fibermc_last_error(void);

/* Config with built-in defaults. Never fails. */
fibermc_config* fibermc_config_new(void);

/* Parse a TOML document. NULL on error (see fibermc_last_error). */
fibermc_config* fibermc_config_from_file(const char* path);
fibermc_config* fibermc_config_from_string(const char* text);

/* Apply one "section.key" override; value uses TOML literal syntax,
 * e.g. "2000", "0.1", "\"su2\"", "[1.0, 0.0]". Returns 0 on success,
 * 2 on a config error. */
int fibermc_config_set(fibermc_config* cfg, const char* key,
                       const char* value);

void fibermc_config_free(fibermc_config* cfg);

/* Run one command: check-geometry, girsanov, relation, generator-check or
 * simulate. Always returns a report unless cfg or command is NULL; the
 * outcome (including config errors) is in the report. */
fibermc_report* fibermc_run(const fibermc_config* cfg, const char* command);

/* 0 pass, 1 check failed, 2 config error, 3 statistically inconclusive. */
int fibermc_report_exit_code(const fibermc_report* rep);

/* "pass", "fail", "config-error" or "inconclusive". */
const char* fibermc_report_verdict(const fibermc_report* rep);

/* Full JSON report document. */
const char* fibermc_report_json(const fibermc_report* rep);

/* One-line human-readable result. */
const char* fibermc_report_summary(const fibermc_report* rep);

/* Tabular payload and its suggested file name; empty strings when the
 * command produces none. */
const char* fibermc_report_csv(const fibermc_report* rep);
const char* fibermc_report_csv_name(const fibermc_report* rep);

void fibermc_report_free(fibermc_report* rep);

#ifdef __cplusplus
}
#endif

#endif /* FIBERMC_H */
