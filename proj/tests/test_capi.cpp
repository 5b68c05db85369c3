// Exercises the shared library through the C header only: config lifecycle,
// overrides, a fast command end to end, and the error paths.
#include <fibermc/fibermc.h>

#include <cstdio>
#include <cstring>
#include <string>

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      std::fprintf(stderr, "FAILED %s:%d: %s\n", __FILE__, __LINE__, \
                   #cond);                                            \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

int main() {
  EXPECT(fibermc_version() != nullptr);
  EXPECT(std::strlen(fibermc_version()) > 0);

  // Null-argument guards.
  EXPECT(fibermc_config_from_string(nullptr) == nullptr);
  EXPECT(fibermc_run(nullptr, "check-geometry") == nullptr);
  EXPECT(fibermc_last_error() != nullptr);

  // Bad config text is rejected with a message.
  fibermc_config* bad = fibermc_config_from_string("run.dt = -1\n");
  EXPECT(bad == nullptr);
  EXPECT(std::strlen(fibermc_last_error()) > 0);

  // Empty text gives the default config.
  fibermc_config* cfg = fibermc_config_from_string("");
  EXPECT(cfg != nullptr);
  if (!cfg) return 1;

  // Key overrides, valid and invalid.
  EXPECT(fibermc_config_set(cfg, "run.seed", "7") == 0);
  EXPECT(fibermc_config_set(cfg, "model.id", "\"so2-planar\"") == 0);
  EXPECT(fibermc_config_set(cfg, "run.dt", "-2.0") != 0);
  EXPECT(std::strlen(fibermc_last_error()) > 0);
  EXPECT(fibermc_config_set(cfg, "made.up", "1") != 0);
  EXPECT(fibermc_config_set(nullptr, "run.seed", "7") != 0);

  // A fast command end to end.
  fibermc_report* rep = fibermc_run(cfg, "check-geometry");
  EXPECT(rep != nullptr);
  if (rep) {
    EXPECT(fibermc_report_exit_code(rep) == 0);
    const char* verdict = fibermc_report_verdict(rep);
    EXPECT(verdict != nullptr && std::string(verdict) == "pass");
    const char* json = fibermc_report_json(rep);
    EXPECT(json != nullptr);
    EXPECT(std::string(json).find("\"command\"") != std::string::npos);
    EXPECT(std::string(json).find("check-geometry") != std::string::npos);
    const char* summary = fibermc_report_summary(rep);
    EXPECT(summary != nullptr && std::strlen(summary) > 0);
    const char* csv = fibermc_report_csv(rep);
    EXPECT(csv != nullptr && std::strlen(csv) > 0);
    EXPECT(fibermc_report_csv_name(rep) != nullptr);
    fibermc_report_free(rep);
  }

  // Unknown commands are a usage error, not a crash.
  fibermc_report* unk = fibermc_run(cfg, "no-such-command");
  EXPECT(unk != nullptr);
  if (unk) {
    EXPECT(fibermc_report_exit_code(unk) == 2);
    fibermc_report_free(unk);
  }

  // A config error surfaced at run time: su2 rejects the metric override.
  EXPECT(fibermc_config_set(cfg, "model.metric_v", "[[2.0,0.0],[0.0,1.0]]") ==
         0);
  EXPECT(fibermc_config_set(cfg, "model.id", "\"su2\"") == 0);
  fibermc_report* rej = fibermc_run(cfg, "check-geometry");
  EXPECT(rej != nullptr);
  if (rej) {
    EXPECT(fibermc_report_exit_code(rej) == 2);
    fibermc_report_free(rej);
  }

  fibermc_config_free(cfg);
  fibermc_config_free(nullptr);  // must be a no-op
  fibermc_report_free(nullptr);

  // File loading path.
  {
    const char* path = "/tmp/fibermc_capi_cfg.toml";
    std::FILE* f = std::fopen(path, "w");
    if (f) {
      std::fputs("[run]\nseed = 11\n", f);
      std::fclose(f);
    }
    fibermc_config* fc = fibermc_config_from_file(path);
    EXPECT(fc != nullptr);
    fibermc_config_free(fc);
    EXPECT(fibermc_config_from_file("/tmp/does-not-exist.toml") == nullptr);
  }

  if (failures == 0) std::puts("capi: all checks passed");
  return failures == 0 ? 0 : 1;
}
