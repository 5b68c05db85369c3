#include "fibermc/fibermc.h"

#include <string>

#include "core/report.hpp"
#include "core/runner.hpp"

struct fibermc_config {
  fibermc::RunConfig cfg;
};

struct fibermc_report {
  fibermc::RunOutcome out;
};

namespace {
thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }
}  // namespace

extern "C" {

const char* fibermc_version(void) { return fibermc::version_string(); }

const char* fibermc_last_error(void) { return g_last_error.c_str(); }

fibermc_config* fibermc_config_new(void) {
  set_error("");
  return new fibermc_config{};
}

fibermc_config* fibermc_config_from_file(const char* path) {
  if (path == nullptr) {
    set_error("path is null");
    return nullptr;
  }
  auto* h = new fibermc_config{};
  std::string err;
  if (!fibermc::config_from_file(path, h->cfg, err)) {
    set_error(err);
    delete h;
    return nullptr;
  }
  set_error("");
  return h;
}

fibermc_config* fibermc_config_from_string(const char* text) {
  if (text == nullptr) {
    set_error("text is null");
    return nullptr;
  }
  auto* h = new fibermc_config{};
  std::string err;
  if (!fibermc::config_from_string(text, h->cfg, err)) {
    set_error(err);
    delete h;
    return nullptr;
  }
  set_error("");
  return h;
}

int fibermc_config_set(fibermc_config* cfg, const char* key,
                       const char* value) {
  if (cfg == nullptr || key == nullptr || value == nullptr) {
    set_error("null argument");
    return 2;
  }
  std::string err;
  if (!fibermc::config_set(cfg->cfg, key, value, err)) {
    set_error(err);
    return 2;
  }
  set_error("");
  return 0;
}

void fibermc_config_free(fibermc_config* cfg) { delete cfg; }

fibermc_report* fibermc_run(const fibermc_config* cfg, const char* command) {
  if (cfg == nullptr || command == nullptr) {
    set_error("null argument");
    return nullptr;
  }
  auto* rep = new fibermc_report{};
  try {
    rep->out = fibermc::run_command(cfg->cfg, command);
  } catch (const std::exception& e) {
    rep->out.exit_code = 2;
    rep->out.verdict = "config-error";
    rep->out.summary = e.what();
    rep->out.json = "{}\n";
  }
  if (rep->out.exit_code != 0) set_error(rep->out.summary);
  else set_error("");
  return rep;
}

int fibermc_report_exit_code(const fibermc_report* rep) {
  return rep != nullptr ? rep->out.exit_code : 2;
}

const char* fibermc_report_verdict(const fibermc_report* rep) {
  return rep != nullptr ? rep->out.verdict.c_str() : "";
}

const char* fibermc_report_json(const fibermc_report* rep) {
  return rep != nullptr ? rep->out.json.c_str() : "";
}

const char* fibermc_report_summary(const fibermc_report* rep) {
  return rep != nullptr ? rep->out.summary.c_str() : "";
}

const char* fibermc_report_csv(const fibermc_report* rep) {
  return rep != nullptr ? rep->out.csv.c_str() : "";
}

const char* fibermc_report_csv_name(const fibermc_report* rep) {
  return rep != nullptr ? rep->out.csv_name.c_str() : "";
}

void fibermc_report_free(fibermc_report* rep) { delete rep; }

}  // extern "C"
