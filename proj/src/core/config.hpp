#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/greens.hpp"
#include "core/model.hpp"
#include "core/sde.hpp"

namespace fibermc {

// A fully resolved run description. Loaded from the TOML schema below,
// overridable key by key; materialize() turns it into a model instance.
//
//   schema = 1
//   [model]   id, potential_c, irreps, metric_v, x_min, radius_max
//   [run]     mu, kappa, mass, t_a, t_b, dt, n_paths, seed, workers
//   [start]   x, f
//   [test_function] center_x, center_f, width
//   [generator]     dt, nodes
//   [simulate]      process, paths
//   [output]  dir
struct RunConfig {
  int schema = 1;
  std::string model_id = "so2-planar";
  double potential_c = 0.0;
  std::vector<std::string> irrep_labels;  // empty -> model default set
  bool has_metric_v = false;
  Mat metric_v;
  double x_min = -1.0;       // negative -> model default
  double radius_max = -1.0;  // negative -> model default

  RunParams params;
  std::vector<double> start_x, start_f;  // empty -> canonical start
  std::vector<double> phi_center_x, phi_center_f;
  double phi_width = 0.70710678118654752;

  double generator_dt = 1e-3;
  int generator_nodes = 16;

  std::string sim_process = "intrinsic";  // total | projected | intrinsic
  int64_t sim_paths = 3;

  std::string out_dir;  // empty -> no files written
};

bool config_from_string(const std::string& text, RunConfig& cfg,
                        std::string& err);
bool config_from_file(const std::string& path, RunConfig& cfg,
                      std::string& err);

// Applies one "section.key = <raw toml value>" override.
bool config_set(RunConfig& cfg, const std::string& dotted_key,
                const std::string& value, std::string& err);

// Final shape checks that need no model instance.
bool config_validate(const RunConfig& cfg, std::string& err);

// Resolved state the commands run on.
struct Materialized {
  ModelSpec model;
  Vec start_x, start_f;
  TestFunction phi;
  std::vector<const Irrep*> irreps;
};

// Builds the model and resolves starts, irrep pointers and test-function
// centers (defaults: x = 1, f = (1, 0, ...), centers at the start).
bool config_materialize(const RunConfig& cfg, Materialized& out,
                        std::string& err);

}  // namespace fibermc
