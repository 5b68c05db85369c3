#include "core/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "core/toml_lite.hpp"

namespace fibermc {
namespace {

bool want_number(const std::string& key, const TomlValue& v, double& out,
                 std::string& err) {
  if (v.kind != TomlValue::Kind::Number) {
    err = key + ": expected a number";
    return false;
  }
  out = v.num;
  return true;
}

bool want_int(const std::string& key, const TomlValue& v, int64_t& out,
              std::string& err) {
  double d;
  if (!want_number(key, v, d, err)) return false;
  if (d != std::floor(d) || std::abs(d) > 9e15) {
    err = key + ": expected an integer";
    return false;
  }
  out = static_cast<int64_t>(d);
  return true;
}

bool want_string(const std::string& key, const TomlValue& v, std::string& out,
                 std::string& err) {
  if (v.kind != TomlValue::Kind::String) {
    err = key + ": expected a string";
    return false;
  }
  out = v.str;
  return true;
}

bool want_number_list(const std::string& key, const TomlValue& v,
                      std::vector<double>& out, std::string& err) {
  if (v.kind != TomlValue::Kind::Array) {
    err = key + ": expected an array of numbers";
    return false;
  }
  out.clear();
  for (const TomlValue& e : v.array) {
    if (e.kind != TomlValue::Kind::Number) {
      err = key + ": expected an array of numbers";
      return false;
    }
    out.push_back(e.num);
  }
  return true;
}

bool want_matrix(const std::string& key, const TomlValue& v, Mat& out,
                 std::string& err) {
  if (v.kind != TomlValue::Kind::Array || v.array.empty()) {
    err = key + ": expected an array of rows";
    return false;
  }
  size_t cols = v.array[0].array.size();
  if (cols == 0 || v.array.size() > kMaxDim || cols > kMaxDim) {
    err = key + ": bad matrix shape";
    return false;
  }
  out.resize(static_cast<int>(v.array.size()), static_cast<int>(cols));
  for (size_t r = 0; r < v.array.size(); ++r) {
    const TomlValue& row = v.array[r];
    if (row.kind != TomlValue::Kind::Array || row.array.size() != cols) {
      err = key + ": rows must be equal-length number arrays";
      return false;
    }
    for (size_t c = 0; c < cols; ++c) {
      if (row.array[c].kind != TomlValue::Kind::Number) {
        err = key + ": rows must be equal-length number arrays";
        return false;
      }
      out(static_cast<int>(r), static_cast<int>(c)) = row.array[c].num;
    }
  }
  return true;
}

bool apply_one(RunConfig& cfg, const std::string& key, const TomlValue& v,
               std::string& err) {
  double d;
  int64_t n;
  if (key == "schema") {
    if (!want_int(key, v, n, err)) return false;
    cfg.schema = static_cast<int>(n);
    return true;
  }
  if (key == "model.id") return want_string(key, v, cfg.model_id, err);
  if (key == "model.potential_c") {
    if (!want_number(key, v, cfg.potential_c, err)) return false;
    return true;
  }
  if (key == "model.irreps") {
    if (v.kind != TomlValue::Kind::Array) {
      err = key + ": expected an array of labels";
      return false;
    }
    cfg.irrep_labels.clear();
    for (const TomlValue& e : v.array) {
      if (e.kind == TomlValue::Kind::String) {
        cfg.irrep_labels.push_back(e.str);
      } else if (e.kind == TomlValue::Kind::Number) {
        std::ostringstream os;
        os << e.num;
        cfg.irrep_labels.push_back(os.str());
      } else {
        err = key + ": labels must be strings or numbers";
        return false;
      }
    }
    return true;
  }
  if (key == "model.metric_v") {
    if (!want_matrix(key, v, cfg.metric_v, err)) return false;
    cfg.has_metric_v = true;
    return true;
  }
  if (key == "model.x_min") return want_number(key, v, cfg.x_min, err);
  if (key == "model.radius_max")
    return want_number(key, v, cfg.radius_max, err);

  if (key == "run.mu") return want_number(key, v, cfg.params.mu, err);
  if (key == "run.kappa") return want_number(key, v, cfg.params.kappa, err);
  if (key == "run.mass") return want_number(key, v, cfg.params.mass, err);
  if (key == "run.t_a") return want_number(key, v, cfg.params.t_a, err);
  if (key == "run.t_b") return want_number(key, v, cfg.params.t_b, err);
  if (key == "run.dt") return want_number(key, v, cfg.params.dt, err);
  if (key == "run.n_paths") {
    if (!want_int(key, v, cfg.params.n_paths, err)) return false;
    return true;
  }
  if (key == "run.seed") {
    if (!want_int(key, v, n, err)) return false;
    cfg.params.seed = static_cast<uint64_t>(n);
    return true;
  }
  if (key == "run.workers") {
    if (!want_int(key, v, n, err)) return false;
    cfg.params.workers = static_cast<int>(n);
    return true;
  }

  if (key == "start.x") return want_number_list(key, v, cfg.start_x, err);
  if (key == "start.f") return want_number_list(key, v, cfg.start_f, err);

  if (key == "test_function.center_x")
    return want_number_list(key, v, cfg.phi_center_x, err);
  if (key == "test_function.center_f")
    return want_number_list(key, v, cfg.phi_center_f, err);
  if (key == "test_function.width")
    return want_number(key, v, cfg.phi_width, err);

  if (key == "generator.dt") return want_number(key, v, cfg.generator_dt, err);
  if (key == "generator.nodes") {
    if (!want_int(key, v, n, err)) return false;
    cfg.generator_nodes = static_cast<int>(n);
    return true;
  }

  if (key == "simulate.process")
    return want_string(key, v, cfg.sim_process, err);
  if (key == "simulate.paths") {
    if (!want_int(key, v, cfg.sim_paths, err)) return false;
    return true;
  }

  if (key == "output.dir") return want_string(key, v, cfg.out_dir, err);

  (void)d;
  err = key + ": unknown key";
  return false;
}

}  // namespace

bool config_validate(const RunConfig& cfg, std::string& err) {
  if (cfg.schema != 1) {
    err = "schema: unsupported value " + std::to_string(cfg.schema);
    return false;
  }
  if (cfg.params.mu <= 0 || cfg.params.kappa <= 0 || cfg.params.mass <= 0) {
    err = "run.mu/kappa/mass: must be positive";
    return false;
  }
  if (cfg.params.dt <= 0) {
    err = "run.dt: must be positive";
    return false;
  }
  if (cfg.params.t_b <= cfg.params.t_a) {
    err = "run.t_b: must exceed run.t_a";
    return false;
  }
  if (cfg.params.n_paths < 1) {
    err = "run.n_paths: must be at least 1";
    return false;
  }
  if (cfg.params.workers < 1) {
    err = "run.workers: must be at least 1";
    return false;
  }
  if (cfg.phi_width <= 0) {
    err = "test_function.width: must be positive";
    return false;
  }
  if (cfg.generator_dt <= 0) {
    err = "generator.dt: must be positive";
    return false;
  }
  if (cfg.generator_nodes < 2 || cfg.generator_nodes > 64) {
    err = "generator.nodes: must be in [2, 64]";
    return false;
  }
  if (cfg.sim_process != "total" && cfg.sim_process != "projected" &&
      cfg.sim_process != "intrinsic") {
    err = "simulate.process: must be total, projected or intrinsic";
    return false;
  }
  if (cfg.sim_paths < 1) {
    err = "simulate.paths: must be at least 1";
    return false;
  }
  return true;
}

bool config_from_string(const std::string& text, RunConfig& cfg,
                        std::string& err) {
  TomlTable table;
  if (!toml_parse(text, table, err)) return false;
  for (const auto& [key, value] : table) {
    if (!apply_one(cfg, key, value, err)) return false;
  }
  if (cfg.out_dir.empty()) {
    if (const char* env = std::getenv("FIBERMC_OUT_DIR")) cfg.out_dir = env;
  }
  return config_validate(cfg, err);
}

bool config_from_file(const std::string& path, RunConfig& cfg,
                      std::string& err) {
  std::ifstream in(path);
  if (!in) {
    err = "cannot open config file: " + path;
    return false;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_string(ss.str(), cfg, err);
}

bool config_set(RunConfig& cfg, const std::string& dotted_key,
                const std::string& value, std::string& err) {
  TomlTable table;
  if (!toml_parse("v = " + value, table, err)) return false;
  RunConfig tmp = cfg;  // commit only a change that still validates
  if (!apply_one(tmp, dotted_key, table.at("v"), err)) return false;
  if (!config_validate(tmp, err)) return false;
  cfg = std::move(tmp);
  return true;
}

bool config_materialize(const RunConfig& cfg, Materialized& out,
                        std::string& err) {
  try {
    out.model = make_model(cfg.model_id, cfg.potential_c,
                           cfg.has_metric_v ? &cfg.metric_v : nullptr,
                           cfg.irrep_labels);
  } catch (const std::exception& e) {
    err = std::string("model: ") + e.what();
    return false;
  }
  ModelSpec& m = out.model;
  if (cfg.x_min > 0) m.guard.x_min = cfg.x_min;
  if (cfg.radius_max > 0) m.guard.radius_max = cfg.radius_max;

  auto fill = [&err](const std::vector<double>& src, int want, double head,
                     const char* key, Vec& dst) {
    if (src.empty()) {
      dst = Vec::Zero(want);
      if (want > 0) dst[0] = head;
      return true;
    }
    if (static_cast<int>(src.size()) != want) {
      err = std::string(key) + ": expected " + std::to_string(want) +
            " components";
      return false;
    }
    dst.resize(want);
    for (int i = 0; i < want; ++i) dst[i] = src[static_cast<size_t>(i)];
    return true;
  };
  if (!fill(cfg.start_x, m.n_m, 1.0, "start.x", out.start_x)) return false;
  if (!fill(cfg.start_f, m.n_v, 1.0, "start.f", out.start_f)) return false;

  out.phi.width = cfg.phi_width;
  if (!fill(cfg.phi_center_x.empty() ? cfg.start_x : cfg.phi_center_x, m.n_m,
            1.0, "test_function.center_x", out.phi.cx_t))
    return false;
  if (!fill(cfg.phi_center_f.empty() ? cfg.start_f : cfg.phi_center_f, m.n_v,
            1.0, "test_function.center_f", out.phi.cf_t))
    return false;

  out.irreps.clear();
  for (const Irrep& ir : m.irreps) out.irreps.push_back(&ir);
  return true;
}

}  // namespace fibermc
