#include "core/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fibermc {

const char* version_string() { return "0.1.0"; }

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_row(const std::vector<double>& vals) {
  std::string out;
  for (size_t i = 0; i < vals.size(); ++i) {
    if (i) out += ',';
    out += fmt_g17(vals[i]);
  }
  return out;
}

namespace {

Json vec_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json mat_json(const Mat& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json cmat_json(const CMat& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) {
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

Json config_json(const RunConfig& cfg) {
  Json j;
  j["schema"] = cfg.schema;
  j["model"]["id"] = cfg.model_id;
  j["model"]["potential_c"] = cfg.potential_c;
  if (!cfg.irrep_labels.empty()) j["model"]["irreps"] = cfg.irrep_labels;
  if (cfg.has_metric_v) j["model"]["metric_v"] = mat_json(cfg.metric_v);
  j["run"]["mu"] = cfg.params.mu;
  j["run"]["kappa"] = cfg.params.kappa;
  j["run"]["mass"] = cfg.params.mass;
  j["run"]["t_a"] = cfg.params.t_a;
  j["run"]["t_b"] = cfg.params.t_b;
  j["run"]["dt"] = cfg.params.dt;
  j["run"]["n_paths"] = cfg.params.n_paths;
  j["run"]["seed"] = cfg.params.seed;
  j["run"]["workers"] = cfg.params.workers;
  if (!cfg.start_x.empty()) j["start"]["x"] = vec_json(cfg.start_x);
  if (!cfg.start_f.empty()) j["start"]["f"] = vec_json(cfg.start_f);
  j["test_function"]["width"] = cfg.phi_width;
  if (!cfg.phi_center_x.empty())
    j["test_function"]["center_x"] = vec_json(cfg.phi_center_x);
  if (!cfg.phi_center_f.empty())
    j["test_function"]["center_f"] = vec_json(cfg.phi_center_f);
  j["generator"]["dt"] = cfg.generator_dt;
  j["generator"]["nodes"] = cfg.generator_nodes;
  return j;
}

Json estimate_json(const GreenEstimate& e) {
  Json j;
  j["value"] = cmat_json(e.value);
  j["stderr_re"] = mat_json(e.se_re);
  j["stderr_im"] = mat_json(e.se_im);
  j["n_alive"] = e.n_alive;
  j["n_dead"] = e.n_dead;
  double total = static_cast<double>(e.n_alive + e.n_dead);
  j["exit_fraction"] = total > 0 ? static_cast<double>(e.n_dead) / total : 0.0;
  j["flagged_exits"] =
      total > 0 && static_cast<double>(e.n_dead) > 0.01 * total;
  j["elapsed_s"] = e.elapsed_s;
  return j;
}

Json comparison_json(const Comparison& c) {
  Json j;
  j["z_max"] = c.z_max;
  j["max_abs_diff"] = c.max_abs_diff;
  j["dominant_mag"] = c.dominant_mag;
  j["dominant_se"] = c.dominant_se;
  j["power_ok"] = c.power_ok;
  return j;
}

Json generator_json(const GeneratorCheck& c) {
  Json j;
  j["a_coarse"] = cmat_json(c.a_coarse);
  j["a_fine"] = cmat_json(c.a_fine);
  j["richardson"] = cmat_json(c.richardson);
  j["target"] = cmat_json(c.target);
  j["rel_err_coarse"] = c.rel_err_coarse;
  j["rel_err_fine"] = c.rel_err_fine;
  j["rel_err_richardson"] = c.rel_err_richardson;
  j["err_ratio"] = c.err_ratio;
  j["nodes_per_dim"] = c.nodes_per_dim;
  j["nodes_total"] = c.nodes_total;
  return j;
}

bool write_text_file(const std::string& path, const std::string& text,
                     std::string& err) {
  std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) {
      err = "cannot create directory " + p.parent_path().string() + ": " +
            ec.message();
      return false;
    }
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) {
    err = "cannot open " + path + " for writing";
    return false;
  }
  out << text;
  out.close();
  if (!out) {
    err = "write failed: " + path;
    return false;
  }
  return true;
}

}  // namespace fibermc
