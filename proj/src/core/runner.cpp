#include "core/runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "core/holonomy.hpp"
#include "core/report.hpp"

namespace fibermc {
namespace {

RunOutcome finish(const RunConfig& cfg, const std::string& command, Json j,
                  int exit_code, const std::string& verdict,
                  const std::string& summary, std::string csv = "",
                  std::string csv_name = "") {
  RunOutcome out;
  out.exit_code = exit_code;
  out.verdict = verdict;
  out.summary = summary;
  out.csv = std::move(csv);
  out.csv_name = std::move(csv_name);
  j["verdict"] = verdict;
  j["summary"] = summary;
  out.json = j.dump(2) + "\n";
  if (!cfg.out_dir.empty()) {
    std::string err;
    if (!write_text_file(cfg.out_dir + "/" + command + ".json", out.json,
                         err)) {
      out.exit_code = 2;
      out.verdict = "config-error";
      out.summary = err;
      return out;
    }
    if (!out.csv.empty() &&
        !write_text_file(cfg.out_dir + "/" + out.csv_name, out.csv, err)) {
      out.exit_code = 2;
      out.verdict = "config-error";
      out.summary = err;
    }
  }
  return out;
}

Json base_json(const RunConfig& cfg, const std::string& command) {
  Json j;
  j["command"] = command;
  j["version"] = version_string();
  j["config"] = config_json(cfg);
  return j;
}

double vec_diff(const Vec& a, const Vec& b) {
  return (a - b).lpNorm<Eigen::Infinity>();
}

// Max-norm distance between two frames across every field.
double frame_diff(const Frame& a, const Frame& b) {
  double r = 0.0;
  auto mx = [&](const Mat& u, const Mat& v) {
    r = std::max(r, max_abs(Mat(u - v)));
  };
  auto vx = [&](const Vec& u, const Vec& v) { r = std::max(r, vec_diff(u, v)); };
  auto sx = [&](double u, double v) { r = std::max(r, std::abs(u - v)); };
  vx(a.qs, b.qs);
  vx(a.gv_ft, b.gv_ft);
  mx(a.kp, b.kp);
  mx(a.kv, b.kv);
  mx(a.inertia_p, b.inertia_p);
  mx(a.inertia_v, b.inertia_v);
  mx(a.inertia, b.inertia);
  mx(a.inertia_p_inv, b.inertia_p_inv);
  mx(a.inertia_inv, b.inertia_inv);
  sx(a.detd, b.detd);
  mx(a.conn, b.conn);
  mx(a.conn_v, b.conn_v);
  mx(a.conn_p, b.conn_p);
  mx(a.gauge_phi, b.gauge_phi);
  mx(a.gauge_lam, b.gauge_lam);
  mx(a.lam_sq, b.lam_sq);
  sx(a.gauge_det, b.gauge_det);
  mx(a.ht_low, b.ht_low);
  mx(a.h_low, b.h_low);
  mx(a.h_up, b.h_up);
  mx(a.w_va, b.w_va);
  mx(a.quad_xv, b.quad_xv);
  mx(a.quad_vv, b.quad_vv);
  mx(a.noise_vv, b.noise_vv);
  mx(a.xx, b.xx);
  mx(a.xv, b.xv);
  mx(a.xvx, b.xvx);
  sx(a.hdet, b.hdet);
  sx(a.sigma, b.sigma);
  vx(a.sig_x, b.sig_x);
  vx(a.sig_f, b.sig_f);
  return r;
}

RunOutcome cmd_check_geometry(const RunConfig& cfg, const Materialized& mt) {
  const ModelSpec& m = mt.model;
  Geometry g(m);

  // Twin with every closed form stripped, so the generic code paths
  // cross-check the fast ones at the same points.
  ModelSpec plain = m;
  plain.frame_closed = nullptr;
  plain.analytic_derivs = nullptr;
  plain.sigma_grad = nullptr;
  Geometry gp(plain);
  const bool has_closed = static_cast<bool>(m.frame_closed);

  std::vector<std::string> issues = model_self_check(m, 25, cfg.params.seed);

  const int n_points = 200;
  double r_inv = 0.0, r_det = 0.0, r_id1 = 0.0, r_id2 = 0.0;
  double r_sig = 0.0, r_round = 0.0, r_frame = 0.0;
  std::mt19937_64 rng(cfg.params.seed);
  Vec x, ft, th;
  const double h = 1e-5;
  for (int k = 0; k < n_points; ++k) {
    random_adapted_point(m, rng, x, ft, th);

    Mat gm = g.adapted_metric(x, ft, th);
    Mat gi = g.adapted_metric_inverse(x, ft, th);
    int n = static_cast<int>(gm.rows());
    r_inv = std::max(r_inv, max_abs(Mat(gm * gi - Mat::Identity(n, n))));

    Geometry::DetFact df = g.det_factorization(x, ft, th);
    double prod = df.det_d * df.det_ubar * df.det_ubar * df.hdet;
    r_det = std::max(r_det,
                     std::abs(df.det_full - prod) / std::abs(df.det_full));

    Frame fr = g.frame(x, ft);
    Mat id1 = fr.inertia_inv * fr.inertia_v * fr.inertia_p_inv +
              fr.inertia_inv - fr.inertia_p_inv;
    r_id1 = std::max(r_id1, max_abs(id1));
    Mat id2 = fr.lam_sq - (fr.inertia_p_inv +
                           fr.conn_p * fr.h_up * fr.conn_p.transpose());
    r_id2 = std::max(r_id2, max_abs(id2));

    // Gradient of ln det(inertia) against central differences.
    double gnorm = std::max(
        {1.0, fr.sig_x.lpNorm<Eigen::Infinity>(),
         fr.sig_f.lpNorm<Eigen::Infinity>()});
    for (int i = 0; i < m.n_m; ++i) {
      Vec xp = x, xm = x;
      double hi = h * std::max(1.0, std::abs(x[i]));
      xp[i] += hi;
      xm[i] -= hi;
      double fd = (g.sigma_at(xp, ft) - g.sigma_at(xm, ft)) / (2.0 * hi);
      r_sig = std::max(r_sig, std::abs(fd - fr.sig_x[i]) / gnorm);
    }
    for (int i = 0; i < m.n_v; ++i) {
      Vec fp = ft, fm = ft;
      double hi = h * std::max(1.0, std::abs(ft[i]));
      fp[i] += hi;
      fm[i] -= hi;
      double fd = (g.sigma_at(x, fp) - g.sigma_at(x, fm)) / (2.0 * hi);
      r_sig = std::max(r_sig, std::abs(fd - fr.sig_f[i]) / gnorm);
    }

    Vec q, f, x2, f2, t2;
    g.from_adapted(x, ft, th, q, f);
    if (!g.to_adapted(q, f, x2, f2, t2)) {
      r_round = std::numeric_limits<double>::infinity();
    } else {
      r_round = std::max({r_round, vec_diff(x, x2), vec_diff(ft, f2),
                          vec_diff(th, t2)});
    }

    if (has_closed) r_frame = std::max(r_frame, frame_diff(fr, gp.frame(x, ft)));
  }

  struct Row {
    const char* name;
    double val;
    double tol;
    bool enabled;
  };
  Row rows[] = {
      {"metric_inverse_identity", r_inv, 1e-9, true},
      {"det_factorization_rel", r_det, 1e-8, true},
      {"orbit_inertia_identity", r_id1, 1e-10, true},
      {"gauge_square_identity", r_id2, 1e-9, true},
      {"sigma_gradient_fd_rel", r_sig, 1e-6, true},
      {"chart_round_trip", r_round, 1e-8, true},
      {"closed_frame_vs_generic", r_frame, 1e-7, has_closed},
  };

  Json j = base_json(cfg, "check-geometry");
  j["model_self_check"] = issues;
  j["points"] = n_points;
  Json checks = Json::array();
  bool pass = issues.empty();
  for (const Row& r : rows) {
    if (!r.enabled) continue;
    bool ok = r.val < r.tol;
    pass = pass && ok;
    checks.push_back(Json{{"name", r.name},
                          {"max_residual", r.val},
                          {"tol", r.tol},
                          {"pass", ok}});
  }
  j["checks"] = checks;

  std::ostringstream csv;
  csv << "check,max_residual,tol,pass\n";
  for (const Row& r : rows) {
    if (!r.enabled) continue;
    csv << r.name << "," << fmt_g17(r.val) << "," << fmt_g17(r.tol) << ","
        << (r.val < r.tol ? 1 : 0) << "\n";
  }

  std::ostringstream ss;
  ss << "check-geometry " << m.id << ": " << (pass ? "pass" : "FAIL") << " ("
     << n_points << " points";
  if (!issues.empty()) ss << ", " << issues.size() << " model violations";
  ss << ")";
  return finish(cfg, "check-geometry", std::move(j), pass ? 0 : 1,
                pass ? "pass" : "fail", ss.str(), csv.str(),
                "geometry_checks.csv");
}

// Shared sweep over per-irrep two-sided comparisons.
struct Gate {
  bool power_ok = true;
  double z_max = 0.0;
  double exit_frac = 0.0;
};

Gate gate_of(const std::vector<GreenEstimate>& lhs,
             const std::vector<GreenEstimate>& rhs,
             const std::vector<Comparison>& cmp) {
  Gate gt;
  for (const auto& c : cmp) {
    gt.power_ok = gt.power_ok && c.power_ok;
    gt.z_max = std::max(gt.z_max, c.z_max);
  }
  auto frac = [](const GreenEstimate& e) {
    int64_t n = e.n_alive + e.n_dead;
    return n > 0 ? static_cast<double>(e.n_dead) / static_cast<double>(n)
                 : 0.0;
  };
  for (const auto& e : lhs) gt.exit_frac = std::max(gt.exit_frac, frac(e));
  for (const auto& e : rhs) gt.exit_frac = std::max(gt.exit_frac, frac(e));
  return gt;
}

Json two_sided_json(const std::vector<const Irrep*>& irs,
                    const char* lhs_name, const char* rhs_name,
                    const std::vector<GreenEstimate>& lhs,
                    const std::vector<GreenEstimate>& rhs,
                    const std::vector<Comparison>& cmp) {
  Json rows = Json::array();
  for (size_t t = 0; t < irs.size(); ++t) {
    Json r;
    r["irrep"] = irs[t]->label;
    r[lhs_name] = estimate_json(lhs[t]);
    r[rhs_name] = estimate_json(rhs[t]);
    r["comparison"] = comparison_json(cmp[t]);
    rows.push_back(std::move(r));
  }
  return rows;
}

RunOutcome cmd_girsanov(const RunConfig& cfg, const Materialized& mt) {
  Geometry g(mt.model);
  GirsanovCheck gc = girsanov_check(g, cfg.params, mt.irreps, mt.start_x,
                                    mt.start_f, mt.phi);
  Gate gt = gate_of(gc.lhs, gc.rhs, gc.cmp);

  Json j = base_json(cfg, "girsanov");
  j["irreps"] = two_sided_json(mt.irreps, "projected", "weighted_intrinsic",
                               gc.lhs, gc.rhs, gc.cmp);
  j["z_max"] = gt.z_max;
  j["exit_fraction_max"] = gt.exit_frac;
  j["power_ok"] = gt.power_ok;

  int code = !gt.power_ok ? 3 : (gt.z_max < 3.0 ? 0 : 1);
  const char* verdict =
      code == 0 ? "pass" : (code == 3 ? "inconclusive" : "fail");
  std::ostringstream ss;
  ss << "girsanov " << mt.model.id << ": " << verdict << ", max |z| = "
     << gt.z_max << " over " << mt.irreps.size() << " irreps, "
     << cfg.params.n_paths << " paths/side";
  return finish(cfg, "girsanov", std::move(j), code, verdict, ss.str());
}

RunOutcome cmd_relation(const RunConfig& cfg, const Materialized& mt) {
  Geometry g(mt.model);
  RelationCheck rc = relation_check(g, cfg.params, mt.irreps, mt.start_x,
                                    mt.start_f, mt.phi);
  Gate gt = gate_of(rc.lhs, rc.rhs, rc.cmp);

  // Per-path endpoint weights for the first slice of the reduced ensemble.
  int64_t n_dump = std::min<int64_t>(cfg.params.n_paths, 1000);
  std::vector<PathDump> dump =
      sample_reduced_paths(g, cfg.params, mt.irreps, mt.start_x, mt.start_f,
                           DriftKind::Intrinsic, Weighting::Intrinsic, n_dump);
  std::ostringstream csv;
  csv << "path,alive,log_jacobian,log_potential";
  for (int i = 0; i < mt.model.n_m; ++i) csv << ",x_end_" << i;
  for (int i = 0; i < mt.model.n_v; ++i) csv << ",f_end_" << i;
  for (const Irrep* ir : mt.irreps)
    csv << ",z[" << ir->label << "]_re,z[" << ir->label << "]_im";
  csv << "\n";
  for (const PathDump& d : dump) {
    std::vector<double> vals;
    vals.push_back(static_cast<double>(d.path));
    vals.push_back(d.alive ? 1.0 : 0.0);
    vals.push_back(d.log_jacobian);
    vals.push_back(d.log_potential);
    for (int i = 0; i < mt.model.n_m; ++i) vals.push_back(d.x_end[i]);
    for (int i = 0; i < mt.model.n_v; ++i) vals.push_back(d.f_end[i]);
    for (const cx& z : d.z) {
      vals.push_back(z.real());
      vals.push_back(z.imag());
    }
    csv << csv_row(vals) << "\n";
  }

  Json j = base_json(cfg, "relation");
  j["irreps"] = two_sided_json(mt.irreps, "reduced", "ambient_lift", rc.lhs,
                               rc.rhs, rc.cmp);
  j["z_max"] = gt.z_max;
  j["exit_fraction_max"] = gt.exit_frac;
  j["power_ok"] = gt.power_ok;
  j["weights_csv"] = "relation_weights.csv";
  j["weights_rows"] = n_dump;

  int code = !gt.power_ok ? 3 : (gt.z_max < 3.0 ? 0 : 1);
  const char* verdict =
      code == 0 ? "pass" : (code == 3 ? "inconclusive" : "fail");
  std::ostringstream ss;
  ss << "relation " << mt.model.id << ": " << verdict << ", max |z| = "
     << gt.z_max << " over " << mt.irreps.size() << " irreps, "
     << cfg.params.n_paths << " paths/side";
  return finish(cfg, "relation", std::move(j), code, verdict, ss.str(),
                csv.str(), "relation_weights.csv");
}

RunOutcome cmd_generator_check(const RunConfig& cfg, const Materialized& mt) {
  Geometry g(mt.model);
  const double tol = 5e-2;
  Json rows = Json::array();
  bool pass = true;
  double worst = 0.0;
  for (const Irrep* ir : mt.irreps) {
    for (Weighting v : {Weighting::WithInertia, Weighting::Intrinsic}) {
      GeneratorCheck c =
          generator_fd_check(g, cfg.params, *ir, v, mt.start_x, mt.start_f,
                             mt.phi, cfg.generator_dt, cfg.generator_nodes);
      bool ok = c.rel_err_richardson < tol;
      pass = pass && ok;
      worst = std::max(worst, c.rel_err_richardson);
      Json r = generator_json(c);
      r["irrep"] = ir->label;
      r["variant"] = v == Weighting::WithInertia ? "with-inertia" : "intrinsic";
      r["tol"] = tol;
      r["pass"] = ok;
      rows.push_back(std::move(r));
    }
  }
  Json j = base_json(cfg, "generator-check");
  j["cases"] = rows;
  j["rel_err_max"] = worst;

  std::ostringstream ss;
  ss << "generator-check " << mt.model.id << ": " << (pass ? "pass" : "FAIL")
     << ", max Richardson rel err = " << worst << " over "
     << mt.irreps.size() * 2 << " cases";
  return finish(cfg, "generator-check", std::move(j), pass ? 0 : 1,
                pass ? "pass" : "fail", ss.str());
}

RunOutcome cmd_simulate(const RunConfig& cfg, const Materialized& mt) {
  const ModelSpec& m = mt.model;
  Geometry g(m);
  const RunParams& p = cfg.params;
  const int n_steps = p.n_steps();
  const bool total = cfg.sim_process == "total";
  const bool intrinsic = cfg.sim_process == "intrinsic";
  const DriftKind kind =
      intrinsic ? DriftKind::Intrinsic : DriftKind::Projected;
  const Weighting variant =
      intrinsic ? Weighting::Intrinsic : Weighting::WithInertia;
  const Irrep* ir = mt.irreps.empty() ? nullptr : mt.irreps.front();
  const double mu2k = p.mu * p.mu * p.kappa;
  const double pot_scale = 1.0 / (mu2k * p.mass);

  std::ostringstream csv;
  csv << "mode,path,step,t";
  int nc = total ? m.n_p : m.n_m;
  for (int i = 0; i < nc; ++i) csv << (total ? ",q" : ",x") << i;
  for (int i = 0; i < m.n_v; ++i) csv << ",f" << i;
  csv << ",log_weight,z_re,z_im,alive\n";

  int64_t rows = 0;
  auto row = [&](int64_t path, int step, const Vec& a, const Vec& b,
                 double logw, cx z, bool alive) {
    csv << cfg.sim_process << "," << path << "," << step << ","
        << fmt_g17(p.t_a + step * p.dt);
    for (int i = 0; i < nc; ++i) csv << "," << fmt_g17(a[i]);
    for (int i = 0; i < m.n_v; ++i) csv << "," << fmt_g17(b[i]);
    csv << "," << fmt_g17(logw) << "," << fmt_g17(z.real()) << ","
        << fmt_g17(z.imag()) << "," << (alive ? 1 : 0) << "\n";
    rows++;
  };

  for (int64_t pi = 0; pi < cfg.sim_paths; ++pi) {
    double logw = 0.0;
    if (total) {
      Vec q0, f0;
      g.from_adapted(mt.start_x, mt.start_f, m.identity_th, q0, f0);
      PathResult pr = run_total_path(
          g, p, q0, f0, pi, [&](int k, const Vec& q, const Vec& f) {
            row(pi, k, q, f, logw, cx(1.0, 0.0), true);
            logw += pot_scale * m.potential(q, f) * p.dt;
          });
      row(pi, pr.steps_done, pr.x_end, pr.f_end, logw, cx(1.0, 0.0),
          pr.alive);
      continue;
    }
    Transport tz;
    Transport1 t1;
    bool scalar = ir == nullptr || ir->dim == 1;
    if (scalar)
      t1.reset();
    else
      tz.reset(ir->dim);
    TransportOps ops;
    TransportOps1 ops1;
    double sigma_a = g.sigma_at(mt.start_x, mt.start_f);
    auto zval = [&]() {
      if (ir == nullptr) return cx(1.0, 0.0);
      return scalar ? cx(std::exp(t1.log_scale) * t1.z)
                    : cx(std::exp(tz.log_scale) * tz.z(0, 0));
    };
    PathResult pr = run_reduced_path(
        g, p, kind, mt.start_x, mt.start_f, pi,
        [&](int k, const Frame& fr, const FrameDerivs& dv, const Vec& dwx,
            const Vec& dwf) {
          row(pi, k, fr.x, fr.ft, logw, zval(), true);
          logw += pot_scale * m.potential(fr.qs, fr.ft) * p.dt;
          if (intrinsic) logw += jac_rate(dv, mu2k) * p.dt;
          if (ir != nullptr) {
            if (scalar) {
              transport_ops1(fr, dv, *ir, p.mu, p.kappa, variant, ops1);
              t1.step(ops1, dwx, dwf, p.dt);
            } else {
              transport_ops(fr, dv, *ir, p.mu, p.kappa, variant, ops);
              tz.step(ops, dwx, dwf, p.dt);
            }
          }
        });
    if (pr.alive && intrinsic)
      logw += 0.25 * (g.sigma_at(pr.x_end, pr.f_end) - sigma_a);
    row(pi, pr.steps_done, pr.x_end, pr.f_end, logw, zval(), pr.alive);
  }

  Json j = base_json(cfg, "simulate");
  j["process"] = cfg.sim_process;
  j["paths"] = cfg.sim_paths;
  j["steps"] = n_steps;
  j["rows"] = rows;
  j["trajectories_csv"] = "trajectories.csv";

  std::ostringstream ss;
  ss << "simulate " << m.id << ": " << cfg.sim_paths << " " << cfg.sim_process
     << " paths, " << n_steps << " steps, " << rows << " rows";
  return finish(cfg, "simulate", std::move(j), 0, "pass", ss.str(), csv.str(),
                "trajectories.csv");
}

}  // namespace

RunOutcome run_command(const RunConfig& cfg, const std::string& command) {
  RunOutcome out;
  std::string err;
  if (!config_validate(cfg, err)) {
    out.exit_code = 2;
    out.verdict = "config-error";
    out.summary = err;
    Json j;
    j["command"] = command;
    j["error"] = err;
    j["verdict"] = out.verdict;
    out.json = j.dump(2) + "\n";
    return out;
  }
  Materialized mt;
  if (!config_materialize(cfg, mt, err)) {
    out.exit_code = 2;
    out.verdict = "config-error";
    out.summary = err;
    Json j;
    j["command"] = command;
    j["error"] = err;
    j["verdict"] = out.verdict;
    out.json = j.dump(2) + "\n";
    return out;
  }
  try {
    if (command == "check-geometry") return cmd_check_geometry(cfg, mt);
    if (command == "girsanov") return cmd_girsanov(cfg, mt);
    if (command == "relation") return cmd_relation(cfg, mt);
    if (command == "generator-check") return cmd_generator_check(cfg, mt);
    if (command == "simulate") return cmd_simulate(cfg, mt);
  } catch (const std::exception& e) {
    out.exit_code = 2;
    out.verdict = "config-error";
    out.summary = e.what();
    Json j;
    j["command"] = command;
    j["error"] = out.summary;
    j["verdict"] = out.verdict;
    out.json = j.dump(2) + "\n";
    return out;
  }
  out.exit_code = 2;
  out.verdict = "config-error";
  out.summary = "unknown command: " + command;
  Json j;
  j["command"] = command;
  j["error"] = out.summary;
  j["verdict"] = out.verdict;
  out.json = j.dump(2) + "\n";
  return out;
}

}  // namespace fibermc