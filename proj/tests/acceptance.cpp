// Acceptance gate: every release-blocking numerical claim, one verdict line
// per criterion, pinned tolerances and budgets. Exit code is the number of
// failed criteria.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "core/exec.hpp"
#include "core/geometry.hpp"
#include "core/greens.hpp"
#include "core/holonomy.hpp"
#include "core/model.hpp"
#include "core/sde.hpp"

using namespace fibermc;

namespace {

int g_failures = 0;

double now_s() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

void verdict(int idx, const char* name, bool pass, const std::string& detail,
             double secs, double budget_s) {
  bool in_budget = secs < budget_s;
  bool ok = pass && in_budget;
  if (!ok) ++g_failures;
  std::printf("[criterion %d] %-34s %s (%s, %.1fs of %.0fs)\n", idx, name,
              ok ? "PASS" : "FAIL", detail.c_str(), secs, budget_s);
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Gauss-Legendre on [-1, 1], for the deterministic cross-check integral.
void gauss_legendre(int n, std::vector<double>& xs, std::vector<double>& ws) {
  xs.assign(n, 0.0);
  ws.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    xs[i] = -x;
    xs[n - 1 - i] = x;
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    ws[i] = ws[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

struct SweepStats {
  double inv = 0.0, det = 0.0, id1 = 0.0, id2 = 0.0, mp = 0.0;
};

void sweep_model(const char* id, int n_points, int n_mp, SweepStats& st) {
  ModelSpec m = make_model(id, 0.0, nullptr, {});
  Geometry g(m);
  std::mt19937_64 rng(2026);
  Vec x(m.n_m), ft(m.n_v), th(m.n_g);
  for (int k = 0; k < n_points; ++k) {
    random_adapted_point(m, rng, x, ft, th);
    Mat gm = g.adapted_metric(x, ft, th);
    Mat gi = g.adapted_metric_inverse(x, ft, th);
    int n = static_cast<int>(gm.rows());
    st.inv = std::max(st.inv, max_abs(Mat(gi * gm - Mat::Identity(n, n))));
    Geometry::DetFact df = g.det_factorization(x, ft, th);
    double prod = df.det_d * df.det_ubar * df.det_ubar * df.hdet;
    st.det =
        std::max(st.det, std::abs(df.det_full - prod) / std::abs(df.det_full));

    Frame fr = g.frame(x, ft);
    Mat a1 = fr.inertia_inv * fr.inertia_v * fr.inertia_p_inv +
             fr.inertia_inv - fr.inertia_p_inv;
    st.id1 = std::max(st.id1, max_abs(a1));
    Mat a2 = fr.lam_sq -
             (fr.inertia_p_inv + fr.conn_p * fr.h_up * fr.conn_p.transpose());
    st.id2 = std::max(st.id2, max_abs(a2));

    if (k < n_mp) {
      FrameDerivs dv;
      g.derivs(fr, dv);
      std::vector<std::string> labels;
      if (m.n_g == 1) labels = {"0", "1"};
      else labels = {"0", "1/2"};
      for (const auto& lbl : labels) {
        const Irrep* ir = m.find_irrep(lbl);
        GammaTerms gt;
        gamma_terms(fr, dv, *ir, gt);
        CMat other = mprime_matched(fr, dv, *ir);
        st.mp = std::max(st.mp, max_abs(CMat(gt.mprime - other)));
      }
    }
  }
}

struct TwoSided {
  double z_max = 0.0;
  double se_frac = 0.0;   // combined stderr over dominant magnitude
  double exit_frac = 0.0;
  bool power_ok = true;
};

TwoSided gather(const std::vector<GreenEstimate>& lhs,
                const std::vector<GreenEstimate>& rhs,
                const std::vector<Comparison>& cmp) {
  TwoSided t;
  for (const auto& c : cmp) {
    t.z_max = std::max(t.z_max, c.z_max);
    t.power_ok = t.power_ok && c.power_ok;
    if (c.dominant_mag > 0)
      t.se_frac = std::max(t.se_frac, c.dominant_se / c.dominant_mag);
  }
  auto ef = [](const GreenEstimate& e) {
    int64_t n = e.n_alive + e.n_dead;
    return n > 0 ? double(e.n_dead) / double(n) : 0.0;
  };
  for (const auto& e : lhs) t.exit_frac = std::max(t.exit_frac, ef(e));
  for (const auto& e : rhs) t.exit_frac = std::max(t.exit_frac, ef(e));
  return t;
}

}  // namespace

int main() {
  std::printf("acceptance gate, seed-pinned budgets, single binary\n");

  // ---- criterion 1: adapted metric inverse and determinant split ----
  {
    double t0 = now_s();
    SweepStats so2, su2;
    sweep_model("so2-planar", 200, 0, so2);
    sweep_model("su2", 200, 0, su2);
    double inv = std::max(so2.inv, su2.inv);
    double det = std::max(so2.det, su2.det);
    bool pass = inv < 1e-9 && det < 1e-8;
    verdict(1, "metric inverse + volume split", pass,
            "200 pts/model, inv=" + fmt(inv) + " tol 1e-9, det=" + fmt(det) +
                " tol 1e-8",
            now_s() - t0, 10.0);
  }

  // ---- criterion 2: locked-inertia and gauge-square identities ----
  {
    double t0 = now_s();
    SweepStats so2, su2;
    sweep_model("so2-planar", 200, 0, so2);
    sweep_model("su2", 200, 0, su2);
    double id1 = std::max(so2.id1, su2.id1);
    double id2 = std::max(so2.id2, su2.id2);
    bool pass = id1 < 1e-10 && id2 < 1e-9;
    verdict(2, "inertia split + gauge square", pass,
            "id1=" + fmt(id1) + " tol 1e-10, id2=" + fmt(id2) + " tol 1e-9",
            now_s() - t0, 5.0);
  }

  // ---- criterion 3: transport drift matrix cross-assembly ----
  {
    double t0 = now_s();
    SweepStats so2, su2;
    sweep_model("so2-planar", 50, 50, so2);
    sweep_model("su2", 50, 50, su2);
    double mp = std::max(so2.mp, su2.mp);
    bool pass = mp < 1e-8;
    verdict(3, "drift matrix two routes", pass,
            "50 pts/model, sectors {0,1}/{0,1/2}, diff=" + fmt(mp) +
                " tol 1e-8",
            now_s() - t0, 30.0);
  }

  // ---- shared setup for the path-ensemble criteria ----
  Vec x0(1), f0(2);
  x0 << 1.0;
  f0 << 1.0, 0.0;
  TestFunction phi;
  phi.cx_t = x0;
  phi.cf_t = f0;
  RunParams pbig;
  pbig.t_b = 0.25;
  pbig.dt = 1e-3;
  pbig.n_paths = 200000;
  pbig.seed = 1;

  // ---- criterion 4: projected kernel equals weighted intrinsic kernel ----
  double gir_z0 = -1.0;  // trivial-sector z of the free run, reused by 8
  {
    double t0 = now_s();
    double z_all = 0.0, se_all = 0.0, exit_all = 0.0;
    bool power = true, bits = true;
    for (double c : {0.0, 0.1}) {
      ModelSpec m = make_model("so2-planar", c, nullptr, {"0", "1"});
      Geometry g(m);
      std::vector<const Irrep*> irs = {m.find_irrep("0"), m.find_irrep("1")};
      GirsanovCheck gc = girsanov_check(g, pbig, irs, x0, f0, phi);
      TwoSided t = gather(gc.lhs, gc.rhs, gc.cmp);
      z_all = std::max(z_all, t.z_max);
      se_all = std::max(se_all, t.se_frac);
      exit_all = std::max(exit_all, t.exit_frac);
      power = power && t.power_ok;
      if (c == 0.0) gir_z0 = gc.cmp[0].z_max;

      // Worker-count invariance on a slice: identical bits required.
      RunParams ps = pbig;
      ps.n_paths = 4096;
      GirsanovCheck g1 = girsanov_check(g, ps, irs, x0, f0, phi);
      ps.workers = 3;
      GirsanovCheck g3 = girsanov_check(g, ps, irs, x0, f0, phi);
      for (size_t i = 0; i < g1.lhs.size(); ++i) {
        bits = bits && (g1.lhs[i].value == g3.lhs[i].value);
        bits = bits && (g1.rhs[i].value == g3.rhs[i].value);
      }
    }
    bool pass = power && z_all < 3.0 && se_all <= 0.02 && exit_all < 0.01 &&
                bits;
    verdict(4, "change of kernel normalization", pass,
            "2e5 paths/side, c in {0, 0.1}, z=" + fmt(z_all) +
                " tol 3, se/mag=" + fmt(se_all) + " tol 0.02, exits=" +
                fmt(exit_all) + " tol 0.01, worker bits " +
                (bits ? "equal" : "DIFFER"),
            now_s() - t0, 300.0);
  }

  // ---- criterion 5: reduced kernel vs ambient lift, with quadrature ----
  double rel_z0 = -1.0;
  {
    double t0 = now_s();
    ModelSpec m = make_model("so2-planar", 0.0, nullptr, {"0", "1"});
    Geometry g(m);
    std::vector<const Irrep*> irs = {m.find_irrep("0"), m.find_irrep("1")};
    RelationCheck rc = relation_check(g, pbig, irs, x0, f0, phi);
    TwoSided t = gather(rc.lhs, rc.rhs, rc.cmp);
    rel_z0 = rc.cmp[0].z_max;

    // Deterministic integral for the ambient side of the free kernel.
    const double v = pbig.mu * pbig.mu * pbig.kappa * (pbig.t_b - pbig.t_a);
    const double da = std::exp(g.sigma_at(x0, f0));
    Vec q0 = m.section(x0);
    std::vector<double> gx, gw;
    gauss_legendre(48, gx, gw);
    const double x_lo = 0.02, x_hi = 4.2, f_lo = -3.8, f_hi = 3.8;
    const int nth = 96;
    CMat ex0 = CMat::Zero(1, 1), ex1 = CMat::Zero(1, 1);
    Vec xx(1), ff(2), th(1), q(2), f(2);
    for (int ix = 0; ix < 48; ++ix) {
      xx[0] = 0.5 * (x_hi + x_lo) + 0.5 * (x_hi - x_lo) * gx[ix];
      double wx = 0.5 * (x_hi - x_lo) * gw[ix];
      for (int i1 = 0; i1 < 48; ++i1) {
        ff[0] = 0.5 * (f_hi + f_lo) + 0.5 * (f_hi - f_lo) * gx[i1];
        double w1 = 0.5 * (f_hi - f_lo) * gw[i1];
        for (int i2 = 0; i2 < 48; ++i2) {
          ff[1] = 0.5 * (f_hi + f_lo) + 0.5 * (f_hi - f_lo) * gx[i2];
          double w2 = 0.5 * (f_hi - f_lo) * gw[i2];
          double de = std::exp(g.sigma_at(xx, ff));
          double env = phi.eval(xx, ff) * std::pow(de * da, -0.25);
          if (env < 1e-14) continue;
          for (int it = 0; it < nth; ++it) {
            th[0] = -M_PI + (2.0 * M_PI * it) / nth;
            g.from_adapted(xx, ff, th, q, f);
            double dens = std::exp(-(q - q0).squaredNorm() / (2.0 * v)) /
                          (2.0 * M_PI * v) *
                          std::exp(-(f - f0).squaredNorm() / (2.0 * v)) /
                          (2.0 * M_PI * v);
            double vol =
                std::sqrt(g.det_factorization(xx, ff, th).det_full);
            double base =
                wx * w1 * w2 * (2.0 * M_PI / nth) * dens * vol * env;
            ex0(0, 0) += base;
            ex1(0, 0) += base * std::exp(cx(0.0, -th[0]));
          }
        }
      }
    }
    Comparison q0c = compare_to_exact(rc.rhs[0], ex0);
    Comparison q1c = compare_to_exact(rc.rhs[1], ex1);
    double zq = std::max(q0c.z_max, q1c.z_max);

    bool pass = t.power_ok && t.z_max < 3.0 && zq < 3.0;
    verdict(5, "reduction relation", pass,
            "2e5 paths/side, z=" + fmt(t.z_max) +
                " tol 3, quadrature z=" + fmt(zq) + " tol 3",
            now_s() - t0, 600.0);
  }

  // ---- criterion 6: weak first order of the matrix generator ----
  {
    double t0 = now_s();
    ModelSpec m = make_model("so2-planar", 0.0, nullptr, {"0", "1"});
    Geometry g(m);
    RunParams p;
    double ratio_lo = 1e30, ratio_hi = 0.0, rich = 0.0;
    for (const char* lbl : {"0", "1"}) {
      for (Weighting w : {Weighting::WithInertia, Weighting::Intrinsic}) {
        GeneratorCheck gc = generator_fd_check(g, p, *m.find_irrep(lbl), w,
                                               x0, f0, phi, 1e-3, 16);
        ratio_lo = std::min(ratio_lo, gc.err_ratio);
        ratio_hi = std::max(ratio_hi, gc.err_ratio);
        rich = std::max(rich, gc.rel_err_richardson);
      }
    }
    bool pass = ratio_lo > 1.6 && ratio_hi < 2.4 && rich < 5e-2;
    verdict(6, "weak order of one step", pass,
            "sectors {0,1} x both weights, err ratio in [" + fmt(ratio_lo) +
                ", " + fmt(ratio_hi) + "] want [1.6, 2.4], richardson=" +
                fmt(rich) + " tol 0.05",
            now_s() - t0, 300.0);
  }

  // ---- criterion 7: pathwise volume-weight identity refinement ----
  {
    double t0 = now_s();
    ModelSpec m = make_model("so2-planar", 0.0, nullptr, {});
    Geometry g(m);
    RunParams p;
    p.t_b = 0.25;
    p.n_paths = 10000;
    p.seed = 1;
    ItoJacobianCheck ic = ito_jacobian_check(g, p, x0, f0, 1e-3);
    bool pass = ic.ratio <= 0.6;
    verdict(7, "pathwise weight identity", pass,
            "1e4 paths, |logdiff| " + fmt(ic.mean_absdiff_coarse) + " -> " +
                fmt(ic.mean_absdiff_fine) + ", ratio=" + fmt(ic.ratio) +
                " want <= 0.6 (signed-mean ratio " + fmt(ic.bias_ratio) + ")",
            now_s() - t0, 120.0);
  }

  // ---- criterion 8: zero-momentum sector degenerates to the scalar case --
  {
    double t0 = now_s();
    ModelSpec m = make_model("so2-planar", 0.0, nullptr, {"0"});
    Geometry g(m);
    std::vector<const Irrep*> irs = {m.find_irrep("0")};
    RunParams p;
    p.t_b = 0.05;
    p.dt = 1e-3;
    p.seed = 9;
    bool unity = true;
    for (DriftKind k : {DriftKind::Projected, DriftKind::Intrinsic}) {
      Weighting w = (k == DriftKind::Projected) ? Weighting::WithInertia
                                                : Weighting::Intrinsic;
      auto rows = sample_reduced_paths(g, p, irs, x0, f0, k, w, 100);
      for (const auto& r : rows) unity = unity && (r.z[0] == cx(1.0, 0.0));
    }
    bool pass = unity && gir_z0 >= 0.0 && gir_z0 < 3.0 && rel_z0 >= 0.0 &&
                rel_z0 < 3.0;
    verdict(8, "zero-momentum degeneration", pass,
            std::string("transport exactly 1 on 200 paths: ") +
                (unity ? "yes" : "NO") + ", trivial-sector z: kernel " +
                fmt(gir_z0) + ", relation " + fmt(rel_z0) + " tol 3",
            now_s() - t0, 60.0);
  }

  std::printf("acceptance: %d of 8 criteria met\n", 8 - g_failures);
  return g_failures;
}
