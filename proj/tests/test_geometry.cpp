#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "core/geometry.hpp"
#include "core/model.hpp"

using namespace fibermc;

namespace {

// Pullback of the flat product metric under the chart map, by central
// differences. Independent oracle for the assembled adapted metric.
Mat pullback_metric_fd(const Geometry& g, const Vec& x, const Vec& ft,
                       const Vec& th) {
  const ModelSpec& m = g.model();
  const int nm = m.n_m, nv = m.n_v, ng = m.n_g;
  const int n = nm + nv + ng;
  const double h = 1e-6;
  Mat jac(m.n_p + nv, n);
  Vec xp = x, xm = x, fp = ft, fm = ft, tp = th, tm = th;
  Vec qa(m.n_p), fa(nv), qb(m.n_p), fb(nv);
  for (int j = 0; j < n; ++j) {
    xp = x; xm = x; fp = ft; fm = ft; tp = th; tm = th;
    if (j < nm) {
      xp[j] += h; xm[j] -= h;
    } else if (j < nm + nv) {
      fp[j - nm] += h; fm[j - nm] -= h;
    } else {
      tp[j - nm - nv] += h; tm[j - nm - nv] -= h;
    }
    g.from_adapted(xp, fp, tp, qa, fa);
    g.from_adapted(xm, fm, tm, qb, fb);
    jac.col(j).head(m.n_p) = (qa - qb) / (2.0 * h);
    jac.col(j).tail(nv) = (fa - fb) / (2.0 * h);
  }
  Mat big = Mat::Zero(m.n_p + nv, m.n_p + nv);
  big.topLeftCorner(m.n_p, m.n_p) = m.metric_p;
  big.bottomRightCorner(nv, nv) = m.metric_v;
  return jac.transpose() * big * jac;
}

}  // namespace

TEST_CASE("planar model frame values") {
  ModelSpec m = make_model("so2-planar", 0.0, nullptr, {});
  Geometry g(m);
  Vec x(1), ft(2);

  SUBCASE("action generators") {
    x << 1.3;
    ft << 0.0, 0.0;
    Frame fr = g.frame(x, ft);
    CHECK(fr.kp(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(fr.kp(1, 0) == doctest::Approx(1.3));
    ft << 0.7, 0.0;
    fr = g.frame(x, ft);
    CHECK(fr.kv(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(fr.kv(1, 0) == doctest::Approx(-0.7));
    ft << 0.0, 0.0;
    fr = g.frame(x, ft);
    CHECK(max_abs(fr.kv) == doctest::Approx(0.0).epsilon(1e-14));
  }

  SUBCASE("locked inertia split") {
    x << 1.3;
    ft << 0.7, 0.0;
    Frame fr = g.frame(x, ft);
    CHECK(fr.inertia_p(0, 0) == doctest::Approx(1.69).epsilon(1e-12));
    CHECK(fr.inertia_v(0, 0) == doctest::Approx(0.49).epsilon(1e-12));
    CHECK(fr.inertia(0, 0) == doctest::Approx(2.18).epsilon(1e-12));
    CHECK(fr.detd == doctest::Approx(2.18).epsilon(1e-12));
  }

  SUBCASE("connection rows") {
    x << 1.0;
    ft << 1.0, 0.0;
    Frame fr = g.frame(x, ft);
    // The transverse direction is orthogonal to the ambient orbit, so both
    // transverse connection blocks vanish identically.
    CHECK(max_abs(fr.conn) < 1e-14);
    CHECK(max_abs(fr.conn_p) < 1e-14);
    CHECK(fr.conn_v(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(fr.conn_v(0, 1) == doctest::Approx(-0.5).epsilon(1e-12));
  }

  SUBCASE("gauge frame") {
    x << 2.0;
    ft << 0.0, 0.0;
    Frame fr = g.frame(x, ft);
    CHECK(fr.gauge_phi(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fr.gauge_lam(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(fr.gauge_lam(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("transverse metrics are unit") {
    std::mt19937_64 rng(11);
    Vec th(1);
    for (int i = 0; i < 20; ++i) {
      random_adapted_point(m, rng, x, ft, th);
      Frame fr = g.frame(x, ft);
      CHECK(fr.h_low(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(fr.ht_low(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(fr.h_up(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("inverse metric internal block") {
    x << 1.0;
    ft << 1.0, 0.0;
    Frame fr = g.frame(x, ft);
    CHECK(fr.lam_sq(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fr.quad_vv(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fr.quad_vv(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(fr.quad_vv(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(fr.quad_vv(1, 1) == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("volume split and log-density gradient") {
    x << 1.0;
    ft << 1.0, 0.0;
    Vec th(1);
    th << 0.37;
    Geometry::DetFact df = g.det_factorization(x, ft, th);
    CHECK(df.det_d == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(df.det_ubar == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(df.hdet == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(df.det_full == doctest::Approx(1.0).epsilon(1e-12));
    Frame fr = g.frame(x, ft);
    CHECK(fr.sigma == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(fr.sig_x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fr.sig_f[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fr.sig_f[1] == doctest::Approx(0.0).epsilon(1e-14));
    // hdet is the squared cosine of the angle between the two orbit factors:
    // x^2 / (x^2 + |ft|^2) for unit internal metric. At ft = 0 it is 1.
    ft << 0.0, 0.0;
    fr = g.frame(x, ft);
    CHECK(fr.hdet == doctest::Approx(1.0).epsilon(1e-12));
    x << 1.7;
    ft << 0.3, -0.4;
    fr = g.frame(x, ft);
    double s = 1.7 * 1.7 + 0.25;
    CHECK(fr.hdet == doctest::Approx(1.7 * 1.7 / s).epsilon(1e-12));
  }
}

TEST_CASE("chart maps") {
  ModelSpec m = make_model("so2-planar", 0.0, nullptr, {});
  Geometry g(m);

  SUBCASE("worked example both ways") {
    Vec q(2), f(2), x(1), ft(2), th(1);
    q << 0.0, 2.0;
    f << 1.0, 0.0;
    REQUIRE(g.to_adapted(q, f, x, ft, th));
    CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(th[0] == doctest::Approx(M_PI / 2).epsilon(1e-12));
    CHECK(ft[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ft[1] == doctest::Approx(1.0).epsilon(1e-12));
    Vec q2(2), f2(2);
    g.from_adapted(x, ft, th, q2, f2);
    CHECK(max_abs(Vec(q2 - q)) < 1e-12);
    CHECK(max_abs(Vec(f2 - f)) < 1e-12);
  }

  SUBCASE("origin is outside every chart") {
    Vec q(2), f(2), x(1), ft(2), th(1);
    q << 0.0, 0.0;
    f << 0.3, 0.1;
    CHECK_FALSE(g.to_adapted(q, f, x, ft, th));
  }

  SUBCASE("round trips at random points") {
    std::mt19937_64 rng(7);
    Vec x(1), ft(2), th(1), q(2), f(2), x2(1), ft2(2), th2(1);
    for (int i = 0; i < 50; ++i) {
      random_adapted_point(m, rng, x, ft, th);
      g.from_adapted(x, ft, th, q, f);
      REQUIRE(g.to_adapted(q, f, x2, ft2, th2));
      CHECK(max_abs(Vec(x2 - x)) < 1e-10);
      CHECK(max_abs(Vec(ft2 - ft)) < 1e-10);
      CHECK(max_abs(Vec(th2 - th)) < 1e-10);
    }
  }

  SUBCASE("closed chart agrees with newton solve") {
    std::mt19937_64 rng(13);
    Vec x(1), ft(2), th(1), q(2), f(2);
    Vec xa(1), fa(2), ta(1), xb(1), fb(2), tb(1);
    for (int i = 0; i < 25; ++i) {
      random_adapted_point(m, rng, x, ft, th);
      g.from_adapted(x, ft, th, q, f);
      REQUIRE(g.to_adapted(q, f, xa, fa, ta));
      REQUIRE(g.to_adapted_numeric(q, f, xb, fb, tb));
      CHECK(max_abs(Vec(xa - xb)) < 1e-8);
      CHECK(max_abs(Vec(fa - fb)) < 1e-8);
      CHECK(max_abs(Vec(ta - tb)) < 1e-8);
    }
  }
}

TEST_CASE("assembled metric against chart pullback") {
  for (const char* id : {"so2-planar", "su2"}) {
    CAPTURE(id);
    ModelSpec m = make_model(id, 0.0, nullptr, {});
    Geometry g(m);
    std::mt19937_64 rng(29);
    Vec x(m.n_m), ft(m.n_v), th(m.n_g);

    // Worked point first, chart origin.
    if (m.n_g == 1) {
      x << 1.0;
      ft << 1.0, 0.0;
      th << 0.0;
      Mat gm = g.adapted_metric(x, ft, th);
      Mat fd = pullback_metric_fd(g, x, ft, th);
      CHECK(max_abs(Mat(gm - fd)) < 1e-8);
    }
    for (int i = 0; i < 12; ++i) {
      random_adapted_point(m, rng, x, ft, th);
      Mat gm = g.adapted_metric(x, ft, th);
      Mat fd = pullback_metric_fd(g, x, ft, th);
      CHECK(max_abs(Mat(gm - fd)) < 1e-7);
      Mat gi = g.adapted_metric_inverse(x, ft, th);
      Mat eye = Mat::Identity(gm.rows(), gm.cols());
      CHECK(max_abs(Mat(gi * gm - eye)) < 1e-9);
      Geometry::DetFact df = g.det_factorization(x, ft, th);
      double prod = df.det_d * df.det_ubar * df.det_ubar * df.hdet;
      CHECK(std::abs(df.det_full - prod) <= 1e-8 * std::abs(df.det_full));
      CHECK(std::abs(df.det_full - gm.determinant()) <=
            1e-7 * std::abs(df.det_full));
    }
  }
}

TEST_CASE("inertia and gauge identities at random points") {
  for (const char* id : {"so2-planar", "su2"}) {
    CAPTURE(id);
    ModelSpec m = make_model(id, 0.1, nullptr, {});
    Geometry g(m);
    std::mt19937_64 rng(31);
    Vec x(m.n_m), ft(m.n_v), th(m.n_g);
    Mat eye = Mat::Identity(m.n_g, m.n_g);
    for (int i = 0; i < 40; ++i) {
      random_adapted_point(m, rng, x, ft, th);
      Frame fr = g.frame(x, ft);
      Mat lhs = fr.inertia_inv * fr.inertia_v * fr.inertia_p_inv +
                fr.inertia_inv - fr.inertia_p_inv;
      CHECK(max_abs(lhs) < 1e-10);
      Mat rhs = fr.inertia_p_inv + fr.conn_p * fr.h_up * fr.conn_p.transpose();
      CHECK(max_abs(Mat(fr.lam_sq - rhs)) < 1e-9);
      CHECK(max_abs(Mat(fr.gauge_lam * fr.kp - eye)) < 1e-9);
      // noise_vv must reproduce quad_vv minus the transverse coupling.
      Mat nv = fr.quad_vv - fr.w_va * fr.h_up * fr.w_va.transpose();
      CHECK(max_abs(Mat(fr.noise_vv - nv)) < 1e-9);
      CHECK(max_abs(Mat(fr.xx * fr.xx.transpose() - fr.h_up)) < 1e-10);
      CHECK(max_abs(Mat(fr.xv * fr.xv.transpose() - fr.noise_vv)) < 1e-10);
    }
  }
}

TEST_CASE("log-density gradient against nested differencing") {
  for (const char* id : {"so2-planar", "su2"}) {
    CAPTURE(id);
    ModelSpec m = make_model(id, 0.0, nullptr, {});
    Geometry g(m);
    std::mt19937_64 rng(37);
    Vec x(m.n_m), ft(m.n_v), th(m.n_g);
    for (int i = 0; i < 15; ++i) {
      random_adapted_point(m, rng, x, ft, th);
      Frame fr = g.frame(x, ft);
      const double h = 1e-5;
      Vec xp = x, xm = x, fp = ft, fm = ft;
      for (int j = 0; j < m.n_m; ++j) {
        xp = x; xm = x;
        xp[j] += h; xm[j] -= h;
        double fd = (g.sigma_at(xp, ft) - g.sigma_at(xm, ft)) / (2 * h);
        CHECK(std::abs(fr.sig_x[j] - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
      }
      for (int j = 0; j < m.n_v; ++j) {
        fp = ft; fm = ft;
        fp[j] += h; fm[j] -= h;
        double fd = (g.sigma_at(x, fp) - g.sigma_at(x, fm)) / (2 * h);
        CHECK(std::abs(fr.sig_f[j] - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("closed frame path matches the generic assembly") {
  ModelSpec m = make_model("so2-planar", 0.0, nullptr, {});
  REQUIRE(m.frame_closed);
  ModelSpec plain = m;
  plain.frame_closed = nullptr;
  plain.analytic_derivs = nullptr;
  plain.sigma_grad = nullptr;
  Geometry g(m), gp(plain);
  std::mt19937_64 rng(41);
  Vec x(1), ft(2), th(1);
  for (int i = 0; i < 30; ++i) {
    random_adapted_point(m, rng, x, ft, th);
    Frame a = g.frame(x, ft);
    Frame b = gp.frame(x, ft);
    CHECK(max_abs(Mat(a.kp - b.kp)) < 1e-12);
    CHECK(max_abs(Mat(a.kv - b.kv)) < 1e-12);
    CHECK(max_abs(Mat(a.inertia - b.inertia)) < 1e-12);
    CHECK(max_abs(Mat(a.conn_v - b.conn_v)) < 1e-12);
    CHECK(max_abs(Mat(a.lam_sq - b.lam_sq)) < 1e-12);
    CHECK(max_abs(Mat(a.quad_vv - b.quad_vv)) < 1e-12);
    CHECK(max_abs(Mat(a.noise_vv - b.noise_vv)) < 1e-12);
    CHECK(max_abs(Mat(a.xv - b.xv)) < 1e-12);
    CHECK(max_abs(Mat(a.xvx - b.xvx)) < 1e-12);
    CHECK(std::abs(a.hdet - b.hdet) < 1e-12);
    CHECK(std::abs(a.sigma - b.sigma) < 1e-12);
    CHECK(max_abs(Vec(a.sig_x - b.sig_x)) < 1e-7);
    CHECK(max_abs(Vec(a.sig_f - b.sig_f)) < 1e-7);
    FrameDerivs da, db;
    g.derivs(a, da);
    gp.derivs(b, db);
    CHECK(max_abs(Vec(da.div_h - db.div_h)) < 1e-7);
    CHECK(max_abs(Vec(da.divh_f - db.divh_f)) < 1e-7);
    CHECK(max_abs(Vec(da.dnn - db.dnn)) < 1e-7);
    CHECK(max_abs(Vec(da.divk_dh - db.divk_dh)) < 1e-7);
    CHECK(max_abs(Vec(da.diva_dh - db.diva_dh)) < 1e-7);
    CHECK(std::abs(da.lap_sigma - db.lap_sigma) < 1e-6);
    CHECK(std::abs(da.grad_sigma_sq - db.grad_sigma_sq) < 1e-9);
  }
}

TEST_CASE("planar closed-form derivatives") {
  ModelSpec m = make_model("so2-planar", 0.0, nullptr, {});
  Geometry g(m);
  Vec x(1), ft(2);
  x << 1.2;
  ft << 0.5, -0.3;
  Frame fr = g.frame(x, ft);
  FrameDerivs dv;
  g.derivs(fr, dv);
  double s = 1.44 + 0.34, w = 0.34;
  CHECK(dv.div_h[0] == doctest::Approx(w / (1.2 * s)).epsilon(1e-9));
  CHECK(dv.divh_f[0] == doctest::Approx(-0.5 / s).epsilon(1e-9));
  CHECK(dv.divh_f[1] == doctest::Approx(0.3 / s).epsilon(1e-9));
  CHECK(dv.dnn[0] == doctest::Approx(-0.5 / 1.44).epsilon(1e-9));
  CHECK(dv.dnn[1] == doctest::Approx(0.3 / 1.44).epsilon(1e-9));
  CHECK(dv.lap_sigma == doctest::Approx(2.0 / s).epsilon(1e-9));
  CHECK(dv.grad_sigma_sq == doctest::Approx(4.0 / s).epsilon(1e-9));
  CHECK(max_abs(dv.divk_h) < 1e-12);
  CHECK(max_abs(dv.diva_h) < 1e-12);
  CHECK(max_abs(dv.divk_dh) < 1e-12);
  CHECK(max_abs(dv.diva_dh) < 1e-12);
}

TEST_CASE("domain guard") {
  ModelSpec m = make_model("so2-planar", 0.0, nullptr, {});
  m.guard.x_min = 0.05;
  m.guard.radius_max = 10.0;
  Geometry g(m);
  Vec x(1), ft(2);
  x << 1.0;
  ft << 0.5, 0.5;
  CHECK(g.admissible(x, ft));
  x << 0.01;
  CHECK_FALSE(g.admissible(x, ft));
  x << 9.9;
  ft << 9.9, 0.0;
  CHECK_FALSE(g.admissible(x, ft));
  Vec q(2), f(2);
  q << 1.0, 1.0;
  f << 0.2, 0.2;
  CHECK(g.admissible_total(q, f));
  q << 0.0, 0.0;
  CHECK_FALSE(g.admissible_total(q, f));
}
