#include "core/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "core/fd.hpp"

namespace fibermc {

Geometry::Geometry(const ModelSpec& m) : m_(&m) {
  gp_inv_ = inverse_sym(m.metric_p);
  gv_inv_ = inverse_sym(m.metric_v);
  xv_total_ = chol_lower(gv_inv_);
  xp_total_ = chol_lower(gp_inv_);
  det_gv_ = m.metric_v.determinant();
}

void Geometry::frame(const Vec& x, const Vec& ft, Frame& fr) const {
  if (m_->frame_closed) {
    m_->frame_closed(x, ft, fr);
    return;
  }
  frame_generic(x, ft, fr);
}

void Geometry::frame_generic(const Vec& x, const Vec& ft, Frame& fr) const {
  const ModelSpec& m = *m_;
  fr.x = x;
  fr.ft = ft;
  fr.qs = m.section(x);
  Mat jac = m.section_jac(x);
  fr.gv_ft = m.metric_v * ft;

  fr.kp = m.killing_p(fr.qs);
  fr.kv.resize(m.n_v, m.n_g);
  for (int a = 0; a < m.n_g; ++a) fr.kv.col(a) = m.gen_v[a] * ft;

  Mat gp_kp = m.metric_p * fr.kp;
  fr.inertia_p = fr.kp.transpose() * gp_kp;
  fr.inertia_v = fr.kv.transpose() * m.metric_v * fr.kv;
  fr.inertia = fr.inertia_p + fr.inertia_v;

  Mat id_g = Mat::Identity(m.n_g, m.n_g);
  Eigen::LLT<Mat> lltd(fr.inertia);
  if (lltd.info() != Eigen::Success) {
    throw std::runtime_error("frame: locked inertia not positive definite");
  }
  fr.inertia_inv = lltd.solve(id_g);
  Mat ld = lltd.matrixL();
  double rootdet = 1.0;
  for (int i = 0; i < m.n_g; ++i) rootdet *= ld(i, i);
  fr.detd = rootdet * rootdet;
  fr.inertia_p_inv = inverse_sym(fr.inertia_p);

  Mat gj = m.gauge_jac(fr.qs);
  fr.gauge_phi = gj * fr.kp;
  Eigen::PartialPivLU<Mat> lu(fr.gauge_phi);
  fr.gauge_det = lu.determinant();
  fr.gauge_lam = lu.solve(gj);
  fr.lam_sq = fr.gauge_lam * gp_inv_ * fr.gauge_lam.transpose();

  Mat m1 = gp_kp.transpose() * jac;  // n_g x n_m
  fr.conn = fr.inertia_inv * m1;
  fr.conn_v = fr.inertia_inv * (fr.kv.transpose() * m.metric_v);
  fr.conn_p = fr.inertia_p_inv * m1;

  Mat base = jac.transpose() * m.metric_p * jac;
  fr.ht_low = base - m1.transpose() * fr.inertia_inv * m1;
  fr.h_low = base - m1.transpose() * fr.inertia_p_inv * m1;
  fr.h_up = inverse_sym(fr.h_low);

  fr.w_va = fr.kv * fr.conn_p;
  fr.quad_xv = fr.h_up * fr.w_va.transpose();
  fr.quad_vv = gv_inv_ + fr.kv * fr.lam_sq * fr.kv.transpose();
  fr.noise_vv = gv_inv_ + fr.kv * fr.inertia_p_inv * fr.kv.transpose();
  fr.xx = chol_lower(fr.h_up);
  fr.xv = chol_lower(fr.noise_vv);
  fr.xvx = fr.w_va * fr.xx;

  Mat m2 = fr.kv.transpose() * m.metric_v;  // n_g x n_v
  int nm = m.n_m, nv = m.n_v;
  Mat hm(nm + nv, nm + nv);
  hm.topLeftCorner(nm, nm) = fr.ht_low;
  hm.topRightCorner(nm, nv) = -m1.transpose() * fr.inertia_inv * m2;
  hm.bottomLeftCorner(nv, nm) = hm.topRightCorner(nm, nv).transpose();
  hm.bottomRightCorner(nv, nv) =
      m.metric_v - m2.transpose() * fr.inertia_inv * m2;
  fr.hdet = hm.determinant();

  fr.sigma = std::log(fr.detd);
  if (m.sigma_grad) {
    m.sigma_grad(fr, fr.sig_x, fr.sig_f);
  } else {
    fr.sig_x = fd_gradient(
        [&](const Vec& xv) { return sigma_at(xv, ft); }, x, fd_step);
    fr.sig_f = fd_gradient(
        [&](const Vec& fv) { return sigma_at(x, fv); }, ft, fd_step);
  }
}

double Geometry::sigma_at(const Vec& x, const Vec& ft) const {
  const ModelSpec& m = *m_;
  Vec qs = m.section(x);
  Mat kp = m.killing_p(qs);
  Mat kv(m.n_v, m.n_g);
  for (int a = 0; a < m.n_g; ++a) kv.col(a) = m.gen_v[a] * ft;
  Mat d = kp.transpose() * m.metric_p * kp +
          kv.transpose() * m.metric_v * kv;
  return std::log(d.determinant());
}

void Geometry::derivs(const Frame& fr, FrameDerivs& dv) const {
  if (m_->analytic_derivs) {
    m_->analytic_derivs(fr, dv);
    return;
  }
  derivs_fd(fr, dv);
}

namespace {

Mat quad_block(const Frame& fr, int nm, int nv) {
  Mat q(nm + nv, nm + nv);
  q.topLeftCorner(nm, nm) = fr.h_up;
  q.topRightCorner(nm, nv) = fr.quad_xv;
  q.bottomLeftCorner(nv, nm) = fr.quad_xv.transpose();
  q.bottomRightCorner(nv, nv) = fr.quad_vv;
  return q;
}

}  // namespace

void Geometry::derivs_fd(const Frame& fr0, FrameDerivs& dv) const {
  int nm = m_->n_m, nv = m_->n_v, ng = m_->n_g;
  double rh = std::sqrt(fr0.hdet);
  double rdh = std::sqrt(fr0.detd * fr0.hdet);
  dv.div_h = Vec::Zero(nm);
  dv.diva_h = Vec::Zero(ng);
  dv.diva_dh = Vec::Zero(ng);
  dv.divk_h = Vec::Zero(ng);
  dv.divk_dh = Vec::Zero(ng);
  dv.divh_f = Vec::Zero(nv);
  dv.dnn = Vec::Zero(nv);

  Frame fp, fm;
  for (int j = 0; j < nm; ++j) {
    double h = fd_step * std::max(1.0, std::abs(fr0.x[j]));
    Vec xp = fr0.x, xm = fr0.x;
    xp[j] += h;
    xm[j] -= h;
    frame(xp, fr0.ft, fp);
    frame(xm, fr0.ft, fm);
    double wp = std::sqrt(fp.hdet), wm = std::sqrt(fm.hdet);
    double wdp = std::sqrt(fp.detd * fp.hdet);
    double wdm = std::sqrt(fm.detd * fm.hdet);
    for (int i = 0; i < nm; ++i)
      dv.div_h[i] += (wp * fp.h_up(i, j) - wm * fm.h_up(i, j)) / (2 * h * rh);
    Mat tp = fp.h_up * fp.conn_p.transpose();
    Mat tm = fm.h_up * fm.conn_p.transpose();
    for (int g = 0; g < ng; ++g) {
      dv.diva_h[g] += (wp * tp(j, g) - wm * tm(j, g)) / (2 * h * rh);
      dv.diva_dh[g] += (wdp * tp(j, g) - wdm * tm(j, g)) / (2 * h * rdh);
    }
  }
  for (int b = 0; b < nv; ++b) {
    double h = fd_step * std::max(1.0, std::abs(fr0.ft[b]));
    Vec ftp = fr0.ft, ftm = fr0.ft;
    ftp[b] += h;
    ftm[b] -= h;
    frame(fr0.x, ftp, fp);
    frame(fr0.x, ftm, fm);
    double wp = std::sqrt(fp.hdet), wm = std::sqrt(fm.hdet);
    double wdp = std::sqrt(fp.detd * fp.hdet);
    double wdm = std::sqrt(fm.detd * fm.hdet);
    dv.divh_f[b] = (wp - wm) / (2 * h * rh);
    for (int g = 0; g < ng; ++g) {
      dv.divk_h[g] += (wp * fp.kv(b, g) - wm * fm.kv(b, g)) / (2 * h * rh);
      dv.divk_dh[g] +=
          (wdp * fp.kv(b, g) - wdm * fm.kv(b, g)) / (2 * h * rdh);
    }
    Mat np = fp.kv * fp.lam_sq * fp.kv.transpose();
    Mat nq = fm.kv * fm.lam_sq * fm.kv.transpose();
    for (int a = 0; a < nv; ++a) dv.dnn[a] += (np(a, b) - nq(a, b)) / (2 * h);
  }

  Mat quad = quad_block(fr0, nm, nv);
  Vec grad(nm + nv);
  grad.head(nm) = fr0.sig_x;
  grad.tail(nv) = fr0.sig_f;
  dv.grad_sigma_sq = grad.dot(quad * grad);

  Vec p0(nm + nv);
  p0.head(nm) = fr0.x;
  p0.tail(nv) = fr0.ft;
  Mat hess = fd_hessian(
      [&](const Vec& p) { return sigma_at(p.head(nm), p.tail(nv)); }, p0,
      1e-4);
  double tr = (quad * hess).trace();
  Vec bdrift = intrinsic_drift(fr0, dv);
  dv.lap_sigma = tr + bdrift.dot(grad);
}

Vec Geometry::intrinsic_drift(const Frame& fr, const FrameDerivs& dv) const {
  int nm = m_->n_m, nv = m_->n_v;
  Vec b(nm + nv);
  b.head(nm) = dv.div_h + fr.h_up * (fr.conn_p.transpose() * dv.divk_h);
  b.tail(nv) = fr.kv * dv.diva_h + fr.quad_vv * dv.divh_f + dv.dnn;
  return b;
}

Vec Geometry::full_drift(const Frame& fr, const FrameDerivs& dv) const {
  int nm = m_->n_m, nv = m_->n_v;
  Vec cov(nm + nv);
  cov.head(nm) = 0.5 * fr.sig_x;
  cov.tail(nv) = 0.5 * fr.sig_f;
  return intrinsic_drift(fr, dv) + quad_apply(fr, cov);
}

Vec Geometry::quad_apply(const Frame& fr, const Vec& cov) const {
  int nm = m_->n_m, nv = m_->n_v;
  Vec out(nm + nv);
  out.head(nm) = fr.h_up * cov.head(nm) + fr.quad_xv * cov.tail(nv);
  out.tail(nv) =
      fr.quad_xv.transpose() * cov.head(nm) + fr.quad_vv * cov.tail(nv);
  return out;
}

Mat Geometry::adapted_metric(const Vec& x, const Vec& ft,
                             const Vec& th) const {
  Frame fr = frame(x, ft);
  Mat ub = m_->ubar(th);
  int nm = m_->n_m, nv = m_->n_v, ng = m_->n_g;
  int n = nm + nv + ng;
  Mat g = Mat::Zero(n, n);
  Mat du = fr.inertia * ub;
  g.topLeftCorner(nm, nm) =
      fr.ht_low + fr.conn.transpose() * fr.inertia * fr.conn;
  g.block(0, nm + nv, nm, ng) = fr.conn.transpose() * du;
  g.block(nm, nm, nv, nv) = m_->metric_v;
  g.block(nm, nm + nv, nv, ng) = fr.conn_v.transpose() * du;
  g.block(nm + nv, nm + nv, ng, ng) = ub.transpose() * du;
  g.block(nm + nv, 0, ng, nm) = g.block(0, nm + nv, nm, ng).transpose();
  g.block(nm + nv, nm, ng, nv) = g.block(nm, nm + nv, nv, ng).transpose();
  return g;
}

Mat Geometry::adapted_metric_inverse(const Vec& x, const Vec& ft,
                                     const Vec& th) const {
  Frame fr = frame(x, ft);
  Mat ub = m_->ubar(th);
  Mat vb = ub.inverse();
  int nm = m_->n_m, nv = m_->n_v, ng = m_->n_g;
  int n = nm + nv + ng;
  Mat g(n, n);
  g.topLeftCorner(nm, nm) = fr.h_up;
  g.block(0, nm, nm, nv) = fr.quad_xv;
  g.block(0, nm + nv, nm, ng) =
      -fr.h_up * fr.conn_p.transpose() * vb.transpose();
  g.block(nm, nm, nv, nv) = fr.quad_vv;
  g.block(nm, nm + nv, nv, ng) = -fr.kv * fr.lam_sq * vb.transpose();
  g.block(nm + nv, nm + nv, ng, ng) = vb * fr.lam_sq * vb.transpose();
  g.block(nm, 0, nv, nm) = g.block(0, nm, nm, nv).transpose();
  g.block(nm + nv, 0, ng, nm) = g.block(0, nm + nv, nm, ng).transpose();
  g.block(nm + nv, nm, ng, nv) = g.block(nm, nm + nv, nv, ng).transpose();
  return g;
}

Geometry::DetFact Geometry::det_factorization(const Vec& x, const Vec& ft,
                                              const Vec& th) const {
  Frame fr = frame(x, ft);
  Mat ub = m_->ubar(th);
  DetFact out;
  out.det_full = adapted_metric(x, ft, th).determinant();
  out.det_d = fr.detd;
  out.det_ubar = ub.determinant();
  out.hdet = fr.hdet;
  return out;
}

void Geometry::from_adapted(const Vec& x, const Vec& ft, const Vec& th,
                            Vec& q, Vec& f) const {
  q = m_->act_p(m_->section(x), th);
  f = m_->rep_v(th) * ft;
}

bool Geometry::to_adapted(const Vec& q, const Vec& f, Vec& x, Vec& ft,
                          Vec& th) const {
  if (m_->to_adapted_closed) {
    if (!m_->to_adapted_closed(q, f, x, ft, th)) return false;
    return m_->in_chart(th) && admissible(x, ft);
  }
  return to_adapted_numeric(q, f, x, ft, th);
}

bool Geometry::to_adapted_numeric(const Vec& q, const Vec& f, Vec& x, Vec& ft,
                                  Vec& th) const {
  const ModelSpec& m = *m_;
  double scale = std::max(1.0, q.lpNorm<Eigen::Infinity>());
  auto residual = [&](const Vec& t) -> Vec {
    return m.gauge(m.act_p(q, m.inverse(t)));
  };

  // Candidate starts: identity plus a fixed pseudo-random sweep of the chart.
  std::vector<Vec> starts;
  starts.push_back(m.identity_th);
  std::mt19937_64 eng(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  int n_grid = (m.n_g == 1) ? 24 : 160;
  for (int i = 0; i < n_grid; ++i) {
    Vec t(m.n_g);
    for (int k = 0; k < m.n_g; ++k) t[k] = uni(eng) * 3.0;
    if (m.in_chart(t)) starts.push_back(t);
  }
  std::sort(starts.begin(), starts.end(), [&](const Vec& a, const Vec& b) {
    return residual(a).norm() < residual(b).norm();
  });

  // The gauge residual can vanish on several section branches; keep trying
  // starts until a root lands on the admitted one.
  for (const auto& start : starts) {
    Vec t = start;
    for (int it = 0; it < 60; ++it) {
      Vec r = residual(t);
      double rn = r.norm();
      if (rn < 1e-12 * scale) break;
      Mat jac = fd_jacobian(residual, t, m.n_g, 1e-7);
      Vec step = jac.partialPivLu().solve(-r);
      double lam = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 30; ++bt) {
        Vec tn = t + lam * step;
        if (m.in_chart(tn) && residual(tn).norm() < rn) {
          t = tn;
          moved = true;
          break;
        }
        lam *= 0.5;
      }
      if (!moved) break;
    }
    if (residual(t).norm() > 1e-10 * scale) continue;
    Vec qs = m.act_p(q, m.inverse(t));
    Vec xc = m.section_coord(qs);
    Vec ftc = m.rep_v(m.inverse(t)) * f;
    if (!m.in_chart(t) || !admissible(xc, ftc)) continue;
    x = xc;
    ft = ftc;
    th = t;
    return true;
  }
  return false;
}

bool Geometry::admissible(const Vec& x, const Vec& ft) const {
  const DomainGuard& g = m_->guard;
  if (!x.allFinite() || !ft.allFinite()) return false;
  if (x[0] < g.x_min) return false;
  double r = std::sqrt(x.squaredNorm() + ft.squaredNorm());
  return r <= g.radius_max;
}

bool Geometry::admissible_total(const Vec& q, const Vec& f) const {
  const DomainGuard& g = m_->guard;
  if (!q.allFinite() || !f.allFinite()) return false;
  if (q.norm() < g.x_min) return false;
  double r = std::sqrt(q.squaredNorm() + f.squaredNorm());
  return r <= g.radius_max;
}

void random_adapted_point(const ModelSpec& m, std::mt19937_64& rng, Vec& x,
                          Vec& ft, Vec& th) {
  std::uniform_real_distribution<double> ux(0.4, 2.0);
  std::uniform_real_distribution<double> uf(-1.2, 1.2);
  std::uniform_real_distribution<double> ut(-0.8, 0.8);
  x.resize(m.n_m);
  ft.resize(m.n_v);
  th.resize(m.n_g);
  for (;;) {
    for (int i = 0; i < m.n_m; ++i) x[i] = ux(rng);
    for (int i = 0; i < m.n_v; ++i) ft[i] = uf(rng);
    for (int i = 0; i < m.n_g; ++i) th[i] = ut(rng);
    if (m.in_chart(th)) return;
  }
}

}  // namespace fibermc
