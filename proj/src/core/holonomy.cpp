#include "core/holonomy.hpp"

namespace fibermc {

namespace {

// Coefficients of the J-linear zeroth-order drift term for the requested
// weighting: diva + lam_sq * divk, with the matching volume weight.
Vec jlin_coeff(const Frame& fr, const FrameDerivs& dv, Weighting w) {
  if (w == Weighting::WithInertia) {
    return dv.diva_dh + fr.lam_sq * dv.divk_dh;
  }
  return dv.diva_h + fr.lam_sq * dv.divk_h;
}

}  // namespace

void transport_ops(const Frame& fr, const FrameDerivs& dv, const Irrep& ir,
                   double mu, double kappa, Weighting w, TransportOps& out) {
  const int ng = static_cast<int>(ir.gen.size());
  const int nm = static_cast<int>(fr.xx.cols());
  const int nv = static_cast<int>(fr.xv.cols());
  const double mu2k = mu * mu * kappa;
  const double noise = -mu * std::sqrt(kappa);
  out.dim = ir.dim;
  out.nlx = nm;
  out.nlv = nv;

  Vec cj = jlin_coeff(fr, dv, w);
  CMat acc = CMat::Zero(ir.dim, ir.dim);
  for (int a = 0; a < ng; ++a) acc -= 0.5 * cj[a] * ir.gen[a];
  for (int a = 0; a < ng; ++a)
    for (int b = 0; b < ng; ++b)
      acc += 0.5 * fr.inertia_inv(a, b) * (ir.gen[a] * ir.gen[b]);
  out.drift = mu2k * acc;

  Mat rx = fr.conn_p * fr.xx;  // n_g x n_m
  Mat rv = fr.conn_v * fr.xv;  // n_g x n_v
  out.comp = CMat::Zero(ir.dim, ir.dim);
  for (int i = 0; i < nm; ++i) {
    CMat l = CMat::Zero(ir.dim, ir.dim);
    for (int a = 0; a < ng; ++a) l += noise * rx(a, i) * ir.gen[a];
    out.lx[i] = l;
    out.comp += 0.5 * (l * l);
  }
  for (int j = 0; j < nv; ++j) {
    CMat l = CMat::Zero(ir.dim, ir.dim);
    for (int a = 0; a < ng; ++a) l += noise * rv(a, j) * ir.gen[a];
    out.lv[j] = l;
    out.comp += 0.5 * (l * l);
  }
}

void transport_ops1(const Frame& fr, const FrameDerivs& dv, const Irrep& ir,
                    double mu, double kappa, Weighting w, TransportOps1& out) {
  const int ng = static_cast<int>(ir.gen.size());
  const int nm = static_cast<int>(fr.xx.cols());
  const int nv = static_cast<int>(fr.xv.cols());
  const double mu2k = mu * mu * kappa;
  const double noise = -mu * std::sqrt(kappa);
  out.nlx = nm;
  out.nlv = nv;

  cx gen[kMaxDim];
  for (int a = 0; a < ng; ++a) gen[a] = ir.gen[a](0, 0);

  Vec cj = jlin_coeff(fr, dv, w);
  cx acc(0.0, 0.0);
  for (int a = 0; a < ng; ++a) acc -= 0.5 * cj[a] * gen[a];
  for (int a = 0; a < ng; ++a)
    for (int b = 0; b < ng; ++b)
      acc += 0.5 * fr.inertia_inv(a, b) * gen[a] * gen[b];
  out.drift = mu2k * acc;

  Mat rx = fr.conn_p * fr.xx;
  Mat rv = fr.conn_v * fr.xv;
  out.comp = cx(0.0, 0.0);
  for (int i = 0; i < nm; ++i) {
    cx l(0.0, 0.0);
    for (int a = 0; a < ng; ++a) l += noise * rx(a, i) * gen[a];
    out.lx[i] = l;
    out.comp += 0.5 * l * l;
  }
  for (int j = 0; j < nv; ++j) {
    cx l(0.0, 0.0);
    for (int a = 0; a < ng; ++a) l += noise * rv(a, j) * gen[a];
    out.lv[j] = l;
    out.comp += 0.5 * l * l;
  }
}

void gamma_terms(const Frame& fr, const FrameDerivs& dv, const Irrep& ir,
                 GammaTerms& out) {
  const int ng = static_cast<int>(ir.gen.size());
  const int nm = static_cast<int>(fr.conn_p.cols());
  const int nv = static_cast<int>(fr.conn_v.cols());
  const CMat id = CMat::Identity(ir.dim, ir.dim);
  out.n3 = nm;
  out.n4 = nv;

  Vec ks = fr.kv.transpose() * fr.sig_f;  // n_g
  for (int n = 0; n < nm; ++n) {
    CMat g = CMat::Zero(ir.dim, ir.dim);
    double shift = 0.0;
    for (int a = 0; a < ng; ++a) {
      g += fr.conn_p(a, n) * ir.gen[a];
      shift += fr.conn_p(a, n) * ks[a];
    }
    g -= (0.25 * fr.sig_x[n] + 0.25 * shift) * id;
    out.g3[n] = g;
  }
  for (int c = 0; c < nv; ++c) {
    CMat g = CMat::Zero(ir.dim, ir.dim);
    for (int a = 0; a < ng; ++a) g += fr.conn_v(a, c) * ir.gen[a];
    g -= 0.25 * fr.sig_f[c] * id;
    out.g4[c] = g;
  }

  Vec cj = dv.diva_h + fr.lam_sq * dv.divk_h;
  CMat m = -(dv.grad_sigma_sq / 32.0) * id;
  for (int a = 0; a < ng; ++a) m -= 0.5 * cj[a] * ir.gen[a];
  for (int a = 0; a < ng; ++a)
    for (int b = 0; b < ng; ++b)
      m += 0.5 * fr.inertia_inv(a, b) * (ir.gen[a] * ir.gen[b]);
  out.mprime = m;
}

CMat mprime_matched(const Frame& fr, const FrameDerivs& dv, const Irrep& ir) {
  const int ng = static_cast<int>(ir.gen.size());
  GammaTerms gt;
  gamma_terms(fr, dv, ir, gt);

  Vec cj = dv.diva_dh + fr.lam_sq * dv.divk_dh;
  CMat m = CMat::Zero(ir.dim, ir.dim);
  for (int a = 0; a < ng; ++a) m -= 0.5 * cj[a] * ir.gen[a];

  Mat quad_g = fr.inertia_p_inv + fr.conn_p * fr.h_up * fr.conn_p.transpose();
  for (int a = 0; a < ng; ++a)
    for (int b = 0; b < ng; ++b)
      m += 0.5 * quad_g(a, b) * (ir.gen[a] * ir.gen[b]);

  for (int n = 0; n < gt.n3; ++n)
    for (int k = 0; k < gt.n3; ++k)
      m -= 0.5 * fr.h_up(n, k) * (gt.g3[n] * gt.g3[k]);
  for (int a = 0; a < gt.n4; ++a)
    for (int c = 0; c < gt.n4; ++c)
      m -= 0.5 * fr.noise_vv(a, c) * (gt.g4[a] * gt.g4[c]);
  return m;
}

}  // namespace fibermc
