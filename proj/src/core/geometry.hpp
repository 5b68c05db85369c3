#pragma once

#include <random>

#include "core/linalg.hpp"
#include "core/model.hpp"

namespace fibermc {

// Pointwise geometric data at an on-section point (x, ft). Everything the
// step kernels need is assembled once per step and reused by the state
// update, the transport factor and the volume-weight accumulators.
struct Frame {
  Vec x;      // transverse coordinates (n_m)
  Vec ft;     // internal coordinates (n_v)
  Vec qs;     // section point in the ambient chart (n_p)
  Vec gv_ft;  // metric_v * ft

  Mat kp;   // action generators on the ambient factor at qs: n_p x n_g
  Mat kv;   // action generators on the internal factor at ft: n_v x n_g

  Mat inertia_p;  // kp' Gp kp
  Mat inertia_v;  // kv' Gv kv
  Mat inertia;    // sum of the two (locked inertia)
  Mat inertia_p_inv, inertia_inv;
  double detd = 0.0;  // det(inertia)

  Mat conn;    // inertia^{-1} kp' Gp jac: n_g x n_m
  Mat conn_v;  // inertia^{-1} kv' Gv: n_g x n_v
  Mat conn_p;  // inertia_p^{-1} kp' Gp jac: n_g x n_m

  Mat gauge_phi;  // gauge_jac * kp: n_g x n_g
  Mat gauge_lam;  // gauge_phi^{-1} gauge_jac: n_g x n_p
  Mat lam_sq;     // gauge_lam Gp^{-1} gauge_lam': n_g x n_g
  double gauge_det = 0.0;

  Mat ht_low;  // transverse metric orthogonal to the full locked inertia
  Mat h_low;   // transverse metric orthogonal to the ambient orbit only
  Mat h_up;    // inverse of h_low

  Mat w_va;      // kv * conn_p: n_v x n_m
  Mat quad_xv;   // h_up * w_va': transverse-internal block of the inverse
  Mat quad_vv;   // Gv^{-1} + kv lam_sq kv': internal block of the inverse
  Mat noise_vv;  // Gv^{-1} + kv inertia_p^{-1} kv': internal noise square
  Mat xx;        // chol(h_up)
  Mat xv;        // chol(noise_vv)
  Mat xvx;       // w_va * xx

  double hdet = 0.0;   // det of the reduced (transverse + internal) metric
  double sigma = 0.0;  // ln detd
  Vec sig_x, sig_f;    // gradient of sigma
};

// Divergence-type first derivatives of frame data, weighted by the reduced
// volume sqrt(hdet) or by sqrt(detd * hdet).
struct FrameDerivs {
  Vec div_h;    // n_m: divergence of the transverse inverse block
  Vec divk_h;   // n_g: internal divergence of kv
  Vec diva_h;   // n_g: transverse divergence of h_up conn_p'
  Vec divh_f;   // n_v: internal gradient of ln sqrt(hdet)
  Vec dnn;      // n_v: internal divergence of the lam_sq part of quad_vv
  Vec divk_dh;  // n_g: divk with the sqrt(detd*hdet) weight
  Vec diva_dh;  // n_g: diva with the sqrt(detd*hdet) weight
  double lap_sigma = 0.0;      // Laplace-Beltrami of sigma on the quotient
  double grad_sigma_sq = 0.0;  // quadratic form of grad sigma
};

class Geometry {
 public:
  explicit Geometry(const ModelSpec& m);

  const ModelSpec& model() const { return *m_; }

  // Frame at an on-section point; uses the model's closed form when present.
  void frame(const Vec& x, const Vec& ft, Frame& fr) const;
  Frame frame(const Vec& x, const Vec& ft) const {
    Frame fr;
    frame(x, ft, fr);
    return fr;
  }

  // Divergence package; analytic closure when the model has one, otherwise
  // central differences with relative step fd_step.
  void derivs(const Frame& fr, FrameDerivs& dv) const;

  // Drift of the intrinsic quotient process (volume-weight sqrt(hdet)).
  Vec intrinsic_drift(const Frame& fr, const FrameDerivs& dv) const;
  // Drift of the projected process (volume-weight sqrt(detd * hdet)).
  Vec full_drift(const Frame& fr, const FrameDerivs& dv) const;
  // Apply the reduced inverse-metric block to a cotangent (n_m + n_v).
  Vec quad_apply(const Frame& fr, const Vec& cov) const;

  // Full adapted-coordinate metric, its closed-form inverse, and the
  // determinant factorization, at (x, ft, th). Block order: transverse,
  // internal, group.
  Mat adapted_metric(const Vec& x, const Vec& ft, const Vec& th) const;
  Mat adapted_metric_inverse(const Vec& x, const Vec& ft, const Vec& th) const;
  struct DetFact {
    double det_full;   // det of the adapted metric
    double det_d;      // locked-inertia factor
    double det_ubar;   // group chart frame factor (enters squared)
    double hdet;       // reduced-metric factor
  };
  DetFact det_factorization(const Vec& x, const Vec& ft, const Vec& th) const;

  // Chart maps between ambient and adapted coordinates.
  void from_adapted(const Vec& x, const Vec& ft, const Vec& th, Vec& q,
                    Vec& f) const;
  bool to_adapted(const Vec& q, const Vec& f, Vec& x, Vec& ft, Vec& th) const;
  // Newton/grid solve that ignores any closed form; used for cross-checks.
  bool to_adapted_numeric(const Vec& q, const Vec& f, Vec& x, Vec& ft,
                          Vec& th) const;

  // Domain guard for reduced states; false means the path must be flagged.
  bool admissible(const Vec& x, const Vec& ft) const;
  bool admissible_total(const Vec& q, const Vec& f) const;

  // ln det(inertia) as a bare function of the reduced point; cheap enough
  // for nested differencing.
  double sigma_at(const Vec& x, const Vec& ft) const;

  double fd_step = 1e-5;

 private:
  void frame_generic(const Vec& x, const Vec& ft, Frame& fr) const;
  void derivs_fd(const Frame& fr, FrameDerivs& dv) const;

  const ModelSpec* m_;
  Mat gp_inv_, gv_inv_;
  Mat xv_total_;  // chol(Gv^{-1}) for the ambient-space simulator
  Mat xp_total_;  // chol(Gp^{-1}), constant for flat models
  double det_gv_ = 1.0;

 public:
  const Mat& gv_inv() const { return gv_inv_; }
  const Mat& gp_inv() const { return gp_inv_; }
  const Mat& xv_total() const { return xv_total_; }
  const Mat& xp_total() const { return xp_total_; }
};

// Draws an adapted point well inside the admitted domain: x componentwise in
// [0.4, 2.0], fibre coordinates in [-1.2, 1.2], chart coordinates in
// [-0.8, 0.8], resampled until the chart accepts.
void random_adapted_point(const ModelSpec& m, std::mt19937_64& rng, Vec& x,
                          Vec& ft, Vec& th);

}  // namespace fibermc
