#pragma once

#include <string>
#include <vector>

#include "core/holonomy.hpp"
#include "core/sde.hpp"

namespace fibermc {

// Scalar Gaussian envelope used to smear endpoint comparisons on the
// reduced space.
struct TestFunction {
  Vec cx_t, cf_t;
  double width = 0.70710678118654752;  // exp(-|z - c|^2) by default

  double log_eval(const Vec& x, const Vec& ft) const {
    double r2 = (x - cx_t).squaredNorm() + (ft - cf_t).squaredNorm();
    return -r2 / (2.0 * width * width);
  }
  double eval(const Vec& x, const Vec& ft) const {
    return std::exp(log_eval(x, ft));
  }
  Vec grad(const Vec& x, const Vec& ft) const {
    int nm = static_cast<int>(x.size()), nv = static_cast<int>(ft.size());
    Vec p(nm + nv);
    p.head(nm) = x - cx_t;
    p.tail(nv) = ft - cf_t;
    return Vec(-(p / (width * width)) * eval(x, ft));
  }
  Mat hess(const Vec& x, const Vec& ft) const {
    int nm = static_cast<int>(x.size()), nv = static_cast<int>(ft.size());
    Vec p(nm + nv);
    p.head(nm) = x - cx_t;
    p.tail(nv) = ft - cf_t;
    double w2 = width * width;
    Mat h = (p * p.transpose()) / (w2 * w2);
    h -= Mat::Identity(nm + nv, nm + nv) / w2;
    return Mat(h * eval(x, ft));
  }
};

struct GreenEstimate {
  CMat value;
  Mat se_re, se_im;
  int64_t n_alive = 0;
  int64_t n_dead = 0;
  double elapsed_s = 0.0;
};

// Kernel estimate along the projected quotient process, transport weighted
// with the locked-inertia volume convention.
std::vector<GreenEstimate> run_projected(const Geometry& g, const RunParams& p,
                                         const std::vector<const Irrep*>& irs,
                                         const Vec& x0, const Vec& f0,
                                         const TestFunction& phi);

// Kernel estimate along the intrinsic quotient process. with_jacobian adds
// the change-of-normalization path weight (including its endpoint part);
// end_detd_power multiplies each sample by detd(end)^power.
std::vector<GreenEstimate> run_intrinsic(const Geometry& g, const RunParams& p,
                                         const std::vector<const Irrep*>& irs,
                                         const Vec& x0, const Vec& f0,
                                         const TestFunction& phi,
                                         bool with_jacobian,
                                         double end_detd_power);

// Ambient-space estimate of the same smeared kernel: run the flat product
// process, transfer endpoints to adapted coordinates and average
// weight * phi(end) * rep(th_end)^T * (detd_end * detd_start)^{-1/4}.
std::vector<GreenEstimate> run_ambient_lift(
    const Geometry& g, const RunParams& p,
    const std::vector<const Irrep*>& irs, const Vec& q0, const Vec& f0,
    const TestFunction& phi);

struct Comparison {
  double z_max = 0.0;
  double max_abs_diff = 0.0;
  double dominant_mag = 0.0;
  double dominant_se = 0.0;
  bool power_ok = true;  // combined stderr below 10% of the larger magnitude
};

Comparison compare_estimates(const GreenEstimate& a, const GreenEstimate& b);
Comparison compare_to_exact(const GreenEstimate& a, const CMat& exact);

struct GirsanovCheck {
  std::vector<GreenEstimate> lhs;  // projected side
  std::vector<GreenEstimate> rhs;  // intrinsic side with path weight
  std::vector<Comparison> cmp;
};
GirsanovCheck girsanov_check(const Geometry& g, const RunParams& p,
                             const std::vector<const Irrep*>& irs,
                             const Vec& x0, const Vec& f0,
                             const TestFunction& phi);

struct RelationCheck {
  std::vector<GreenEstimate> lhs;  // reduced side, inertia-power weighted
  std::vector<GreenEstimate> rhs;  // ambient lift
  std::vector<Comparison> cmp;
};
RelationCheck relation_check(const Geometry& g, const RunParams& p,
                             const std::vector<const Irrep*>& irs,
                             const Vec& x0, const Vec& f0,
                             const TestFunction& phi);

// Deterministic short-time check of the full matrix generator: one Euler
// step integrated by tensor Gauss-Hermite quadrature at dt and dt/2,
// compared (with Richardson extrapolation) against the assembled generator
// applied to phi * Identity.
struct GeneratorCheck {
  CMat a_coarse, a_fine, richardson, target;
  double rel_err_coarse = 0.0;
  double rel_err_fine = 0.0;
  double rel_err_richardson = 0.0;
  double err_ratio = 0.0;  // coarse error over fine error, 2 when first order
  int nodes_per_dim = 0;
  int64_t nodes_total = 0;
};
GeneratorCheck generator_fd_check(const Geometry& g, const RunParams& p,
                                  const Irrep& ir, Weighting variant,
                                  const Vec& x0, const Vec& f0,
                                  const TestFunction& phi, double dt_coarse,
                                  int nodes_per_dim = 16);

// The assembled matrix generator applied to phi * Identity at (x0, f0).
CMat generator_apply(const Geometry& g, const RunParams& p, const Irrep& ir,
                     Weighting variant, const Vec& x0, const Vec& f0,
                     const TestFunction& phi);

// Nodes and weights for expectations against a standard normal.
void gauss_hermite(int n, std::vector<double>& nodes,
                   std::vector<double>& weights);

// Pathwise comparison of the two representations of the volume-weight
// factor: the stochastic-integral exponential accumulated step by step
// against its closed form (endpoint ratio plus drift integral). Both ride
// the same discrete path; the discrepancy measures the discretization
// error of the pathwise identity relating them.
struct ItoJacobianCheck {
  double mean_absdiff_coarse = 0.0;
  double mean_absdiff_fine = 0.0;
  double ratio = 0.0;  // fine over coarse
  double bias_coarse = 0.0;  // |mean signed difference|, supplementary
  double bias_fine = 0.0;
  double bias_ratio = 0.0;
  int64_t n_alive_coarse = 0;
  int64_t n_alive_fine = 0;
};
ItoJacobianCheck ito_jacobian_check(const Geometry& g, const RunParams& p,
                                    const Vec& x0, const Vec& f0,
                                    double dt_coarse);

// Endpoint record of one reduced path, for CSV dumps and plots. z holds the
// (0,0) transport entry per irrep.
struct PathDump {
  int64_t path = 0;
  bool alive = false;
  double log_jacobian = 0.0;
  double log_potential = 0.0;
  Vec x_end, f_end;
  std::vector<cx> z;
};
std::vector<PathDump> sample_reduced_paths(const Geometry& g,
                                           const RunParams& p,
                                           const std::vector<const Irrep*>& irs,
                                           const Vec& x0, const Vec& f0,
                                           DriftKind kind, Weighting variant,
                                           int64_t n);

}  // namespace fibermc
