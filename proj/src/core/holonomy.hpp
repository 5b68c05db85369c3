#pragma once

#include <array>

#include "core/geometry.hpp"

namespace fibermc {

// Stationary volume weight of the kernel the transport factor rides along:
// the projection of the ambient process carries the locked-inertia
// determinant, the intrinsic quotient diffusion does not.
enum class Weighting { WithInertia, Intrinsic };

// Per-step pieces of the path-ordered transport factor for one irrep:
//   factor = I + (drift + comp) dt + sum_i lx[i] dwx[i] + sum_j lv[j] dwf[j].
// comp is half the sum of squared noise coefficients; it reconciles the
// plain Euler product with the product-of-exponentials reading of the
// transport in the weak limit.
struct TransportOps {
  int dim = 1;
  int nlx = 0, nlv = 0;
  CMat drift, comp;
  std::array<CMat, kMaxDim> lx, lv;
};

// Scalar fast path for one-dimensional irreps.
struct TransportOps1 {
  cx drift{0.0, 0.0}, comp{0.0, 0.0};
  int nlx = 0, nlv = 0;
  std::array<cx, kMaxDim> lx{}, lv{};
};

void transport_ops(const Frame& fr, const FrameDerivs& dv, const Irrep& ir,
                   double mu, double kappa, Weighting w, TransportOps& out);
void transport_ops1(const Frame& fr, const FrameDerivs& dv, const Irrep& ir,
                    double mu, double kappa, Weighting w, TransportOps1& out);

class Transport {
 public:
  void reset(int dim) {
    z = CMat::Identity(dim, dim);
    log_scale = 0.0;
  }
  void step(const TransportOps& o, const Vec& dwx, const Vec& dwf, double dt) {
    CMat f = CMat::Identity(o.dim, o.dim) + (o.drift + o.comp) * dt;
    for (int i = 0; i < o.nlx; ++i) f += o.lx[i] * dwx[i];
    for (int j = 0; j < o.nlv; ++j) f += o.lv[j] * dwf[j];
    z = (f * z).eval();
    double m = max_abs(z);
    if (m > 1e100) {
      z *= 1e-100;
      log_scale += std::log(1e100);
    }
  }
  CMat z;
  double log_scale = 0.0;
};

class Transport1 {
 public:
  void reset() {
    z = cx(1.0, 0.0);
    log_scale = 0.0;
  }
  void step(const TransportOps1& o, const Vec& dwx, const Vec& dwf,
            double dt) {
    cx f = cx(1.0, 0.0) + (o.drift + o.comp) * dt;
    for (int i = 0; i < o.nlx; ++i) f += o.lx[i] * dwx[i];
    for (int j = 0; j < o.nlv; ++j) f += o.lv[j] * dwf[j];
    z *= f;
    double m = std::abs(z);
    if (m > 1e100) {
      z *= 1e-100;
      log_scale += std::log(1e100);
    }
  }
  cx z{1.0, 0.0};
  double log_scale = 0.0;
};

// First-order transport coefficients expressed through the gauge-shifted
// frame; used by the algebraic cross-checks of the drift matrix.
struct GammaTerms {
  int n3 = 0, n4 = 0;
  std::array<CMat, kMaxDim> g3, g4;
  CMat mprime;  // drift matrix of the intrinsic transport, J-quadratic form
};

void gamma_terms(const Frame& fr, const FrameDerivs& dv, const Irrep& ir,
                 GammaTerms& out);

// Independent assembly of the same drift matrix from the projected-kernel
// coefficients minus the quadratic gamma contraction.
CMat mprime_matched(const Frame& fr, const FrameDerivs& dv, const Irrep& ir);

// Log-rate of the path weight relating the two kernel normalizations.
inline double jac_rate(const FrameDerivs& dv, double mu2k) {
  return -0.125 * mu2k * (dv.lap_sigma + 0.25 * dv.grad_sigma_sq);
}

}  // namespace fibermc
