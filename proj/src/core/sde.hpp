#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "core/geometry.hpp"
#include "core/rng.hpp"

namespace fibermc {

struct RunParams {
  double mu = 1.0;
  double kappa = 1.0;
  double mass = 1.0;
  double t_a = 0.0;
  double t_b = 0.25;
  double dt = 1e-3;
  int64_t n_paths = 10000;
  uint64_t seed = 1;
  int workers = 1;

  int n_steps() const {
    double span = t_b - t_a;
    if (span <= 0.0 || dt <= 0.0) {
      throw std::invalid_argument("time span and dt must be positive");
    }
    int n = static_cast<int>(std::lround(span / dt));
    if (n < 1 || std::abs(n * dt - span) > 1e-9 * std::max(1.0, span)) {
      throw std::invalid_argument("time span must be a multiple of dt");
    }
    return n;
  }
};

// Which quotient diffusion to run: the projection of the ambient process
// (stationary weight includes the locked-inertia determinant) or the
// intrinsic quotient-metric diffusion.
enum class DriftKind { Projected, Intrinsic };

struct PathResult {
  Vec x_end, f_end;
  bool alive = true;
  int steps_done = 0;
};

// Euler walk of the reduced diffusion. on(step, frame, derivs, dwx, dwf) is
// invoked before each state update with the frame at the pre-step point;
// dwx/dwf are the raw Brownian increments (normals times sqrt(dt)).
template <class OnStep>
PathResult run_reduced_path(const Geometry& g, const RunParams& p,
                            DriftKind kind, Vec x, Vec ft, int64_t path_index,
                            OnStep&& on) {
  PathResult pr;
  const ModelSpec& m = g.model();
  const int n = p.n_steps();
  const int nm = m.n_m, nv = m.n_v;
  const double sdt = std::sqrt(p.dt);
  const double drift_scale = 0.5 * p.mu * p.mu * p.kappa * p.dt;
  const double noise_scale = p.mu * std::sqrt(p.kappa);
  const double dtol = m.guard.gauge_det_tol;

  Frame fr;
  FrameDerivs dv;
  Vec dwx(nm), dwf(nv);
  double buf[2 * kMaxDim];

  for (int k = 0; k < n; ++k) {
    if (!g.admissible(x, ft)) {
      pr.alive = false;
      break;
    }
    g.frame(x, ft, fr);
    double scale = std::max(
        {1.0, x.lpNorm<Eigen::Infinity>(), ft.lpNorm<Eigen::Infinity>()});
    if (std::abs(fr.gauge_det) < dtol * std::pow(scale, m.n_g)) {
      pr.alive = false;
      break;
    }
    g.derivs(fr, dv);

    NormalStream ns(p.seed, static_cast<uint64_t>(path_index),
                    static_cast<uint32_t>(k));
    ns.fill(buf, nm + nv);
    for (int i = 0; i < nm; ++i) dwx[i] = sdt * buf[i];
    for (int i = 0; i < nv; ++i) dwf[i] = sdt * buf[nm + i];

    on(k, fr, dv, dwx, dwf);

    Vec b = (kind == DriftKind::Projected) ? g.full_drift(fr, dv)
                                           : g.intrinsic_drift(fr, dv);
    x += drift_scale * b.head(nm) + noise_scale * (fr.xx * dwx);
    ft += drift_scale * b.tail(nv) +
          noise_scale * (fr.xvx * dwx + fr.xv * dwf);
    pr.steps_done++;
  }
  if (pr.alive && !g.admissible(x, ft)) pr.alive = false;
  pr.x_end = x;
  pr.f_end = ft;
  return pr;
}

// Euler walk of the ambient product-space process (constant metrics, so the
// drift vanishes). on(step, q, f) sees the pre-step state.
template <class OnStep>
PathResult run_total_path(const Geometry& g, const RunParams& p, Vec q, Vec f,
                          int64_t path_index, OnStep&& on) {
  PathResult pr;
  const ModelSpec& m = g.model();
  const int n = p.n_steps();
  const int np = m.n_p, nv = m.n_v;
  const double sdt = std::sqrt(p.dt);
  const double noise_scale = p.mu * std::sqrt(p.kappa);

  Vec dwq(np), dwf(nv);
  double buf[2 * kMaxDim];

  for (int k = 0; k < n; ++k) {
    if (!g.admissible_total(q, f)) {
      pr.alive = false;
      break;
    }
    NormalStream ns(p.seed, static_cast<uint64_t>(path_index),
                    static_cast<uint32_t>(k));
    ns.fill(buf, np + nv);
    for (int i = 0; i < np; ++i) dwq[i] = sdt * buf[i];
    for (int i = 0; i < nv; ++i) dwf[i] = sdt * buf[np + i];

    on(k, q, f);

    q += noise_scale * (g.xp_total() * dwq);
    f += noise_scale * (g.xv_total() * dwf);
    pr.steps_done++;
  }
  if (pr.alive && !g.admissible_total(q, f)) pr.alive = false;
  pr.x_end = q;
  pr.f_end = f;
  return pr;
}

// Observer-based wrapper around the templated walkers.
enum class ProcessKind { Total, ReducedProjected, ReducedIntrinsic };

struct StepContext {
  int64_t path_index = 0;
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  const Frame* frame = nullptr;        // reduced walks only
  const FrameDerivs* derivs = nullptr; // reduced walks only
  const Vec* dwx = nullptr;
  const Vec* dwf = nullptr;
  const Vec* q = nullptr;              // ambient walk only
  const Vec* f = nullptr;              // ambient walk only
};

class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_step(const StepContext&) = 0;
  virtual void on_path_end(const PathResult&) {}
};

PathResult simulate_path(const Geometry& g, const RunParams& p,
                         ProcessKind kind, const Vec& start_a,
                         const Vec& start_b, int64_t path_index,
                         const std::vector<StepObserver*>& observers);

}  // namespace fibermc
