#include "core/sde.hpp"

namespace fibermc {

PathResult simulate_path(const Geometry& g, const RunParams& p,
                         ProcessKind kind, const Vec& start_a,
                         const Vec& start_b, int64_t path_index,
                         const std::vector<StepObserver*>& observers) {
  PathResult pr;
  if (kind == ProcessKind::Total) {
    pr = run_total_path(g, p, start_a, start_b, path_index,
                        [&](int k, const Vec& q, const Vec& f) {
                          StepContext c;
                          c.path_index = path_index;
                          c.step = k;
                          c.t = p.t_a + k * p.dt;
                          c.dt = p.dt;
                          c.q = &q;
                          c.f = &f;
                          for (auto* o : observers) o->on_step(c);
                        });
  } else {
    DriftKind dk = (kind == ProcessKind::ReducedProjected)
                       ? DriftKind::Projected
                       : DriftKind::Intrinsic;
    pr = run_reduced_path(
        g, p, dk, start_a, start_b, path_index,
        [&](int k, const Frame& fr, const FrameDerivs& dv, const Vec& dwx,
            const Vec& dwf) {
          StepContext c;
          c.path_index = path_index;
          c.step = k;
          c.t = p.t_a + k * p.dt;
          c.dt = p.dt;
          c.frame = &fr;
          c.derivs = &dv;
          c.dwx = &dwx;
          c.dwf = &dwf;
          for (auto* o : observers) o->on_step(c);
        });
  }
  for (auto* o : observers) o->on_path_end(pr);
  return pr;
}

}  // namespace fibermc
