#include "core/greens.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>

#include "core/exec.hpp"

namespace fibermc {
namespace {

constexpr int kMaxIrreps = 8;

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Splitmix-style stream split so paired ensembles never share normals.
uint64_t derive_seed(uint64_t seed, uint64_t tag) {
  uint64_t z = seed ^ (tag * 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct Acc {
  bool ready = false;
  int ni = 0;
  std::array<CMat, kMaxIrreps> sum;
  std::array<Mat, kMaxIrreps> sum2re, sum2im;
  int64_t alive = 0, dead = 0;

  void ensure(const std::vector<const Irrep*>& irs) {
    if (ready) return;
    ni = static_cast<int>(irs.size());
    for (int t = 0; t < ni; ++t) {
      int d = irs[t]->dim;
      sum[t] = CMat::Zero(d, d);
      sum2re[t] = Mat::Zero(d, d);
      sum2im[t] = Mat::Zero(d, d);
    }
    ready = true;
  }
  void add(int t, const CMat& v) {
    sum[t] += v;
    sum2re[t] += v.real().cwiseProduct(v.real());
    sum2im[t] += v.imag().cwiseProduct(v.imag());
  }
  void merge(const Acc& o) {
    alive += o.alive;
    dead += o.dead;
    if (!o.ready) return;
    if (!ready) {
      ni = o.ni;
      for (int t = 0; t < ni; ++t) {
        sum[t] = o.sum[t];
        sum2re[t] = o.sum2re[t];
        sum2im[t] = o.sum2im[t];
      }
      ready = true;
      return;
    }
    for (int t = 0; t < ni; ++t) {
      sum[t] += o.sum[t];
      sum2re[t] += o.sum2re[t];
      sum2im[t] += o.sum2im[t];
    }
  }
};

std::vector<GreenEstimate> finalize(const Acc& a, int ni, double elapsed) {
  std::vector<GreenEstimate> out(ni);
  for (int t = 0; t < ni; ++t) {
    GreenEstimate& e = out[t];
    e.n_alive = a.alive;
    e.n_dead = a.dead;
    e.elapsed_s = elapsed;
    int d = a.ready ? static_cast<int>(a.sum[t].rows()) : 1;
    if (!a.ready || a.alive < 1) {
      e.value = CMat::Zero(d, d);
      e.se_re = Mat::Constant(d, d, std::numeric_limits<double>::infinity());
      e.se_im = e.se_re;
      continue;
    }
    double n = static_cast<double>(a.alive);
    e.value = a.sum[t] / n;
    if (a.alive < 2) {
      e.se_re = Mat::Constant(d, d, std::numeric_limits<double>::infinity());
      e.se_im = e.se_re;
      continue;
    }
    Mat mr = e.value.real(), mi = e.value.imag();
    Mat vr = (a.sum2re[t] / n - mr.cwiseProduct(mr)).cwiseMax(0.0) / (n - 1.0);
    Mat vi = (a.sum2im[t] / n - mi.cwiseProduct(mi)).cwiseMax(0.0) / (n - 1.0);
    e.se_re = vr.cwiseSqrt();
    e.se_im = vi.cwiseSqrt();
  }
  return out;
}

std::vector<GreenEstimate> run_reduced_impl(
    const Geometry& g, const RunParams& p, const std::vector<const Irrep*>& irs,
    const Vec& x0, const Vec& f0, const TestFunction& phi, DriftKind kind,
    Weighting wmode, bool with_jacobian, double end_detd_power) {
  auto t0 = std::chrono::steady_clock::now();
  const ModelSpec& m = g.model();
  const double mu2k = p.mu * p.mu * p.kappa;
  const bool with_pot = m.potential_c != 0.0;
  const double pot_scale = 1.0 / (mu2k * p.mass);
  const int ni = static_cast<int>(irs.size());
  const double sigma_a = g.sigma_at(x0, f0);

  Acc total = run_chunked<Acc>(p.n_paths, p.workers, [&](Acc& acc,
                                                         int64_t pi) {
    acc.ensure(irs);
    Transport1 t1[kMaxIrreps];
    Transport tz[kMaxIrreps];
    bool scalar[kMaxIrreps];
    for (int t = 0; t < ni; ++t) {
      scalar[t] = irs[t]->dim == 1;
      if (scalar[t])
        t1[t].reset();
      else
        tz[t].reset(irs[t]->dim);
    }
    TransportOps ops;
    TransportOps1 ops1;
    double logw = 0.0;
    PathResult pr = run_reduced_path(
        g, p, kind, x0, f0, pi,
        [&](int, const Frame& fr, const FrameDerivs& dv, const Vec& dwx,
            const Vec& dwf) {
          if (with_pot)
            logw += pot_scale * m.potential(fr.qs, fr.ft) * p.dt;
          if (with_jacobian) logw += jac_rate(dv, mu2k) * p.dt;
          for (int t = 0; t < ni; ++t) {
            if (scalar[t]) {
              transport_ops1(fr, dv, *irs[t], p.mu, p.kappa, wmode, ops1);
              t1[t].step(ops1, dwx, dwf, p.dt);
            } else {
              transport_ops(fr, dv, *irs[t], p.mu, p.kappa, wmode, ops);
              tz[t].step(ops, dwx, dwf, p.dt);
            }
          }
        });
    if (!pr.alive) {
      acc.dead++;
      return;
    }
    double sig_e = 0.0;
    if (with_jacobian || end_detd_power != 0.0)
      sig_e = g.sigma_at(pr.x_end, pr.f_end);
    if (with_jacobian) logw += 0.25 * (sig_e - sigma_a);
    logw += end_detd_power * sig_e;
    // The envelope joins in log space: a huge path weight at a far endpoint
    // must give 0, not inf * 0.
    logw += phi.log_eval(pr.x_end, pr.f_end);
    acc.alive++;
    for (int t = 0; t < ni; ++t) {
      if (scalar[t]) {
        CMat v(1, 1);
        v(0, 0) = std::exp(logw + t1[t].log_scale) * t1[t].z;
        acc.add(t, v);
      } else {
        acc.add(t, CMat(std::exp(logw + tz[t].log_scale) * tz[t].z));
      }
    }
  });
  return finalize(total, ni, elapsed_since(t0));
}

// One Euler step of the reduced walk integrated exactly (to quadrature
// precision) over the Gaussian increments; mirrors run_reduced_path's
// update so the comparison probes only the time discretization.
CMat one_step_expectation(const Geometry& g, const RunParams& p,
                          const Irrep& ir, Weighting variant, const Vec& x0,
                          const Vec& f0, const TestFunction& phi, double dt,
                          int n1d, int64_t* nodes_out) {
  const ModelSpec& m = g.model();
  const int nm = m.n_m, nv = m.n_v, d = ir.dim, nq = nm + nv;
  const double mu2k = p.mu * p.mu * p.kappa;
  Frame fr = g.frame(x0, f0);
  FrameDerivs dv;
  g.derivs(fr, dv);

  TransportOps ops;
  transport_ops(fr, dv, ir, p.mu, p.kappa, variant, ops);
  Vec b = (variant == Weighting::WithInertia) ? g.full_drift(fr, dv)
                                              : g.intrinsic_drift(fr, dv);
  const double drift_scale = 0.5 * mu2k * dt;
  const double noise_scale = p.mu * std::sqrt(p.kappa);
  const double sdt = std::sqrt(dt);

  std::vector<double> xs, ws;
  gauss_hermite(n1d, xs, ws);

  CMat base = CMat::Identity(d, d) + (ops.drift + ops.comp) * dt;
  CMat acc = CMat::Zero(d, d);
  CMat f(d, d);
  Vec dwx(nm), dwf(nv), x1(nm), f1(nv);
  std::array<int, 2 * kMaxDim> idx{};
  int64_t count = 0;
  for (;;) {
    double wprod = 1.0;
    for (int i = 0; i < nq; ++i) wprod *= ws[static_cast<size_t>(idx[i])];
    for (int i = 0; i < nm; ++i) dwx[i] = sdt * xs[static_cast<size_t>(idx[i])];
    for (int i = 0; i < nv; ++i)
      dwf[i] = sdt * xs[static_cast<size_t>(idx[nm + i])];
    f = base;
    for (int i = 0; i < ops.nlx; ++i) f += ops.lx[i] * dwx[i];
    for (int j = 0; j < ops.nlv; ++j) f += ops.lv[j] * dwf[j];
    x1 = x0 + drift_scale * b.head(nm) + noise_scale * (fr.xx * dwx);
    f1 = f0 + drift_scale * b.tail(nv) +
         noise_scale * (fr.xvx * dwx + fr.xv * dwf);
    acc += (wprod * phi.eval(x1, f1)) * f;
    ++count;
    int k = 0;
    while (k < nq && ++idx[static_cast<size_t>(k)] == n1d) {
      idx[static_cast<size_t>(k)] = 0;
      ++k;
    }
    if (k == nq) break;
  }
  double rate = 0.0;
  if (variant == Weighting::Intrinsic) {
    rate += jac_rate(dv, mu2k);
    if (m.potential_c != 0.0)
      rate += m.potential(fr.qs, fr.ft) / (mu2k * p.mass);
  }
  if (nodes_out) *nodes_out = count;
  return CMat(std::exp(rate * dt) * acc);
}

double z_part(double diff, double sa, double sb) {
  double s = std::sqrt(sa * sa + sb * sb);
  if (s == 0.0)
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(diff) / s;
}

Comparison compare_impl(const GreenEstimate& a, const CMat& bval,
                        const Mat& bse_re, const Mat& bse_im) {
  Comparison c;
  int rows = static_cast<int>(a.value.rows());
  int cols = static_cast<int>(a.value.cols());
  int di = 0, dj = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      double mag = std::max(std::abs(a.value(i, j)), std::abs(bval(i, j)));
      if (mag > c.dominant_mag) {
        c.dominant_mag = mag;
        di = i;
        dj = j;
      }
      cx d = a.value(i, j) - bval(i, j);
      c.max_abs_diff = std::max(c.max_abs_diff, std::abs(d));
      c.z_max = std::max(c.z_max,
                         z_part(d.real(), a.se_re(i, j), bse_re(i, j)));
      c.z_max = std::max(c.z_max,
                         z_part(d.imag(), a.se_im(i, j), bse_im(i, j)));
    }
  }
  double se_re = std::hypot(a.se_re(di, dj), bse_re(di, dj));
  double se_im = std::hypot(a.se_im(di, dj), bse_im(di, dj));
  c.dominant_se = std::max(se_re, se_im);
  c.power_ok = c.dominant_mag > 0.0 && c.dominant_se <= 0.1 * c.dominant_mag;
  return c;
}

}  // namespace

std::vector<GreenEstimate> run_projected(const Geometry& g, const RunParams& p,
                                         const std::vector<const Irrep*>& irs,
                                         const Vec& x0, const Vec& f0,
                                         const TestFunction& phi) {
  return run_reduced_impl(g, p, irs, x0, f0, phi, DriftKind::Projected,
                          Weighting::WithInertia, false, 0.0);
}

std::vector<GreenEstimate> run_intrinsic(const Geometry& g, const RunParams& p,
                                         const std::vector<const Irrep*>& irs,
                                         const Vec& x0, const Vec& f0,
                                         const TestFunction& phi,
                                         bool with_jacobian,
                                         double end_detd_power) {
  return run_reduced_impl(g, p, irs, x0, f0, phi, DriftKind::Intrinsic,
                          Weighting::Intrinsic, with_jacobian, end_detd_power);
}

std::vector<GreenEstimate> run_ambient_lift(
    const Geometry& g, const RunParams& p,
    const std::vector<const Irrep*>& irs, const Vec& q0, const Vec& f0,
    const TestFunction& phi) {
  auto t0 = std::chrono::steady_clock::now();
  const ModelSpec& m = g.model();
  const double mu2k = p.mu * p.mu * p.kappa;
  const bool with_pot = m.potential_c != 0.0;
  const double pot_scale = 1.0 / (mu2k * p.mass);
  const int ni = static_cast<int>(irs.size());

  Vec xa(m.n_m), fa(m.n_v), tha(m.n_g);
  if (!g.to_adapted(q0, f0, xa, fa, tha))
    throw std::invalid_argument("start point has no adapted chart");
  const double sigma_a = g.sigma_at(xa, fa);

  Acc total = run_chunked<Acc>(p.n_paths, p.workers, [&](Acc& acc,
                                                         int64_t pi) {
    acc.ensure(irs);
    double logw = 0.0;
    PathResult pr = run_total_path(
        g, p, q0, f0, pi, [&](int, const Vec& q, const Vec& f) {
          if (with_pot) logw += pot_scale * m.potential(q, f) * p.dt;
        });
    if (!pr.alive) {
      acc.dead++;
      return;
    }
    Vec xe(m.n_m), fte(m.n_v), the(m.n_g);
    if (!g.to_adapted(pr.x_end, pr.f_end, xe, fte, the)) {
      acc.dead++;
      return;
    }
    // Sample weight of the matrix-valued equivariant lift, with the
    // quarter-power inertia factors of the kernel relation on both
    // endpoint arguments. The envelope joins in log space so far-field
    // excursions with large path weights give 0, not inf * 0.
    double w = std::exp(logw - 0.25 * (g.sigma_at(xe, fte) + sigma_a) +
                        phi.log_eval(xe, fte));
    acc.alive++;
    for (int t = 0; t < ni; ++t) {
      acc.add(t, CMat(w * irs[t]->rep(the).transpose()));
    }
  });
  return finalize(total, ni, elapsed_since(t0));
}

Comparison compare_estimates(const GreenEstimate& a, const GreenEstimate& b) {
  return compare_impl(a, b.value, b.se_re, b.se_im);
}

Comparison compare_to_exact(const GreenEstimate& a, const CMat& exact) {
  Mat zero = Mat::Zero(exact.rows(), exact.cols());
  return compare_impl(a, exact, zero, zero);
}

GirsanovCheck girsanov_check(const Geometry& g, const RunParams& p,
                             const std::vector<const Irrep*>& irs,
                             const Vec& x0, const Vec& f0,
                             const TestFunction& phi) {
  GirsanovCheck out;
  RunParams pl = p, pr = p;
  pl.seed = derive_seed(p.seed, 1);
  pr.seed = derive_seed(p.seed, 2);
  out.lhs = run_projected(g, pl, irs, x0, f0, phi);
  out.rhs = run_intrinsic(g, pr, irs, x0, f0, phi, true, 0.0);
  for (size_t i = 0; i < out.lhs.size(); ++i)
    out.cmp.push_back(compare_estimates(out.lhs[i], out.rhs[i]));
  return out;
}

RelationCheck relation_check(const Geometry& g, const RunParams& p,
                             const std::vector<const Irrep*>& irs,
                             const Vec& x0, const Vec& f0,
                             const TestFunction& phi) {
  RelationCheck out;
  const ModelSpec& m = g.model();
  RunParams pl = p, pr = p;
  pl.seed = derive_seed(p.seed, 3);
  pr.seed = derive_seed(p.seed, 4);

  out.lhs = run_intrinsic(g, pl, irs, x0, f0, phi, true, -0.25);
  double da_quarter = std::exp(-0.25 * g.sigma_at(x0, f0));
  for (GreenEstimate& e : out.lhs) {
    e.value *= da_quarter;
    e.se_re *= da_quarter;
    e.se_im *= da_quarter;
  }

  Vec q0(m.n_p), f0a(m.n_v);
  g.from_adapted(x0, f0, m.identity_th, q0, f0a);
  out.rhs = run_ambient_lift(g, pr, irs, q0, f0a, phi);

  for (size_t i = 0; i < out.lhs.size(); ++i)
    out.cmp.push_back(compare_estimates(out.lhs[i], out.rhs[i]));
  return out;
}

CMat generator_apply(const Geometry& g, const RunParams& p, const Irrep& ir,
                     Weighting variant, const Vec& x0, const Vec& f0,
                     const TestFunction& phi) {
  const ModelSpec& m = g.model();
  const int nm = m.n_m, nv = m.n_v, ng = m.n_g, d = ir.dim;
  const double mu2k = p.mu * p.mu * p.kappa;
  Frame fr = g.frame(x0, f0);
  FrameDerivs dv;
  g.derivs(fr, dv);

  double env = phi.eval(x0, f0);
  Vec gr = phi.grad(x0, f0);
  Mat hs = phi.hess(x0, f0);

  Mat quad(nm + nv, nm + nv);
  quad.topLeftCorner(nm, nm) = fr.h_up;
  quad.topRightCorner(nm, nv) = fr.quad_xv;
  quad.bottomLeftCorner(nv, nm) = fr.quad_xv.transpose();
  quad.bottomRightCorner(nv, nv) = fr.quad_vv;
  Vec b = (variant == Weighting::WithInertia) ? g.full_drift(fr, dv)
                                              : g.intrinsic_drift(fr, dv);
  double scal = 0.5 * mu2k * (quad.cwiseProduct(hs).sum() + b.dot(gr));
  CMat out = scal * CMat::Identity(d, d);

  // Generator-linear first-derivative couplings: transverse through the
  // connection, internal through both the connection square and the
  // internal noise square.
  Vec qa = quad * gr;
  Vec u = fr.conn_p * qa.head(nm) + fr.conn_v * (fr.noise_vv * gr.tail(nv));
  Vec cj = (variant == Weighting::WithInertia)
               ? Vec(dv.diva_dh + fr.lam_sq * dv.divk_dh)
               : Vec(dv.diva_h + fr.lam_sq * dv.divk_h);
  Mat qg = fr.inertia_p_inv + fr.conn_p * fr.h_up * fr.conn_p.transpose();
  for (int a = 0; a < ng; ++a) {
    out += 0.5 * mu2k * (-2.0 * u[a] - cj[a] * env) * ir.gen[a];
    for (int c = 0; c < ng; ++c)
      out += 0.5 * mu2k * qg(a, c) * env * CMat(ir.gen[a] * ir.gen[c]);
  }
  if (variant == Weighting::Intrinsic) {
    double rate = jac_rate(dv, mu2k);
    if (m.potential_c != 0.0)
      rate += m.potential(fr.qs, fr.ft) / (mu2k * p.mass);
    out += rate * env * CMat::Identity(d, d);
  }
  return out;
}

GeneratorCheck generator_fd_check(const Geometry& g, const RunParams& p,
                                  const Irrep& ir, Weighting variant,
                                  const Vec& x0, const Vec& f0,
                                  const TestFunction& phi, double dt_coarse,
                                  int nodes_per_dim) {
  GeneratorCheck out;
  out.nodes_per_dim = nodes_per_dim;
  const int d = ir.dim;
  const double env0 = phi.eval(x0, f0);
  CMat id = CMat::Identity(d, d);
  int64_t n1 = 0, n2 = 0;
  CMat e1 = one_step_expectation(g, p, ir, variant, x0, f0, phi, dt_coarse,
                                 nodes_per_dim, &n1);
  CMat e2 = one_step_expectation(g, p, ir, variant, x0, f0, phi,
                                 0.5 * dt_coarse, nodes_per_dim, &n2);
  out.nodes_total = n1 + n2;
  out.a_coarse = CMat((e1 - env0 * id) / dt_coarse);
  out.a_fine = CMat((e2 - env0 * id) / (0.5 * dt_coarse));
  out.richardson = CMat(2.0 * out.a_fine - out.a_coarse);
  out.target = generator_apply(g, p, ir, variant, x0, f0, phi);
  double scale = std::max(max_abs(out.target), 1e-14);
  out.rel_err_coarse = max_abs(CMat(out.a_coarse - out.target)) / scale;
  out.rel_err_fine = max_abs(CMat(out.a_fine - out.target)) / scale;
  out.rel_err_richardson = max_abs(CMat(out.richardson - out.target)) / scale;
  out.err_ratio = out.rel_err_fine > 0.0
                      ? out.rel_err_coarse / out.rel_err_fine
                      : std::numeric_limits<double>::infinity();
  return out;
}

void gauss_hermite(int n, std::vector<double>& nodes,
                   std::vector<double>& weights) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    t(k, k - 1) = t(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  nodes.resize(static_cast<size_t>(n));
  weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    nodes[static_cast<size_t>(i)] = es.eigenvalues()[i];
    double w0 = es.eigenvectors()(0, i);
    weights[static_cast<size_t>(i)] = w0 * w0;
  }
}

namespace {

struct ItoAcc {
  double sum_abs = 0.0, sum = 0.0;
  int64_t alive = 0, dead = 0;
  void merge(const ItoAcc& o) {
    sum_abs += o.sum_abs;
    sum += o.sum;
    alive += o.alive;
    dead += o.dead;
  }
};

// Mean |log F1 - log F2| where F1 integrates the sigma noise terms along
// the path and F2 is the endpoint-ratio closed form.
ItoAcc ito_pass(const Geometry& g, const RunParams& p, const Vec& x0,
                const Vec& f0) {
  const double mu2k = p.mu * p.mu * p.kappa;
  const double noise_scale = p.mu * std::sqrt(p.kappa);
  const double sigma_a = g.sigma_at(x0, f0);
  return run_chunked<ItoAcc>(
      p.n_paths, p.workers, [&](ItoAcc& acc, int64_t pi) {
        double log_f1 = 0.0, rate_int = 0.0;
        PathResult pr = run_reduced_path(
            g, p, DriftKind::Intrinsic, x0, f0, pi,
            [&](int, const Frame& fr, const FrameDerivs& dv, const Vec& dwx,
                const Vec& dwf) {
              double noise = fr.sig_x.dot(fr.xx * dwx) +
                             fr.sig_f.dot(fr.xvx * dwx + fr.xv * dwf);
              log_f1 += 0.25 * (noise_scale * noise -
                                0.125 * mu2k * dv.grad_sigma_sq * p.dt);
              rate_int += jac_rate(dv, mu2k) * p.dt;
            });
        if (!pr.alive) {
          acc.dead++;
          return;
        }
        double log_f2 =
            0.25 * (g.sigma_at(pr.x_end, pr.f_end) - sigma_a) + rate_int;
        acc.alive++;
        acc.sum_abs += std::abs(log_f1 - log_f2);
        acc.sum += log_f1 - log_f2;
      });
}

}  // namespace

ItoJacobianCheck ito_jacobian_check(const Geometry& g, const RunParams& p,
                                    const Vec& x0, const Vec& f0,
                                    double dt_coarse) {
  ItoJacobianCheck out;
  RunParams pc = p, pf = p;
  pc.dt = dt_coarse;
  pf.dt = 0.5 * dt_coarse;
  ItoAcc ac = ito_pass(g, pc, x0, f0);
  ItoAcc af = ito_pass(g, pf, x0, f0);
  out.n_alive_coarse = ac.alive;
  out.n_alive_fine = af.alive;
  if (ac.alive > 0) {
    out.mean_absdiff_coarse = ac.sum_abs / static_cast<double>(ac.alive);
    out.bias_coarse = std::abs(ac.sum / static_cast<double>(ac.alive));
  }
  if (af.alive > 0) {
    out.mean_absdiff_fine = af.sum_abs / static_cast<double>(af.alive);
    out.bias_fine = std::abs(af.sum / static_cast<double>(af.alive));
  }
  out.ratio = out.mean_absdiff_coarse > 0.0
                  ? out.mean_absdiff_fine / out.mean_absdiff_coarse
                  : std::numeric_limits<double>::infinity();
  out.bias_ratio = out.bias_coarse > 0.0 ? out.bias_fine / out.bias_coarse
                                         : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<PathDump> sample_reduced_paths(const Geometry& g,
                                           const RunParams& p,
                                           const std::vector<const Irrep*>& irs,
                                           const Vec& x0, const Vec& f0,
                                           DriftKind kind, Weighting variant,
                                           int64_t n) {
  const ModelSpec& m = g.model();
  const double mu2k = p.mu * p.mu * p.kappa;
  const double pot_scale = 1.0 / (mu2k * p.mass);
  const double sigma_a = g.sigma_at(x0, f0);
  const int ni = static_cast<int>(irs.size());
  if (ni > kMaxIrreps) throw std::invalid_argument("too many irreps");

  std::vector<PathDump> out;
  out.reserve(static_cast<size_t>(n));
  for (int64_t pi = 0; pi < n; ++pi) {
    PathDump d;
    d.path = pi;
    Transport1 t1[kMaxIrreps];
    Transport tz[kMaxIrreps];
    bool scalar[kMaxIrreps];
    for (int t = 0; t < ni; ++t) {
      scalar[t] = irs[t]->dim == 1;
      if (scalar[t])
        t1[t].reset();
      else
        tz[t].reset(irs[t]->dim);
    }
    TransportOps ops;
    TransportOps1 ops1;
    double logjac = 0.0, logpot = 0.0;
    PathResult pr = run_reduced_path(
        g, p, kind, x0, f0, pi,
        [&](int, const Frame& fr, const FrameDerivs& dv, const Vec& dwx,
            const Vec& dwf) {
          logpot += pot_scale * m.potential(fr.qs, fr.ft) * p.dt;
          logjac += jac_rate(dv, mu2k) * p.dt;
          for (int t = 0; t < ni; ++t) {
            if (scalar[t]) {
              transport_ops1(fr, dv, *irs[t], p.mu, p.kappa, variant, ops1);
              t1[t].step(ops1, dwx, dwf, p.dt);
            } else {
              transport_ops(fr, dv, *irs[t], p.mu, p.kappa, variant, ops);
              tz[t].step(ops, dwx, dwf, p.dt);
            }
          }
        });
    d.alive = pr.alive;
    if (pr.alive) {
      d.x_end = pr.x_end;
      d.f_end = pr.f_end;
      logjac += 0.25 * (g.sigma_at(pr.x_end, pr.f_end) - sigma_a);
      d.log_jacobian = logjac;
      d.log_potential = logpot;
      for (int t = 0; t < ni; ++t) {
        if (scalar[t])
          d.z.push_back(std::exp(t1[t].log_scale) * t1[t].z);
        else
          d.z.push_back(std::exp(tz[t].log_scale) * tz[t].z(0, 0));
      }
    } else {
      d.x_end = Vec::Zero(m.n_m);
      d.f_end = Vec::Zero(m.n_v);
      d.z.assign(static_cast<size_t>(ni), cx(0.0, 0.0));
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace fibermc
