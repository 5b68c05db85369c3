#include "core/model.hpp"

#include <random>
#include <sstream>

#include "core/fd.hpp"

namespace fibermc {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

void note(std::vector<std::string>& bad, const std::string& what, double err,
          double tol) {
  if (!(err <= tol)) {
    std::ostringstream os;
    os << what << ": error " << err << " exceeds " << tol;
    bad.push_back(os.str());
  }
}

}  // namespace

std::vector<std::string> model_self_check(const ModelSpec& m, int n_points,
                                          uint64_t seed) {
  std::vector<std::string> bad;
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nrm(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  auto rand_q = [&]() {
    Vec q(m.n_p);
    for (int i = 0; i < m.n_p; ++i) q[i] = nrm(eng);
    double r = 0.5 + 1.5 * uni(eng);
    return Vec(q * (r / q.norm()));
  };
  auto rand_f = [&]() {
    Vec f(m.n_v);
    for (int i = 0; i < m.n_v; ++i) f[i] = nrm(eng);
    return f;
  };
  auto rand_th = [&]() {
    Vec t(m.n_g);
    for (int i = 0; i < m.n_g; ++i) t[i] = nrm(eng);
    double cap = (m.n_g == 1) ? kPi - 0.05 : 0.85 * kPi;
    double r = uni(eng) * cap;
    return Vec(t * (r / t.norm()));
  };
  auto rand_x = [&]() {
    Vec x(m.n_m);
    for (int i = 0; i < m.n_m; ++i) x[i] = 0.5 + 1.5 * uni(eng);
    return x;
  };

  Mat id_v = Mat::Identity(m.n_v, m.n_v);

  {
    Mat ub0 = m.ubar(m.identity_th);
    note(bad, "chart frame at identity", max_abs(ub0 - Mat::Identity(m.n_g, m.n_g)),
         1e-12);
    if (m.group_volume <= 0.0) bad.push_back("group volume not positive");
  }

  for (int pt = 0; pt < n_points; ++pt) {
    Vec q = rand_q(), q2 = rand_q(), f = rand_f();
    Vec t1 = rand_th(), t2 = rand_th();

    if (m.flat_p) {
      Vec dq = m.act_p(q, t1) - m.act_p(q2, t1);
      Vec d0 = q - q2;
      note(bad, "action preserves ambient metric",
           std::abs(dq.dot(m.metric_p * dq) - d0.dot(m.metric_p * d0)),
           1e-10 * std::max(1.0, d0.squaredNorm()));
    }

    Mat dv = m.rep_v(t1);
    note(bad, "internal action preserves metric",
         max_abs(dv.transpose() * m.metric_v * dv - m.metric_v), 1e-10);

    Vec t12 = m.compose(t1, t2);
    note(bad, "right action composes",
         (m.act_p(m.act_p(q, t1), t2) - m.act_p(q, t12)).norm(), 1e-9);
    note(bad, "internal action anti-composes",
         max_abs(m.rep_v(t12) - m.rep_v(t2) * m.rep_v(t1)), 1e-9);
    note(bad, "group inverse",
         max_abs(m.rep_v(m.compose(t1, m.inverse(t1))) - id_v), 1e-9);

    Mat kfd = fd_jacobian([&](const Vec& t) { return m.act_p(q, t); },
                          m.identity_th, m.n_p, 1e-6);
    note(bad, "ambient generators match action", max_abs(kfd - m.killing_p(q)),
         1e-7);

    for (int a = 0; a < m.n_g; ++a) {
      double h = 1e-6;
      Vec tp = m.identity_th, tm = m.identity_th;
      tp[a] += h;
      tm[a] -= h;
      Mat gfd = (m.rep_v(tp) - m.rep_v(tm)) / (2.0 * h);
      note(bad, "internal generators match action", max_abs(gfd - m.gen_v[a]),
           1e-7);
    }

    if (m.potential_c != 0.0) {
      note(bad, "potential invariance",
           std::abs(m.potential(m.act_p(q, t1), m.rep_v(t1) * f) -
                    m.potential(q, f)),
           1e-9 * std::max(1.0, std::abs(m.potential(q, f))));
    }

    Vec x = rand_x();
    note(bad, "gauge vanishes on section", m.gauge(m.section(x)).norm(), 1e-12);
    note(bad, "section coordinate roundtrip",
         (m.section_coord(m.section(x)) - x).norm(), 1e-12);

    if (m.to_adapted_closed) {
      Vec xx, ft, th;
      if (!m.to_adapted_closed(q, f, xx, ft, th)) {
        bad.push_back("closed-form chart transfer failed at a generic point");
      } else {
        Vec qr = m.act_p(m.section(xx), th);
        Vec fr = m.rep_v(th) * ft;
        note(bad, "chart transfer roundtrip (ambient)", (qr - q).norm(), 1e-9);
        note(bad, "chart transfer roundtrip (internal)", (fr - f).norm(), 1e-9);
      }
    }

    for (const auto& ir : m.irreps) {
      CMat idr = CMat::Identity(ir.dim, ir.dim);
      CMat d1 = ir.rep(t1);
      note(bad, "irrep " + ir.label + " unitary",
           max_abs(CMat(d1.adjoint() * d1 - idr)), 1e-10);
      note(bad, "irrep " + ir.label + " homomorphism",
           max_abs(CMat(ir.rep(t12) - d1 * ir.rep(t2))), 1e-9);
      for (int a = 0; a < m.n_g; ++a) {
        double h = 1e-6;
        Vec tp = m.identity_th, tm = m.identity_th;
        tp[a] += h;
        tm[a] -= h;
        CMat gfd = (ir.rep(tp) - ir.rep(tm)) / (2.0 * h);
        note(bad, "irrep " + ir.label + " generators match",
             max_abs(CMat(gfd - ir.gen[a])), 1e-7);
        note(bad, "irrep " + ir.label + " generators anti-hermitian",
             max_abs(CMat(ir.gen[a] + ir.gen[a].adjoint())), 1e-12);
      }
      for (int a = 0; a < m.n_g; ++a)
        for (int b = 0; b < m.n_g; ++b) {
          CMat comm = ir.gen[a] * ir.gen[b] - ir.gen[b] * ir.gen[a];
          for (int g = 0; g < m.n_g; ++g)
            comm -= cx(m.struct_c[g](a, b), 0.0) * ir.gen[g];
          note(bad, "irrep " + ir.label + " commutators", max_abs(comm), 1e-9);
        }
    }

    for (int a = 0; a < m.n_g; ++a)
      for (int b = 0; b < m.n_g; ++b) {
        Mat comm = m.gen_v[a] * m.gen_v[b] - m.gen_v[b] * m.gen_v[a];
        for (int g = 0; g < m.n_g; ++g)
          comm += m.struct_c[g](a, b) * m.gen_v[g];
        note(bad, "internal generator commutators", max_abs(comm), 1e-9);
      }

    if (bad.size() > 50) {
      bad.push_back("... further checks suppressed");
      return bad;
    }
  }

  return bad;
}

}  // namespace fibermc
