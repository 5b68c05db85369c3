#include <cmath>
#include <stdexcept>

#include "core/geometry.hpp"
#include "core/model.hpp"

namespace fibermc {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

double wrap_angle(double t) {
  t = std::fmod(t, 2.0 * kPi);
  if (t > kPi) t -= 2.0 * kPi;
  if (t <= -kPi) t += 2.0 * kPi;
  return t;
}

// ---- quaternion helpers (w, x, y, z) ----

using Q4 = Eigen::Vector4d;

Q4 qmul(const Q4& a, const Q4& b) {
  return Q4(a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
            a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
            a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]);
}

Q4 qconj(const Q4& a) { return Q4(a[0], -a[1], -a[2], -a[3]); }

// Matrix of p -> q*p.
Eigen::Matrix4d qleft(const Q4& q) {
  Eigen::Matrix4d m;
  m << q[0], -q[1], -q[2], -q[3],
       q[1],  q[0], -q[3],  q[2],
       q[2],  q[3],  q[0], -q[1],
       q[3], -q[2],  q[1],  q[0];
  return m;
}

// Matrix of p -> p*q.
Eigen::Matrix4d qright(const Q4& q) {
  Eigen::Matrix4d m;
  m << q[0], -q[1], -q[2], -q[3],
       q[1],  q[0],  q[3], -q[2],
       q[2], -q[3],  q[0],  q[1],
       q[3],  q[2], -q[1],  q[0];
  return m;
}

// exp of the pure imaginary quaternion with components th.
Q4 qexp3(const Vec& th) {
  double r = th.norm();
  double c = std::cos(r);
  double sc = (r < 1e-8) ? 1.0 - r * r / 6.0 : std::sin(r) / r;
  return Q4(c, sc * th[0], sc * th[1], sc * th[2]);
}

// Inverse of qexp3 on the chart |th| < pi.
Vec qlog3(const Q4& a) {
  double vn = std::sqrt(a[1] * a[1] + a[2] * a[2] + a[3] * a[3]);
  double r = std::atan2(vn, a[0]);
  Vec th(3);
  if (vn < 1e-14) {
    th << 0.0, 0.0, 0.0;
    if (a[0] < 0.0) th[0] = kPi;  // antipode; caller checks in_chart
    return th;
  }
  th << r * a[1] / vn, r * a[2] / vn, r * a[3] / vn;
  return th;
}

Mat sym_sqrt(const Mat& spd) {
  Eigen::SelfAdjointEigenSolver<Mat> es(spd);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("metric_v must be positive definite");
  }
  return es.operatorSqrt();
}

}  // namespace

ModelSpec make_so2_planar(double potential_c, const Mat* metric_v_override,
                          const std::vector<int>& charges) {
  ModelSpec m;
  m.id = "so2-planar";
  m.n_p = 2;
  m.n_v = 2;
  m.n_g = 1;
  m.n_m = 1;
  m.flat_p = true;
  m.metric_p = Mat::Identity(2, 2);
  m.metric_v = Mat::Identity(2, 2);
  Mat s_half = Mat::Identity(2, 2);
  Mat s_half_inv = Mat::Identity(2, 2);
  if (metric_v_override) {
    if (metric_v_override->rows() != 2 || metric_v_override->cols() != 2 ||
        std::abs((*metric_v_override)(0, 1) - (*metric_v_override)(1, 0)) >
            1e-12 * std::max(1.0, max_abs(*metric_v_override))) {
      throw std::invalid_argument(
          "metric_v override failed the symmetry check: need a symmetric "
          "2x2 positive definite matrix");
    }
    m.metric_v = 0.5 * (*metric_v_override + metric_v_override->transpose());
    s_half = sym_sqrt(m.metric_v);
    s_half_inv = inverse_sym(s_half);
  }
  m.potential_c = potential_c;

  Mat rot_gen(2, 2);
  rot_gen << 0.0, -1.0, 1.0, 0.0;

  auto rot = [](double t) {
    Mat r(2, 2);
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return r;
  };

  m.act_p = [rot](const Vec& q, const Vec& th) -> Vec { return rot(th[0]) * q; };
  m.rep_v = [rot, s_half, s_half_inv](const Vec& th) -> Mat {
    return s_half_inv * rot(-th[0]) * s_half;
  };
  m.gen_v = {-(s_half_inv * rot_gen * s_half)};
  m.killing_p = [rot_gen](const Vec& q) -> Mat { return rot_gen * q; };

  m.section = [](const Vec& x) -> Vec {
    Vec q(2);
    q << x[0], 0.0;
    return q;
  };
  m.section_jac = [](const Vec&) -> Mat {
    Mat j(2, 1);
    j << 1.0, 0.0;
    return j;
  };
  m.section_coord = [](const Vec& qs) -> Vec {
    Vec x(1);
    x << qs[0];
    return x;
  };
  m.gauge = [](const Vec& q) -> Vec {
    Vec g(1);
    g << q[1];
    return g;
  };
  m.gauge_jac = [](const Vec&) -> Mat {
    Mat j(1, 2);
    j << 0.0, 1.0;
    return j;
  };

  m.ubar = [](const Vec&) -> Mat { return Mat::Identity(1, 1); };
  m.group_volume = 2.0 * kPi;
  m.compose = [](const Vec& a, const Vec& b) -> Vec {
    Vec c(1);
    c << wrap_angle(a[0] + b[0]);
    return c;
  };
  m.inverse = [](const Vec& a) -> Vec {
    Vec c(1);
    c << wrap_angle(-a[0]);
    return c;
  };
  m.in_chart = [](const Vec& th) { return th[0] > -kPi && th[0] <= kPi; };
  m.identity_th = Vec::Zero(1);
  m.struct_c = {Mat::Zero(1, 1)};

  m.to_adapted_closed = [s_half, s_half_inv, rot](const Vec& q, const Vec& f,
                                                  Vec& x, Vec& ft,
                                                  Vec& th) -> bool {
    double r = q.norm();
    if (r <= 0.0) return false;
    x = Vec(1);
    x << r;
    th = Vec(1);
    th << std::atan2(q[1], q[0]);
    ft = s_half_inv * rot(th[0]) * s_half * f;
    return true;
  };

  m.sigma_grad = [](const Frame& fr, Vec& sx, Vec& sf) {
    double s = fr.x.squaredNorm() + fr.ft.dot(fr.gv_ft);
    sx = 2.0 * fr.x / s;
    sf = (2.0 / s) * fr.gv_ft;
  };

  m.analytic_derivs = [](const Frame& fr, FrameDerivs& dv) {
    double x = fr.x[0];
    double s = fr.x.squaredNorm() + fr.ft.dot(fr.gv_ft);
    double w = s - x * x;
    dv.div_h = Vec::Zero(1);
    dv.div_h[0] = w / (x * s);
    dv.divk_h = Vec::Zero(1);
    dv.diva_h = Vec::Zero(1);
    dv.divh_f = -fr.gv_ft / s;
    dv.dnn = -fr.ft / (x * x);
    dv.divk_dh = Vec::Zero(1);
    dv.diva_dh = Vec::Zero(1);
    dv.lap_sigma = 2.0 / s;
    dv.grad_sigma_sq = 4.0 / s;
  };

  {
    Mat gv = m.metric_v;
    Mat gv_inv = inverse_sym(gv);
    double det_gv = gv.determinant();
    Mat bmat = m.gen_v[0];
    Mat gb = gv * bmat;
    m.frame_closed = [gv, gv_inv, det_gv, bmat, gb](const Vec& xv,
                                                    const Vec& ft, Frame& fr) {
      double x = xv[0];
      double x2 = x * x;
      fr.x = xv;
      fr.ft = ft;
      fr.qs.resize(2);
      fr.qs << x, 0.0;
      fr.gv_ft = gv * ft;
      double w = ft.dot(fr.gv_ft);
      double s = x2 + w;
      fr.kp.resize(2, 1);
      fr.kp << 0.0, x;
      fr.kv = bmat * ft;
      fr.inertia_p = Mat::Constant(1, 1, x2);
      fr.inertia_v = Mat::Constant(1, 1, w);
      fr.inertia = Mat::Constant(1, 1, s);
      fr.inertia_p_inv = Mat::Constant(1, 1, 1.0 / x2);
      fr.inertia_inv = Mat::Constant(1, 1, 1.0 / s);
      fr.detd = s;
      fr.conn = Mat::Zero(1, 1);
      fr.conn_v = (gb * ft).transpose() / s;
      fr.conn_p = Mat::Zero(1, 1);
      fr.gauge_phi = Mat::Constant(1, 1, x);
      fr.gauge_lam.resize(1, 2);
      fr.gauge_lam << 0.0, 1.0 / x;
      fr.lam_sq = Mat::Constant(1, 1, 1.0 / x2);
      fr.gauge_det = x;
      fr.ht_low = Mat::Identity(1, 1);
      fr.h_low = Mat::Identity(1, 1);
      fr.h_up = Mat::Identity(1, 1);
      fr.w_va = Mat::Zero(2, 1);
      fr.quad_xv = Mat::Zero(1, 2);
      fr.quad_vv = gv_inv + (fr.kv * fr.kv.transpose()) / x2;
      fr.noise_vv = fr.quad_vv;
      fr.xx = Mat::Identity(1, 1);
      double a11 = std::sqrt(fr.noise_vv(0, 0));
      double a21 = fr.noise_vv(1, 0) / a11;
      double a22 = std::sqrt(fr.noise_vv(1, 1) - a21 * a21);
      fr.xv.resize(2, 2);
      fr.xv << a11, 0.0, a21, a22;
      fr.xvx = Mat::Zero(2, 1);
      fr.hdet = det_gv * x2 / s;
      fr.sigma = std::log(s);
      fr.sig_x = (2.0 * x / s) * Vec::Ones(1);
      fr.sig_f = (2.0 / s) * fr.gv_ft;
    };
  }

  for (int q : charges) {
    Irrep ir;
    ir.label = std::to_string(q);
    ir.dim = 1;
    CMat j(1, 1);
    j(0, 0) = cx(0.0, static_cast<double>(q));
    ir.gen = {j};
    ir.rep = [q](const Vec& th) -> CMat {
      CMat d(1, 1);
      d(0, 0) = std::exp(cx(0.0, q * th[0]));
      return d;
    };
    m.irreps.push_back(std::move(ir));
  }
  return m;
}

ModelSpec make_su2(double potential_c, const std::vector<int>& two_j) {
  ModelSpec m;
  m.id = "su2";
  m.n_p = 4;
  m.n_v = 4;
  m.n_g = 3;
  m.n_m = 1;
  m.flat_p = true;
  m.metric_p = Mat::Identity(4, 4);
  m.metric_v = Mat::Identity(4, 4);
  m.potential_c = potential_c;

  std::array<Q4, 3> e;
  e[0] = Q4(0, 1, 0, 0);
  e[1] = Q4(0, 0, 1, 0);
  e[2] = Q4(0, 0, 0, 1);

  m.act_p = [](const Vec& q, const Vec& th) -> Vec {
    return qmul(Q4(q), qexp3(th));
  };
  m.rep_v = [](const Vec& th) -> Mat { return qleft(qconj(qexp3(th))); };
  m.gen_v = {Mat(-qleft(e[0])), Mat(-qleft(e[1])), Mat(-qleft(e[2]))};
  m.killing_p = [e](const Vec& q) -> Mat {
    Mat k(4, 3);
    for (int a = 0; a < 3; ++a) k.col(a) = qmul(Q4(q), e[a]);
    return k;
  };

  m.section = [](const Vec& x) -> Vec {
    Vec q(4);
    q << x[0], 0.0, 0.0, 0.0;
    return q;
  };
  m.section_jac = [](const Vec&) -> Mat {
    Mat j(4, 1);
    j << 1.0, 0.0, 0.0, 0.0;
    return j;
  };
  m.section_coord = [](const Vec& qs) -> Vec {
    Vec x(1);
    x << qs[0];
    return x;
  };
  m.gauge = [](const Vec& q) -> Vec { return q.tail(3); };
  m.gauge_jac = [](const Vec&) -> Mat {
    Mat j(3, 4);
    j.setZero();
    j(0, 1) = j(1, 2) = j(2, 3) = 1.0;
    return j;
  };

  m.ubar = [](const Vec& th) -> Mat {
    // Chart frame for composition on the right: tangent map of the
    // exponential chart trivialized at the moving endpoint.
    double r = th.norm();
    Mat id = Mat::Identity(3, 3);
    if (r < 1e-8) {
      Mat cross(3, 3);
      cross << 0, -th[2], th[1], th[2], 0, -th[0], -th[1], th[0], 0;
      return id + cross;  // leading order; higher orders vanish at this size
    }
    Vec n = th / r;
    Mat nn = n * n.transpose();
    Mat cross(3, 3);
    cross << 0, -n[2], n[1], n[2], 0, -n[0], -n[1], n[0], 0;
    double s2 = std::sin(2.0 * r) / (2.0 * r);
    double c2 = (1.0 - std::cos(2.0 * r)) / (2.0 * r);
    return nn + s2 * (id - nn) + c2 * cross;
  };
  m.group_volume = 2.0 * kPi * kPi;
  m.compose = [](const Vec& a, const Vec& b) -> Vec {
    return qlog3(qmul(qexp3(a), qexp3(b)));
  };
  m.inverse = [](const Vec& a) -> Vec { return -a; };
  m.in_chart = [](const Vec& th) { return th.norm() < kPi - 1e-9; };
  m.identity_th = Vec::Zero(3);
  auto eps3 = [](int a, int b, int c) -> int {
    if (a == b || b == c || a == c) return 0;
    return ((a + 1) % 3 == b) ? 1 : -1;
  };
  m.struct_c = {Mat(3, 3), Mat(3, 3), Mat(3, 3)};
  for (int g = 0; g < 3; ++g) {
    m.struct_c[g].setZero();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m.struct_c[g](a, b) = 2.0 * eps3(a, b, g);
  }

  m.to_adapted_closed = [](const Vec& q, const Vec& f, Vec& x, Vec& ft,
                           Vec& th) -> bool {
    double r = q.norm();
    if (r <= 0.0) return false;
    Q4 a = Q4(q) / r;
    if (a[0] <= -1.0 + 1e-12) return false;  // chart antipode
    x = Vec(1);
    x << r;
    th = qlog3(a);
    ft = qmul(a, Q4(f));
    return true;
  };

  m.sigma_grad = [](const Frame& fr, Vec& sx, Vec& sf) {
    double s = fr.x.squaredNorm() + fr.ft.squaredNorm();
    sx = 6.0 * fr.x / s;
    sf = (6.0 / s) * fr.ft;
  };

  for (int tj : two_j) {
    Irrep ir;
    if (tj == 0) {
      ir.label = "0";
      ir.dim = 1;
      CMat z(1, 1);
      z(0, 0) = cx(0.0, 0.0);
      ir.gen = {z, z, z};
      ir.rep = [](const Vec&) -> CMat {
        CMat d(1, 1);
        d(0, 0) = cx(1.0, 0.0);
        return d;
      };
    } else if (tj == 1) {
      ir.label = "1/2";
      ir.dim = 2;
      CMat s1(2, 2), s2(2, 2), s3(2, 2);
      s1 << cx(0, 0), cx(1, 0), cx(1, 0), cx(0, 0);
      s2 << cx(0, 0), cx(0, -1), cx(0, 1), cx(0, 0);
      s3 << cx(1, 0), cx(0, 0), cx(0, 0), cx(-1, 0);
      ir.gen = {cx(0, -1) * s1, cx(0, -1) * s2, cx(0, -1) * s3};
      ir.rep = [s1, s2, s3](const Vec& th) -> CMat {
        Q4 a = qexp3(th);
        CMat d = a[0] * CMat::Identity(2, 2);
        d += cx(0, -1) * (a[1] * s1 + a[2] * s2 + a[3] * s3);
        return d;
      };
    } else if (tj == 2) {
      ir.label = "1";
      ir.dim = 3;
      std::array<Q4, 3> basis = {Q4(0, 1, 0, 0), Q4(0, 0, 1, 0),
                                 Q4(0, 0, 0, 1)};
      std::vector<CMat> gens;
      for (int al = 0; al < 3; ++al) {
        CMat j(3, 3);
        for (int c = 0; c < 3; ++c) {
          Q4 comm = qmul(basis[al], basis[c]) - qmul(basis[c], basis[al]);
          for (int row = 0; row < 3; ++row)
            j(row, c) = cx(comm[row + 1], 0.0);
        }
        gens.push_back(j);
      }
      ir.gen = gens;
      ir.rep = [basis](const Vec& th) -> CMat {
        Q4 a = qexp3(th);
        CMat d(3, 3);
        for (int c = 0; c < 3; ++c) {
          Q4 img = qmul(qmul(a, basis[c]), qconj(a));
          for (int row = 0; row < 3; ++row) d(row, c) = cx(img[row + 1], 0.0);
        }
        return d;
      };
    } else {
      throw std::invalid_argument("su2 irrep labels must be 0, 1/2 or 1");
    }
    m.irreps.push_back(std::move(ir));
  }
  return m;
}

ModelSpec make_model(const std::string& id, double potential_c,
                     const Mat* metric_v_override,
                     const std::vector<std::string>& irrep_labels) {
  if (id == "so2-planar") {
    std::vector<int> charges;
    if (irrep_labels.empty()) {
      charges = {0, 1};
    } else {
      for (const auto& s : irrep_labels) {
        size_t pos = 0;
        int q = 0;
        try {
          q = std::stoi(s, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos != s.size() || s.empty()) {
          throw std::invalid_argument("so2-planar irrep labels are integers, got: " + s);
        }
        charges.push_back(q);
      }
    }
    return make_so2_planar(potential_c, metric_v_override, charges);
  }
  if (id == "su2") {
    if (metric_v_override) {
      throw std::invalid_argument("metric_v override is only supported for so2-planar");
    }
    std::vector<int> two_j;
    if (irrep_labels.empty()) {
      two_j = {0, 1, 2};
    } else {
      for (const auto& s : irrep_labels) {
        if (s == "0") two_j.push_back(0);
        else if (s == "1/2") two_j.push_back(1);
        else if (s == "1") two_j.push_back(2);
        else throw std::invalid_argument("su2 irrep labels must be 0, 1/2 or 1");
      }
    }
    return make_su2(potential_c, two_j);
  }
  throw std::invalid_argument("unknown model id: " + id);
}

}  // namespace fibermc
