#pragma once

#include "core/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fibermc {

struct Frame;
struct FrameDerivs;

// One unitary irreducible representation of the symmetry group, given by its
// anti-hermitian generators and the chart -> matrix map.
struct Irrep {
  std::string label;
  int dim = 1;
  std::vector<CMat> gen;                   // one per group direction
  std::function<CMat(const Vec&)> rep;     // group chart coords -> matrix
};

struct DomainGuard {
  double x_min = 1e-3;
  double radius_max = 1e3;
  double gauge_det_tol = 1e-8;
};

// A mechanical model on a product space (translational factor) x (internal
// vector space) carrying a free isometric group action, together with a
// section/gauge pair describing the quotient in adapted coordinates.
struct ModelSpec {
  std::string id;
  int n_p = 0;  // translational dimension
  int n_v = 0;  // internal vector dimension
  int n_g = 0;  // group dimension
  int n_m = 0;  // transverse dimension, n_p - n_g

  bool flat_p = true;
  Mat metric_p;  // n_p x n_p, constant when flat_p
  Mat metric_v;  // n_v x n_v, constant

  double potential_c = 0.0;

  // Right action: state.(g h) applies g first. On the vector factor this
  // makes rep_v an anti-homomorphism: rep_v(a.b) = rep_v(b) rep_v(a).
  std::function<Vec(const Vec&, const Vec&)> act_p;   // (q, th) -> q.a(th)
  std::function<Mat(const Vec&)> rep_v;               // th -> matrix on V
  std::vector<Mat> gen_v;                             // generators of rep_v
  std::function<Mat(const Vec&)> killing_p;           // q -> n_p x n_g

  std::function<Vec(const Vec&)> section;             // x -> on-section point
  std::function<Mat(const Vec&)> section_jac;         // x -> n_p x n_m
  std::function<Vec(const Vec&)> section_coord;       // on-section point -> x
  std::function<Vec(const Vec&)> gauge;               // q -> n_g residual
  std::function<Mat(const Vec&)> gauge_jac;           // q -> n_g x n_p

  std::function<Mat(const Vec&)> ubar;                // chart frame, n_g x n_g
  double group_volume = 0.0;
  std::function<Vec(const Vec&, const Vec&)> compose; // chart of a.b
  std::function<Vec(const Vec&)> inverse;             // chart of a^{-1}
  std::function<bool(const Vec&)> in_chart;
  Vec identity_th;

  // Structure constants: bracket(a, b) = sum_g struct_c[g](a, b) * gen_g.
  std::vector<Mat> struct_c;

  // Optional closed forms; generic fallbacks are used when absent.
  std::function<bool(const Vec&, const Vec&, Vec&, Vec&, Vec&)>
      to_adapted_closed;
  std::function<void(const Frame&, Vec&, Vec&)> sigma_grad;
  std::function<void(const Frame&, FrameDerivs&)> analytic_derivs;
  std::function<void(const Vec&, const Vec&, Frame&)> frame_closed;

  std::vector<Irrep> irreps;
  DomainGuard guard;

  double potential(const Vec& q, const Vec& f) const {
    if (potential_c == 0.0) return 0.0;
    return potential_c * (q.squaredNorm() + f.dot(metric_v * f));
  }

  const Irrep* find_irrep(const std::string& label) const {
    for (const auto& ir : irreps)
      if (ir.label == label) return &ir;
    return nullptr;
  }
};

// Built-in models.
ModelSpec make_so2_planar(double potential_c = 0.0,
                          const Mat* metric_v_override = nullptr,
                          const std::vector<int>& charges = {0, 1});
ModelSpec make_su2(double potential_c = 0.0,
                   const std::vector<int>& two_j = {0, 1, 2});
ModelSpec make_model(const std::string& id, double potential_c,
                     const Mat* metric_v_override,
                     const std::vector<std::string>& irrep_labels);

// Checks the algebraic properties every model must satisfy (isometric right
// action, generator consistency, unitary irreps, commutation relations,
// section/gauge compatibility) at pseudo-random points. Returns a list of
// violation descriptions; empty means the model is consistent.
std::vector<std::string> model_self_check(const ModelSpec& m, int n_points,
                                          uint64_t seed);

}  // namespace fibermc
