#pragma once

#include "core/linalg.hpp"

namespace fibermc {

// Central differences with per-coordinate relative step.

template <class F>
Vec fd_gradient(F&& f, const Vec& p, double h0 = 1e-6) {
  Vec g(p.size());
  Vec q = p;
  for (int i = 0; i < p.size(); ++i) {
    double h = h0 * std::max(1.0, std::abs(p[i]));
    q[i] = p[i] + h;
    double fp = f(q);
    q[i] = p[i] - h;
    double fm = f(q);
    q[i] = p[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

template <class F>
Mat fd_jacobian(F&& f, const Vec& p, int out_dim, double h0 = 1e-6) {
  Mat J(out_dim, p.size());
  Vec q = p;
  for (int i = 0; i < p.size(); ++i) {
    double h = h0 * std::max(1.0, std::abs(p[i]));
    q[i] = p[i] + h;
    Vec fp = f(q);
    q[i] = p[i] - h;
    Vec fm = f(q);
    q[i] = p[i];
    J.col(i) = (fp - fm) / (2.0 * h);
  }
  return J;
}

// Symmetric Hessian of a scalar function by nested central differences.
template <class F>
Mat fd_hessian(F&& f, const Vec& p, double h0 = 1e-4) {
  int n = static_cast<int>(p.size());
  Mat H(n, n);
  double f0 = f(p);
  Vec q = p;
  for (int i = 0; i < n; ++i) {
    double hi = h0 * std::max(1.0, std::abs(p[i]));
    q[i] = p[i] + hi;
    double fpi = f(q);
    q[i] = p[i] - hi;
    double fmi = f(q);
    q[i] = p[i];
    H(i, i) = (fpi - 2.0 * f0 + fmi) / (hi * hi);
    for (int j = i + 1; j < n; ++j) {
      double hj = h0 * std::max(1.0, std::abs(p[j]));
      q[i] = p[i] + hi; q[j] = p[j] + hj;
      double fpp = f(q);
      q[j] = p[j] - hj;
      double fpm = f(q);
      q[i] = p[i] - hi; q[j] = p[j] + hj;
      double fmp = f(q);
      q[j] = p[j] - hj;
      double fmm = f(q);
      q[i] = p[i]; q[j] = p[j];
      H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
    }
  }
  return H;
}

}  // namespace fibermc
