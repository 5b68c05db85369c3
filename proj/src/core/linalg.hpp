#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace fibermc {

// All geometric objects in this code are small (total adapted dimension is at
// most 11 for the built-in models), so every matrix lives on the stack.
inline constexpr int kMaxDim = 12;
inline constexpr int kMaxRep = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using cx = std::complex<double>;
using CVec = Eigen::Matrix<cx, Eigen::Dynamic, 1, 0, kMaxRep, 1>;
using CMat = Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxRep, kMaxRep>;

// Lower Cholesky factor of a symmetric positive definite matrix.
inline Mat chol_lower(const Mat& spd) {
  Eigen::LLT<Mat> llt(spd);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("chol_lower: matrix not positive definite");
  }
  return llt.matrixL();
}

inline Mat inverse_sym(const Mat& m) {
  Eigen::LDLT<Mat> ldlt(m);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("inverse_sym: factorization failed");
  }
  Mat id = Mat::Identity(m.rows(), m.cols());
  return ldlt.solve(id);
}

// Exact 2-norm condition number; diagnostics only, not for hot loops.
inline double cond_number(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

}  // namespace fibermc
