#pragma once

#include "ivxlab/core.hpp"

#include <Eigen/SVD>

namespace ivxlab {

struct Inverse {
  Matrix value;
  bool pseudo = false;  ///< true when singular values were dropped
};

/// Inverse of a square matrix, falling back to the Moore-Penrose
/// pseudo-inverse when singular values fall below rel_tol times the largest.
inline Inverse robust_inverse(const Matrix& A, double rel_tol = 1e-12) {
  if (A.rows() != A.cols()) throw std::invalid_argument("robust_inverse: matrix is not square");
  Inverse out;
  if (A.rows() == 1) {
    const double a = A(0, 0);
    out.value = Matrix::Zero(1, 1);
    if (std::isfinite(a) && std::abs(a) > 0.0) {
      out.value(0, 0) = 1.0 / a;
    } else {
      out.pseudo = true;
    }
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double cutoff = rel_tol * (s.size() ? s(0) : 0.0);
  Vector inv_s = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) {
      inv_s(i) = 1.0 / s(i);
    } else {
      out.pseudo = true;
    }
  }
  out.value = svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
  return out;
}

/// x' A^{-1} x for a symmetric A, pseudo-inverting when needed.
struct QuadraticForm {
  double value = 0.0;
  bool pseudo = false;
};

inline QuadraticForm quadratic_form_inverse(const Vector& x, const Matrix& A, double rel_tol = 1e-12) {
  const Inverse inv = robust_inverse(A, rel_tol);
  return {x.dot(inv.value * x), inv.pseudo};
}

/// Column means of the rows in [begin, end).
inline Vector column_means(const Matrix& X, IndexRange r) {
  return X.middleRows(r.begin, r.size()).colwise().mean().transpose();
}

}  // namespace ivxlab
