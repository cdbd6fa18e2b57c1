#pragma once

#include "ivxlab/dgp.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace fixture {

using namespace ivxlab;

inline oracle::Vec to_vec(const Vector& v) { return oracle::Vec(v.data(), v.data() + v.size()); }

inline oracle::Mat to_mat(const Matrix& M) {
  oracle::Mat out(M.rows(), oracle::Vec(M.cols()));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) out[i][j] = M(i, j);
  return out;
}

// A persistent, endogenous system with a nonzero start so that small-T
// arithmetic exercises every term.
inline Sample fixed_sample(Index T, Index p, Intercept policy, std::uint64_t seed, double rho = 0.6) {
  Matrix S = Matrix::Identity(p + 1, p + 1);
  for (Index j = 1; j <= p; ++j) S(0, j) = S(j, 0) = rho / std::sqrt(static_cast<double>(p));
  DgpParams d = DgpParams::stable_system(0.3, Vector::LinSpaced(p, 0.5, -0.5), PersistenceSpec(Vector::Constant(p, 2.0), 1.0),
                                         InnovationCov::from_matrix(S), policy);
  d.x0 = Vector::Constant(p, 0.7);
  return simulate_sample(d, T, seed);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace fixture
