#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "svrsqp/errors.hpp"

namespace svrsqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct KktSolution {
  Vector d;  // primal step, size n
  Vector y;  // multipliers, size m
};

/// Lower-triangular Cholesky factorization of a symmetric positive definite
/// matrix. Throws NotPositiveDefinite when a pivot falls below
/// 1e-14 * trace(M)/k for a k-by-k input.
class CholeskySpd {
 public:
  explicit CholeskySpd(const Matrix& m);

  Vector solve(const Vector& rhs) const;
  const Matrix& lower() const { return l_; }

 private:
  Matrix l_;
};

/// Solves the equality-constrained quadratic subproblem
///
///   [ H  J^T ] [ d ]   [ -g ]
///   [ J   0  ] [ y ] = [ -c ]
///
/// by assembling the (n+m) x (n+m) system and factoring it with partial
/// pivoting. H must be symmetric, J is m x n with m < n. Throws
/// RankDeficientJacobian when JJ^T fails its pivot test and SingularKkt when
/// elimination of the assembled matrix breaks down.
KktSolution solve_kkt(const Matrix& h, const Matrix& j, const Vector& g, const Vector& c);

/// Least-squares multipliers: solves (J J^T) y = -J g. Same rank test as
/// solve_kkt.
Vector least_squares_multipliers(const Matrix& j, const Vector& g);

/// Process-wide count of solve_kkt calls. Structural tests use this to show
/// that a gradient-only method never touches the KKT path.
std::uint64_t kkt_solve_count();

}  // namespace svrsqp
