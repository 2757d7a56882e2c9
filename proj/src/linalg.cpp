#include "svrsqp/linalg.hpp"

#include <Eigen/LU>
#include <atomic>
#include <cmath>

namespace svrsqp {

namespace {

std::atomic<std::uint64_t> g_kkt_solves{0};

// In-place lower Cholesky with a caller-supplied pivot floor. Returns false
// as soon as a pivot (the value before the square root) drops to the floor.
bool cholesky_lower(const Matrix& a, double pivot_floor, Matrix& l) {
  const Eigen::Index k = a.rows();
  l = Matrix::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > pivot_floor)) {
      return false;
    }
    l(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < k; ++i) {
      double value = a(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = value / l(j, j);
    }
  }
  return true;
}

// Factors JJ^T, rejecting Jacobians whose normal matrix has a pivot at or
// below 1e-12 times its largest diagonal entry.
Matrix factor_normal_matrix(const Matrix& j) {
  Matrix jjt = j * j.transpose();
  double scale = jjt.diagonal().maxCoeff();
  Matrix l;
  if (!cholesky_lower(jjt, 1e-12 * scale, l)) {
    throw RankDeficientJacobian("constraint Jacobian is numerically rank deficient");
  }
  return l;
}

Vector triangular_solve(const Matrix& l, const Vector& rhs) {
  Vector z = l.triangularView<Eigen::Lower>().solve(rhs);
  return l.transpose().triangularView<Eigen::Upper>().solve(z);
}

}  // namespace

CholeskySpd::CholeskySpd(const Matrix& m) {
  const Eigen::Index k = m.rows();
  double floor = 1e-14 * m.trace() / static_cast<double>(k);
  if (!cholesky_lower(m, floor, l_)) {
    throw NotPositiveDefinite("matrix is not positive definite to working tolerance");
  }
}

Vector CholeskySpd::solve(const Vector& rhs) const { return triangular_solve(l_, rhs); }

KktSolution solve_kkt(const Matrix& h, const Matrix& j, const Vector& g, const Vector& c) {
  g_kkt_solves.fetch_add(1, std::memory_order_relaxed);

  const Eigen::Index n = h.rows();
  const Eigen::Index m = j.rows();

  factor_normal_matrix(j);

  Matrix kkt = Matrix::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = h;
  kkt.topRightCorner(n, m) = j.transpose();
  kkt.bottomLeftCorner(m, n) = j;

  Vector rhs(n + m);
  rhs.head(n) = -g;
  rhs.tail(m) = -c;

  Eigen::PartialPivLU<Matrix> lu(kkt);
  Vector u_diag = lu.matrixLU().diagonal().cwiseAbs();
  if (u_diag.minCoeff() <= 1e-14 * u_diag.maxCoeff()) {
    throw SingularKkt("assembled KKT matrix is numerically singular");
  }

  Vector sol = lu.solve(rhs);
  return KktSolution{sol.head(n), sol.tail(m)};
}

Vector least_squares_multipliers(const Matrix& j, const Vector& g) {
  Matrix l = factor_normal_matrix(j);
  Vector rhs = -(j * g);
  Vector y = triangular_solve(l, rhs);
  // One refinement sweep keeps the residual at rounding level even when JJ^T
  // is poorly scaled.
  Vector residual = rhs - j * (j.transpose() * y);
  y += triangular_solve(l, residual);
  return y;
}

std::uint64_t kkt_solve_count() { return g_kkt_solves.load(std::memory_order_relaxed); }

}  // namespace svrsqp
