#pragma once

#include <Eigen/SparseCore>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>

#include "svrsqp/linalg.hpp"
#include "svrsqp/rng.hpp"

namespace svrsqp {

/// Binary classification data with labels normalized to {-1, +1}.
struct Dataset {
  Eigen::SparseMatrix<double, Eigen::RowMajor> features;  // N x n
  Vector labels;                                          // entries are -1 or +1

  int num_samples() const { return static_cast<int>(features.rows()); }
  int num_features() const { return static_cast<int>(features.cols()); }
};

/// Reads sparse `label index:value ...` lines with 1-based indices. Blank
/// lines are skipped. The feature dimension is the largest index seen, or
/// `dimension_override` when positive (indices beyond it are rejected).
/// Exactly one or two distinct raw labels are allowed; the numerically larger
/// one maps to +1, the other to -1. Throws ParseError or LabelError.
Dataset parse_libsvm(std::istream& in, int dimension_override = 0);
Dataset load_libsvm_file(const std::string& path, int dimension_override = 0);

/// Affine equality constraints c(x) = A x - rhs.
struct LinearConstraints {
  Matrix a;    // m x n
  Vector rhs;  // m
};

/// Single quadratic constraint c(x) = ‖x‖² - radius_sq.
struct L2BallConstraint {
  double radius_sq = 1.0;
};

using ConstraintSpec = std::variant<LinearConstraints, L2BallConstraint>;

/// Draws A and rhs with independent standard normal entries, retrying up to
/// three times if the rank test on AA^T fails. Throws RankDeficientJacobian
/// after the last attempt.
LinearConstraints make_linear_constraints(int dimension, int num_constraints, Rng rng);

/// Finite-sum objective with smooth equality constraints.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual int dimension() const = 0;        // n
  virtual int num_components() const = 0;   // N
  virtual int num_constraints() const = 0;  // m

  virtual double objective(const Vector& x) const = 0;
  virtual Vector component_gradient(int i, const Vector& x) const = 0;
  virtual Vector full_gradient(const Vector& x) const = 0;
  virtual Vector constraint(const Vector& x) const = 0;
  virtual Matrix jacobian(const Vector& x) const = 0;

  /// Lipschitz constant of the constraint gradients (0 for affine c).
  virtual double constraint_gradient_lipschitz() const = 0;
};

/// Mean logistic loss over a dataset: f(x) = (1/N) Σ log(1 + exp(-yᵢ Xᵢᵀx)),
/// subject to the given equality constraints.
class LogisticProblem : public Problem {
 public:
  LogisticProblem(Dataset dataset, ConstraintSpec constraints);

  int dimension() const override;
  int num_components() const override;
  int num_constraints() const override;

  double objective(const Vector& x) const override;
  Vector component_gradient(int i, const Vector& x) const override;
  Vector full_gradient(const Vector& x) const override;
  Vector constraint(const Vector& x) const override;
  Matrix jacobian(const Vector& x) const override;
  double constraint_gradient_lipschitz() const override;

  const Dataset& dataset() const { return dataset_; }
  const ConstraintSpec& constraints() const { return constraints_; }

 private:
  Dataset dataset_;
  ConstraintSpec constraints_;
};

/// Estimates the Lipschitz constant of the full gradient by probing:
/// max over 10 unit directions u of ‖∇f(x + δu) - ∇f(x)‖₂ / δ with δ = 1e-2.
double estimate_lipschitz(const Problem& problem, const Vector& x, Rng rng);

}  // namespace svrsqp
