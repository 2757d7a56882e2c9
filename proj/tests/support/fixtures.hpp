#pragma once

// Shared test fixtures: random matrices, synthetic datasets, and small
// hand-built problems with known analytic properties.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "svrsqp/problems.hpp"
#include "svrsqp/rng.hpp"

namespace fixtures {

using svrsqp::Matrix;
using svrsqp::Rng;
using svrsqp::Vector;

inline Vector random_vector(int size, Rng& rng) {
  Vector v(size);
  for (int i = 0; i < size; ++i) {
    v[i] = rng.next_gaussian();
  }
  return v;
}

inline Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = rng.next_gaussian();
    }
  }
  return m;
}

inline Matrix random_spd(int size, Rng& rng, double shift = 0.5) {
  Matrix b = random_matrix(size, size, rng);
  return b * b.transpose() + shift * Matrix::Identity(size, size);
}

inline Matrix random_symmetric(int size, Rng& rng) {
  Matrix b = random_matrix(size, size, rng);
  return 0.5 * (b + b.transpose());
}

/// Classification data from a noisy linear model. Feature values are
/// standard normal; a fraction of entries is dropped to exercise sparsity.
/// Both labels are always present.
inline svrsqp::Dataset synth_dataset(int num_samples, int num_features, std::uint64_t seed,
                                     double density = 1.0) {
  Rng rng = Rng(seed).split(77);
  Vector truth = random_vector(num_features, rng);

  std::vector<Eigen::Triplet<double>> entries;
  svrsqp::Dataset out;
  out.labels.resize(num_samples);
  for (int i = 0; i < num_samples; ++i) {
    double margin = 0.0;
    for (int j = 0; j < num_features; ++j) {
      if (density < 1.0 && rng.next_unit() >= density) {
        continue;
      }
      double value = rng.next_gaussian();
      entries.emplace_back(i, j, value);
      margin += truth[j] * value;
    }
    double noisy = margin + 0.8 * rng.next_gaussian();
    out.labels[i] = noisy >= 0.0 ? 1.0 : -1.0;
  }
  // Guarantee both classes.
  out.labels[0] = 1.0;
  if (num_samples > 1) {
    out.labels[1] = -1.0;
  }
  out.features.resize(num_samples, num_features);
  out.features.setFromTriplets(entries.begin(), entries.end());
  return out;
}

inline std::string render_libsvm(const svrsqp::Dataset& dataset) {
  std::ostringstream out;
  out.precision(17);
  for (int i = 0; i < dataset.num_samples(); ++i) {
    out << (dataset.labels[i] > 0 ? "+1" : "-1");
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(dataset.features, i); it;
         ++it) {
      out << ' ' << (it.col() + 1) << ':' << it.value();
    }
    out << '\n';
  }
  return out.str();
}

inline void write_libsvm(const svrsqp::Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << render_libsvm(dataset);
}

/// Unique scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto path = std::filesystem::temp_directory_path() /
              ("svrsqp_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(path);
  return path;
}

/// Finite sum of convex quadratics f_i(x) = 1/2 xᵀ Q_i x + b_iᵀ x with
/// diagonal Q_i, under affine constraints. The gradient Lipschitz constant of
/// both each component and the mean is known exactly from the diagonals.
class QuadraticProblem : public svrsqp::Problem {
 public:
  QuadraticProblem(std::vector<Vector> diagonals, std::vector<Vector> offsets,
                   svrsqp::LinearConstraints constraints)
      : diagonals_(std::move(diagonals)),
        offsets_(std::move(offsets)),
        constraints_(std::move(constraints)) {
    mean_diagonal_ = Vector::Zero(diagonals_[0].size());
    mean_offset_ = Vector::Zero(diagonals_[0].size());
    for (std::size_t i = 0; i < diagonals_.size(); ++i) {
      mean_diagonal_ += diagonals_[i];
      mean_offset_ += offsets_[i];
    }
    mean_diagonal_ /= static_cast<double>(diagonals_.size());
    mean_offset_ /= static_cast<double>(diagonals_.size());
  }

  static QuadraticProblem random(int num_components, int dimension, int num_constraints,
                                 std::uint64_t seed) {
    Rng rng = Rng(seed).split(78);
    std::vector<Vector> diagonals, offsets;
    for (int i = 0; i < num_components; ++i) {
      Vector diag(dimension);
      for (int j = 0; j < dimension; ++j) {
        diag[j] = 0.2 + 2.0 * rng.next_unit();  // positive curvature
      }
      diagonals.push_back(diag);
      offsets.push_back(random_vector(dimension, rng));
    }
    svrsqp::LinearConstraints constraints;
    constraints.a = random_matrix(num_constraints, dimension, rng);
    constraints.rhs = random_vector(num_constraints, rng);
    return QuadraticProblem(std::move(diagonals), std::move(offsets), std::move(constraints));
  }

  int dimension() const override { return static_cast<int>(mean_diagonal_.size()); }
  int num_components() const override { return static_cast<int>(diagonals_.size()); }
  int num_constraints() const override { return static_cast<int>(constraints_.a.rows()); }

  double objective(const Vector& x) const override {
    double total = 0.0;
    for (std::size_t i = 0; i < diagonals_.size(); ++i) {
      total += 0.5 * x.dot(diagonals_[i].asDiagonal() * x) + offsets_[i].dot(x);
    }
    return total / static_cast<double>(diagonals_.size());
  }

  Vector component_gradient(int i, const Vector& x) const override {
    return diagonals_[i].asDiagonal() * x + offsets_[i];
  }

  Vector full_gradient(const Vector& x) const override {
    return mean_diagonal_.asDiagonal() * x + mean_offset_;
  }

  Vector constraint(const Vector& x) const override { return constraints_.a * x - constraints_.rhs; }
  Matrix jacobian(const Vector&) const override { return constraints_.a; }
  double constraint_gradient_lipschitz() const override { return 0.0; }

  /// Exact Lipschitz constant of the mean gradient.
  double exact_lipschitz() const { return mean_diagonal_.maxCoeff(); }

  /// Exact maximum over components of the component-gradient Lipschitz
  /// constant.
  double exact_component_lipschitz() const {
    double best = 0.0;
    for (const Vector& diag : diagonals_) {
      best = std::max(best, diag.maxCoeff());
    }
    return best;
  }

 private:
  std::vector<Vector> diagonals_;
  std::vector<Vector> offsets_;
  svrsqp::LinearConstraints constraints_;
  Vector mean_diagonal_;
  Vector mean_offset_;
};

/// Small logistic problem on synthetic data with random affine constraints.
inline svrsqp::LogisticProblem synth_logistic(int num_samples, int num_features,
                                              int num_constraints, std::uint64_t seed) {
  svrsqp::Dataset data = synth_dataset(num_samples, num_features, seed);
  svrsqp::LinearConstraints constraints =
      svrsqp::make_linear_constraints(num_features, num_constraints, Rng(seed).split(79));
  return svrsqp::LogisticProblem(std::move(data), std::move(constraints));
}

}  // namespace fixtures
