#include "svrsqp/problems.hpp"

#include <cassert>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <vector>

namespace svrsqp {

namespace {

bool parse_full_double(const std::string& token, double& out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + token.size() && std::isfinite(out);
}

bool parse_full_index(const std::string& token, long& out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtol(begin, &end, 10);
  return end == begin + token.size();
}

double softplus(double z) {
  // log(1 + exp(z)) without overflow for large |z|.
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid_neg(double t) {
  // 1 / (1 + exp(t)), stable on both tails.
  if (t >= 0.0) {
    double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

}  // namespace

Dataset parse_libsvm(std::istream& in, int dimension_override) {
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> raw_labels;
  long max_index = 0;
  std::size_t line_number = 0;

  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) {
      continue;  // blank line
    }

    double label;
    if (!parse_full_double(token, label)) {
      throw ParseError(line_number, "expected numeric label, got '" + token + "'");
    }
    int row = static_cast<int>(raw_labels.size());
    raw_labels.push_back(label);

    while (tokens >> token) {
      std::size_t colon = token.find(':');
      if (colon == std::string::npos) {
        throw ParseError(line_number, "expected index:value, got '" + token + "'");
      }
      long index;
      if (!parse_full_index(token.substr(0, colon), index) || index < 1) {
        throw ParseError(line_number, "feature index must be a positive integer in '" + token + "'");
      }
      double value;
      if (!parse_full_double(token.substr(colon + 1), value)) {
        throw ParseError(line_number, "feature value must be finite in '" + token + "'");
      }
      if (dimension_override > 0 && index > dimension_override) {
        throw ParseError(line_number, "feature index " + std::to_string(index) +
                                          " exceeds declared dimension " +
                                          std::to_string(dimension_override));
      }
      max_index = std::max(max_index, index);
      entries.emplace_back(row, static_cast<int>(index - 1), value);
    }
  }

  std::map<double, int> distinct;
  for (double label : raw_labels) {
    ++distinct[label];
  }
  if (distinct.size() > 2) {
    std::string seen;
    for (const auto& [label, count] : distinct) {
      seen += (seen.empty() ? "" : ", ") + std::to_string(label);
    }
    throw LabelError("expected at most two distinct labels, got: " + seen);
  }

  Dataset out;
  int n = dimension_override > 0 ? dimension_override : static_cast<int>(max_index);
  int rows = static_cast<int>(raw_labels.size());
  out.features.resize(rows, n);
  out.features.setFromTriplets(entries.begin(), entries.end());
  out.labels.resize(rows);
  double positive = distinct.empty() ? 0.0 : distinct.rbegin()->first;
  for (int i = 0; i < rows; ++i) {
    out.labels[i] = raw_labels[i] == positive ? 1.0 : -1.0;
  }
  return out;
}

Dataset load_libsvm_file(const std::string& path, int dimension_override) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open dataset file: " + path);
  }
  return parse_libsvm(in, dimension_override);
}

LinearConstraints make_linear_constraints(int dimension, int num_constraints, Rng rng) {
  assert(num_constraints < dimension);
  for (int attempt = 0; attempt < 3; ++attempt) {
    LinearConstraints out;
    out.a.resize(num_constraints, dimension);
    for (int i = 0; i < num_constraints; ++i) {
      for (int j = 0; j < dimension; ++j) {
        out.a(i, j) = rng.next_gaussian();
      }
    }
    out.rhs.resize(num_constraints);
    for (int i = 0; i < num_constraints; ++i) {
      out.rhs[i] = rng.next_gaussian();
    }
    try {
      least_squares_multipliers(out.a, Vector::Zero(dimension));
      return out;
    } catch (const RankDeficientJacobian&) {
      // resample
    }
  }
  throw RankDeficientJacobian("random constraint matrix failed the rank test three times");
}

LogisticProblem::LogisticProblem(Dataset dataset, ConstraintSpec constraints)
    : dataset_(std::move(dataset)), constraints_(std::move(constraints)) {
  if (const auto* linear = std::get_if<LinearConstraints>(&constraints_)) {
    assert(linear->a.cols() == dataset_.num_features());
    assert(linear->a.rows() == linear->rhs.size());
  }
}

int LogisticProblem::dimension() const { return dataset_.num_features(); }
int LogisticProblem::num_components() const { return dataset_.num_samples(); }

int LogisticProblem::num_constraints() const {
  if (std::holds_alternative<L2BallConstraint>(constraints_)) {
    return 1;
  }
  return static_cast<int>(std::get<LinearConstraints>(constraints_).a.rows());
}

double LogisticProblem::objective(const Vector& x) const {
  const int rows = dataset_.num_samples();
  double total = 0.0;
  for (int i = 0; i < rows; ++i) {
    double margin = dataset_.labels[i] * dataset_.features.row(i).dot(x);
    total += softplus(-margin);
  }
  return total / rows;
}

Vector LogisticProblem::component_gradient(int i, const Vector& x) const {
  double margin = dataset_.labels[i] * dataset_.features.row(i).dot(x);
  double coef = -dataset_.labels[i] * sigmoid_neg(margin);
  Vector grad = Vector::Zero(dataset_.num_features());
  for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(dataset_.features, i); it;
       ++it) {
    grad[it.col()] = coef * it.value();
  }
  return grad;
}

Vector LogisticProblem::full_gradient(const Vector& x) const {
  const int rows = dataset_.num_samples();
  Vector weights(rows);
  for (int i = 0; i < rows; ++i) {
    double margin = dataset_.labels[i] * dataset_.features.row(i).dot(x);
    weights[i] = -dataset_.labels[i] * sigmoid_neg(margin) / rows;
  }
  return dataset_.features.transpose() * weights;
}

Vector LogisticProblem::constraint(const Vector& x) const {
  if (const auto* ball = std::get_if<L2BallConstraint>(&constraints_)) {
    Vector c(1);
    c[0] = x.squaredNorm() - ball->radius_sq;
    return c;
  }
  const auto& linear = std::get<LinearConstraints>(constraints_);
  return linear.a * x - linear.rhs;
}

Matrix LogisticProblem::jacobian(const Vector& x) const {
  if (std::holds_alternative<L2BallConstraint>(constraints_)) {
    return 2.0 * x.transpose();
  }
  return std::get<LinearConstraints>(constraints_).a;
}

double LogisticProblem::constraint_gradient_lipschitz() const {
  return std::holds_alternative<L2BallConstraint>(constraints_) ? 2.0 : 0.0;
}

double estimate_lipschitz(const Problem& problem, const Vector& x, Rng rng) {
  constexpr int kProbes = 10;
  constexpr double kDelta = 1e-2;
  const int n = problem.dimension();

  Vector base = problem.full_gradient(x);
  double best = 0.0;
  for (int probe = 0; probe < kProbes; ++probe) {
    Vector direction(n);
    double norm = 0.0;
    do {
      for (int i = 0; i < n; ++i) {
        direction[i] = rng.next_gaussian();
      }
      norm = direction.norm();
    } while (norm == 0.0);
    direction /= norm;
    Vector shifted = problem.full_gradient(x + kDelta * direction);
    best = std::max(best, (shifted - base).norm() / kDelta);
  }
  return best;
}

}  // namespace svrsqp
