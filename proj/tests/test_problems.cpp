#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "svrsqp/problems.hpp"

using svrsqp::Dataset;
using svrsqp::L2BallConstraint;
using svrsqp::LinearConstraints;
using svrsqp::LogisticProblem;
using svrsqp::Matrix;
using svrsqp::Rng;
using svrsqp::Vector;

namespace {

Dataset parse_text(const std::string& text, int dimension_override = 0) {
  std::istringstream in(text);
  return svrsqp::parse_libsvm(in, dimension_override);
}

}  // namespace

TEST_CASE("labels in {1,2} map the larger label to +1") {
  Dataset d = parse_text("2 1:1\n1 1:0\n");
  CHECK(d.num_samples() == 2);
  CHECK(d.num_features() == 1);
  CHECK(d.labels[0] == 1.0);
  CHECK(d.labels[1] == -1.0);
}

TEST_CASE("labels in {0,1} map 1 to +1") {
  Dataset d = parse_text("0 1:1\n1 2:1\n");
  CHECK(d.labels[0] == -1.0);
  CHECK(d.labels[1] == 1.0);
}

TEST_CASE("labels in {-1,+1} pass through") {
  Dataset d = parse_text("+1 1:0.5\n-1 2:-0.25\n");
  CHECK(d.labels[0] == 1.0);
  CHECK(d.labels[1] == -1.0);
  CHECK(d.features.coeff(0, 0) == 0.5);
  CHECK(d.features.coeff(1, 1) == -0.25);
}

TEST_CASE("a single distinct label maps to +1") {
  Dataset d = parse_text("5 1:1\n5 2:1\n");
  CHECK(d.labels[0] == 1.0);
  CHECK(d.labels[1] == 1.0);
}

TEST_CASE("blank lines are skipped") {
  Dataset d = parse_text("\n+1 1:1\n\n   \n-1 2:1\n\n");
  CHECK(d.num_samples() == 2);
}

TEST_CASE("dimension is the largest index seen") {
  Dataset d = parse_text("1 3:1\n2 5:2\n");
  CHECK(d.num_features() == 5);
}

TEST_CASE("dimension override widens and bounds the index range") {
  Dataset d = parse_text("1 3:1\n2 5:2\n", 9);
  CHECK(d.num_features() == 9);
  CHECK_THROWS_AS(parse_text("1 3:1\n2 5:2\n", 4), svrsqp::ParseError);
}

TEST_CASE("malformed lines report their line number") {
  try {
    parse_text("+1 1:1\nabc 1:1\n");
    FAIL("expected ParseError");
  } catch (const svrsqp::ParseError& e) {
    CHECK(e.line() == 2);
  }

  CHECK_THROWS_AS(parse_text("+1 x:1\n"), svrsqp::ParseError);
  CHECK_THROWS_AS(parse_text("+1 1\n"), svrsqp::ParseError);
  CHECK_THROWS_AS(parse_text("+1 1:zz\n"), svrsqp::ParseError);
  CHECK_THROWS_AS(parse_text("+1 0:1\n"), svrsqp::ParseError);
  CHECK_THROWS_AS(parse_text("+1 1:inf\n"), svrsqp::ParseError);
}

TEST_CASE("three distinct labels are rejected") {
  CHECK_THROWS_AS(parse_text("1 1:1\n2 1:1\n3 1:1\n"), svrsqp::LabelError);
}

TEST_CASE("render and parse round-trip a synthetic dataset") {
  Dataset original = fixtures::synth_dataset(40, 7, 123, 0.6);
  Dataset parsed = parse_text(fixtures::render_libsvm(original), 7);
  CHECK(parsed.num_samples() == original.num_samples());
  CHECK(parsed.num_features() == original.num_features());
  CHECK((parsed.labels - original.labels).lpNorm<Eigen::Infinity>() == 0.0);
  Matrix dense_original = original.features;
  Matrix dense_parsed = parsed.features;
  CHECK((dense_original - dense_parsed).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("full gradient equals the mean of component gradients") {
  LogisticProblem problem = fixtures::synth_logistic(50, 8, 3, 2001);
  Rng rng(2002);
  Vector x = fixtures::random_vector(8, rng);

  Vector mean = Vector::Zero(8);
  for (int i = 0; i < problem.num_components(); ++i) {
    mean += problem.component_gradient(i, x);
  }
  mean /= problem.num_components();

  Vector full = problem.full_gradient(x);
  CHECK((full - mean).lpNorm<Eigen::Infinity>() <=
        1e-12 * (1.0 + mean.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("full gradient matches finite differences of the objective") {
  LogisticProblem problem = fixtures::synth_logistic(30, 6, 2, 2003);
  Rng rng(2004);
  for (int trial = 0; trial < 5; ++trial) {
    Vector x = fixtures::random_vector(6, rng);
    Vector analytic = problem.full_gradient(x);
    Vector numeric = oracles::fd_gradient(problem, x);
    CHECK((analytic - numeric).lpNorm<Eigen::Infinity>() <=
          1e-6 * (1.0 + numeric.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("objective and gradient stay finite for extreme margins") {
  LogisticProblem problem = fixtures::synth_logistic(20, 5, 2, 2005);
  for (double scale : {1e4, -1e4, 1e8, -1e8}) {
    Vector x = Vector::Constant(5, scale);
    CHECK(std::isfinite(problem.objective(x)));
    CHECK(problem.full_gradient(x).allFinite());
  }
}

TEST_CASE("affine constraints evaluate exactly and have a constant Jacobian") {
  Rng rng(2006);
  LinearConstraints constraints = svrsqp::make_linear_constraints(9, 4, rng.split(1));
  LogisticProblem problem(fixtures::synth_dataset(25, 9, 2007), constraints);

  Vector x = fixtures::random_vector(9, rng);
  Vector expected = constraints.a * x - constraints.rhs;
  CHECK((problem.constraint(x) - expected).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((problem.jacobian(x) - constraints.a).lpNorm<Eigen::Infinity>() == 0.0);

  Matrix numeric = oracles::fd_jacobian(problem, x);
  CHECK((numeric - constraints.a).lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK(problem.constraint_gradient_lipschitz() == 0.0);
}

TEST_CASE("the ball constraint is quadratic with Jacobian 2x") {
  LogisticProblem problem(fixtures::synth_dataset(25, 6, 2008), L2BallConstraint{2.5});
  Rng rng(2009);
  Vector x = fixtures::random_vector(6, rng);

  CHECK(problem.num_constraints() == 1);
  CHECK(problem.constraint(x)[0] == doctest::Approx(x.squaredNorm() - 2.5).epsilon(1e-14));
  CHECK((problem.jacobian(x) - 2.0 * x.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(problem.constraint_gradient_lipschitz() == 2.0);

  Matrix numeric = oracles::fd_jacobian(problem, x);
  CHECK((numeric - 2.0 * x.transpose()).lpNorm<Eigen::Infinity>() <= 1e-6);

  // Three samples along a line determine the quadratic exactly; a fourth
  // point must then be reproduced to rounding accuracy.
  Vector direction = fixtures::random_vector(6, rng);
  auto value = [&](double t) { return problem.constraint(x + t * direction)[0]; };
  double v0 = value(0.0), v1 = value(1.0), v2 = value(2.0);
  double predicted3 = v0 - 3.0 * v1 + 3.0 * v2;  // cubic forward difference = 0
  CHECK(value(3.0) == doctest::Approx(predicted3).epsilon(1e-10));
}

TEST_CASE("random constraints are reproducible and well conditioned") {
  Rng rng(2010);
  LinearConstraints a = svrsqp::make_linear_constraints(12, 5, rng);
  LinearConstraints b = svrsqp::make_linear_constraints(12, 5, rng);
  CHECK(a.a.rows() == 5);
  CHECK(a.a.cols() == 12);
  CHECK(a.rhs.size() == 5);
  // Same generator state passed by value: identical output.
  CHECK((a.a - b.a).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((a.rhs - b.rhs).lpNorm<Eigen::Infinity>() == 0.0);
  // Full rank: the multiplier solve must accept it.
  CHECK_NOTHROW(svrsqp::least_squares_multipliers(a.a, Vector::Ones(12)));
}

TEST_CASE("constraint entries look standard normal") {
  Rng rng(2011);
  LinearConstraints constraints = svrsqp::make_linear_constraints(200, 30, rng);
  double mean = constraints.a.mean();
  double var = (constraints.a.array() - mean).square().mean();
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("Lipschitz probe is exact on an isotropic quadratic") {
  std::vector<Vector> diagonals(4, Vector::Ones(7));
  std::vector<Vector> offsets;
  Rng rng(2012);
  for (int i = 0; i < 4; ++i) {
    offsets.push_back(fixtures::random_vector(7, rng));
  }
  LinearConstraints constraints = svrsqp::make_linear_constraints(7, 2, rng.split(5));
  fixtures::QuadraticProblem problem(diagonals, offsets, constraints);

  double estimate = svrsqp::estimate_lipschitz(problem, Vector::Zero(7), Rng(2013));
  CHECK(estimate == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("Lipschitz probe never exceeds the exact constant") {
  fixtures::QuadraticProblem problem = fixtures::QuadraticProblem::random(6, 10, 3, 2014);
  Rng rng(2015);
  for (int trial = 0; trial < 5; ++trial) {
    Vector x = fixtures::random_vector(10, rng);
    double estimate = svrsqp::estimate_lipschitz(problem, x, rng.split(trial));
    CHECK(estimate <= problem.exact_lipschitz() + 1e-6);
    CHECK(estimate > 0.0);
  }
}

TEST_CASE("Lipschitz probe is deterministic per seed") {
  LogisticProblem problem = fixtures::synth_logistic(40, 8, 3, 2016);
  Vector x = Vector::Zero(8);
  double a = svrsqp::estimate_lipschitz(problem, x, Rng(7));
  double b = svrsqp::estimate_lipschitz(problem, x, Rng(7));
  double c = svrsqp::estimate_lipschitz(problem, x, Rng(8));
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a > 0.0);
}
