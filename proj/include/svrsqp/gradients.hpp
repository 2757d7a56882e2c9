#pragma once

#include <cstdint>
#include <vector>

#include "svrsqp/problems.hpp"
#include "svrsqp/rng.hpp"

namespace svrsqp {

enum class SamplingMode {
  kWithReplacement,
  kWithoutReplacement,
};

/// Tally of component-gradient work. One epoch equals N component-gradient
/// evaluations; a full-gradient pass counts as exactly one epoch.
struct EvalCounter {
  explicit EvalCounter(int num_components) : num_components(num_components) {}

  int num_components;
  std::int64_t component_grad_evals = 0;
  std::int64_t full_grad_evals = 0;

  double epochs() const {
    return (static_cast<double>(component_grad_evals) +
            static_cast<double>(full_grad_evals) * num_components) /
           num_components;
  }
};

/// Draws index batches from [0, N). Every (outer, inner) pair gets its own
/// substream of the root generator, so the sequence of batches is a pure
/// function of (seed, outer, inner) and independent of evaluation order.
class BatchSampler {
 public:
  BatchSampler(int num_components, int batch_size, SamplingMode mode, Rng root);

  std::vector<int> sample(std::uint64_t outer, std::uint64_t inner) const;

  int batch_size() const { return batch_size_; }
  SamplingMode mode() const { return mode_; }

 private:
  int num_components_;
  int batch_size_;
  SamplingMode mode_;
  Rng root_;
};

/// Stores per-component gradients at the current reference point so the
/// variance-reduced estimator can reuse them. Worth the N-vector memory only
/// for small problems.
class ReferenceGradientCache {
 public:
  void assign(int index, Vector gradient);
  const Vector& at(int index) const { return gradients_[index]; }
  void resize(int num_components) { gradients_.resize(num_components); }
  bool empty() const { return gradients_.empty(); }

 private:
  std::vector<Vector> gradients_;
};

/// Mean of component gradients over the batch. Charges |batch| component
/// evaluations.
Vector minibatch_gradient(const Problem& problem, const Vector& x, const std::vector<int>& batch,
                          EvalCounter& counter);

/// Variance-reduced estimator: mean over the batch of
/// ∇f_i(x) - ∇f_i(x_ref), plus the stored reference gradient. Both terms use
/// the same batch. Charges 2|batch| component evaluations, or |batch| when a
/// cache of reference gradients is supplied.
Vector svrg_gradient(const Problem& problem, const Vector& x, const Vector& x_ref,
                     const Vector& reference_gradient, const std::vector<int>& batch,
                     EvalCounter& counter, const ReferenceGradientCache* cache = nullptr);

/// Full gradient that also populates the reference cache in the same pass, so
/// the cached run charges exactly one epoch per reference point. Charges one
/// full-gradient evaluation.
Vector full_gradient_counted(const Problem& problem, const Vector& x, EvalCounter& counter,
                             ReferenceGradientCache* cache = nullptr);

}  // namespace svrsqp
