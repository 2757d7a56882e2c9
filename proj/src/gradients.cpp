#include "svrsqp/gradients.hpp"

#include <algorithm>
#include <cassert>

namespace svrsqp {

BatchSampler::BatchSampler(int num_components, int batch_size, SamplingMode mode, Rng root)
    : num_components_(num_components), batch_size_(batch_size), mode_(mode), root_(root) {
  assert(batch_size_ >= 1);
  assert(batch_size_ <= num_components_);
}

std::vector<int> BatchSampler::sample(std::uint64_t outer, std::uint64_t inner) const {
  Rng stream = root_.split(pack_iteration(outer, inner));
  std::vector<int> batch;
  batch.reserve(batch_size_);

  if (mode_ == SamplingMode::kWithReplacement) {
    for (int i = 0; i < batch_size_; ++i) {
      batch.push_back(static_cast<int>(stream.next_below(num_components_)));
    }
    return batch;
  }

  // Floyd's subset sampling: b draws, uniform over subsets without
  // replacement, no O(N) shuffle buffer.
  for (int j = num_components_ - batch_size_; j < num_components_; ++j) {
    int candidate = static_cast<int>(stream.next_below(j + 1));
    if (std::find(batch.begin(), batch.end(), candidate) != batch.end()) {
      batch.push_back(j);
    } else {
      batch.push_back(candidate);
    }
  }
  return batch;
}

void ReferenceGradientCache::assign(int index, Vector gradient) {
  gradients_[index] = std::move(gradient);
}

Vector minibatch_gradient(const Problem& problem, const Vector& x, const std::vector<int>& batch,
                          EvalCounter& counter) {
  assert(!batch.empty());
  Vector total = Vector::Zero(problem.dimension());
  for (int i : batch) {
    total += problem.component_gradient(i, x);
  }
  counter.component_grad_evals += static_cast<std::int64_t>(batch.size());
  return total / static_cast<double>(batch.size());
}

Vector svrg_gradient(const Problem& problem, const Vector& x, const Vector& x_ref,
                     const Vector& reference_gradient, const std::vector<int>& batch,
                     EvalCounter& counter, const ReferenceGradientCache* cache) {
  assert(!batch.empty());
  Vector total = Vector::Zero(problem.dimension());
  for (int i : batch) {
    total += problem.component_gradient(i, x);
    if (cache != nullptr) {
      total -= cache->at(i);
    } else {
      total -= problem.component_gradient(i, x_ref);
    }
  }
  std::int64_t evals_per_index = cache != nullptr ? 1 : 2;
  counter.component_grad_evals += evals_per_index * static_cast<std::int64_t>(batch.size());
  return total / static_cast<double>(batch.size()) + reference_gradient;
}

Vector full_gradient_counted(const Problem& problem, const Vector& x, EvalCounter& counter,
                             ReferenceGradientCache* cache) {
  // Accumulates components the same way with and without a cache so that
  // toggling the cache never perturbs the returned reference gradient.
  counter.full_grad_evals += 1;
  const int count = problem.num_components();
  if (cache != nullptr) {
    cache->resize(count);
  }
  Vector total = Vector::Zero(problem.dimension());
  for (int i = 0; i < count; ++i) {
    Vector g = problem.component_gradient(i, x);
    total += g;
    if (cache != nullptr) {
      cache->assign(i, std::move(g));
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace svrsqp
