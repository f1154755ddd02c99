#pragma once

#include "ikde/bandwidth.hpp"
#include "ikde/dataset.hpp"
#include "ikde/kernels.hpp"
#include "ikde/spatial.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace ikde {

// Kernel density estimate for data supported on a d-dimensional set in R^D:
//
//   p_n(x) = 1/(n h^d) * sum_i K(||X_i - x|| / h)
//
// with K normalized in the intrinsic dimension d. The ambient estimator uses the
// same profile normalized in D and the factor 1/(n h^D).
//
// Immutable after build and shareable across threads.
class DensityEstimator {
public:
  // Throws std::invalid_argument on an empty dataset.
  DensityEstimator(Dataset data, const NormalizedKernel& kernel, const BandwidthRule& rule,
                   IndexKind index = IndexKind::KdTree,
                   std::size_t leaf_size = SpatialIndex::kDefaultLeafSize);

  std::size_t size() const { return index_->size(); }
  std::size_t ambient_dim() const { return index_->dim(); }
  int intrinsic_dim() const { return kernel_.dim(); }
  double bandwidth() const { return h_; }
  const NormalizedKernel& kernel() const { return kernel_; }
  const SpatialIndex& index() const { return *index_; }

  double density_at(std::span<const double> x) const;

  // Classical estimator with the kernel renormalized in dimension D.
  double ambient_density_at(std::span<const double> x) const;

  // Row-wise density_at over an m x D query block, split across `threads` workers
  // (0 = hardware concurrency). The result does not depend on the split.
  std::vector<double> density_batch(const Dataset& queries, unsigned threads = 0) const;

private:
  double kernel_sum(std::span<const double> x, const NormalizedKernel& k) const;

  std::shared_ptr<const SpatialIndex> index_;
  NormalizedKernel kernel_;
  NormalizedKernel ambient_kernel_;
  double h_;
};

DensityEstimator build_estimator(const Dataset& data, const NormalizedKernel& kernel,
                                 const BandwidthRule& rule, IndexKind index = IndexKind::KdTree);

}  // namespace ikde
