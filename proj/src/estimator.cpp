#include "ikde/estimator.hpp"

#include "ikde/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace ikde {

DensityEstimator::DensityEstimator(Dataset data, const NormalizedKernel& kernel, const BandwidthRule& rule,
                                   IndexKind index, std::size_t leaf_size)
    : kernel_(kernel),
      ambient_kernel_(kernel),
      h_(0.0) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  h_ = ikde::bandwidth(rule, data.size());
  const int D = static_cast<int>(data.dim());
  ambient_kernel_ = D == kernel.dim() ? kernel : normalize(kernel.profile(), D);
  index_ = std::make_shared<const SpatialIndex>(data, index, leaf_size);
}

double DensityEstimator::kernel_sum(std::span<const double> x, const NormalizedKernel& k) const {
  thread_local std::vector<Neighbor> hits;
  index_->radius_query(x, h_, hits);
  double sum = 0.0;
  for (const auto& nb : hits) sum += k(nb.distance / h_);
  return sum;
}

double DensityEstimator::density_at(std::span<const double> x) const {
  const double n = static_cast<double>(size());
  return kernel_sum(x, kernel_) / (n * std::pow(h_, kernel_.dim()));
}

double DensityEstimator::ambient_density_at(std::span<const double> x) const {
  const double n = static_cast<double>(size());
  return kernel_sum(x, ambient_kernel_) / (n * std::pow(h_, static_cast<double>(ambient_dim())));
}

std::vector<double> DensityEstimator::density_batch(const Dataset& queries, unsigned threads) const {
  std::vector<double> out(queries.size());
  if (queries.empty()) return out;
  if (queries.dim() != ambient_dim()) throw std::invalid_argument("density_batch: dimension mismatch");
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (queries.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(queries.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) out[i] = density_at(queries.row(i));
  });
  return out;
}

DensityEstimator build_estimator(const Dataset& data, const NormalizedKernel& kernel,
                                 const BandwidthRule& rule, IndexKind index) {
  return DensityEstimator(data, kernel, rule, index);
}

}  // namespace ikde
