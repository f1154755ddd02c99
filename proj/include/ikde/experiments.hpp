#pragma once

#include "ikde/bandwidth.hpp"
#include "ikde/dataset.hpp"
#include "ikde/domains.hpp"
#include "ikde/kernels.hpp"
#include "ikde/spatial.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ikde {

struct ExperimentPlan {
  explicit ExperimentPlan(DomainModel model) : domain(std::move(model)) {}

  DomainModel domain;
  KernelKind kernel = KernelKind::TruncatedGaussian;
  BandwidthRule rule = RateSchedule{};
  std::vector<std::size_t> n_grid;
  std::size_t repetitions = 1;
  std::size_t test_size = 1;
  std::uint64_t seed = 0;
  IndexKind index = IndexKind::KdTree;
  unsigned threads = 1;
  // Replaces the sampled test set when present (must have test_size rows).
  std::optional<Dataset> test_points;

  // Throws std::invalid_argument unless the n-grid is strictly increasing and R, T >= 1.
  void validate() const;
};

// One (n, repetition) cell. bias2 and var are per-n quantities: the across-rep
// decomposition averaged over test points, repeated on every row of that n.
struct ExperimentRecord {
  std::string domain;
  int D = 0;
  int d = 0;
  std::size_t n = 0;
  std::size_t rep = 0;
  double h = 0.0;
  double mse = 0.0;
  double bias2 = 0.0;
  double var = 0.0;
  double seconds = 0.0;
  std::string diagnostic;  // non-empty when the cell aborted

  bool ok() const { return diagnostic.empty(); }
};

// Per test point, per n: the true density and the spread of estimates across reps.
struct PointRecord {
  std::size_t n = 0;
  std::size_t point = 0;
  double density = 0.0;
  double mean_estimate = 0.0;
  double bias2 = 0.0;
  double var = 0.0;
};

struct MseProbeResult {
  std::vector<ExperimentRecord> records;  // sorted by n, then rep
  std::vector<PointRecord> points;        // sorted by n, then point
};

// Trains on fresh samples per (n, rep) from substream "train:<n>:<rep>" and scores
// against a test set drawn once from substream "test". Cells run on plan.threads
// workers; output is independent of the worker count.
MseProbeResult mse_probe(const ExperimentPlan& plan);

struct DecompositionRow {
  std::size_t n = 0;
  std::size_t reps = 0;
  double mse = 0.0;     // mean over reps
  double mse_se = 0.0;  // standard error of that mean
  double bias2 = 0.0;
  double var = 0.0;     // unbiased (R - 1) sample variance
  double gap = 0.0;     // |mse - bias2 - var|
};

std::vector<DecompositionRow> decomposition(const std::vector<ExperimentRecord>& records);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

// Ordinary least squares of log(y) on log(x). Requires >= 2 points, all positive.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double slope_theory = 0.0;  // -2m / (d + 2m)
  std::size_t points = 0;
};

// Fits log(mean MSE over reps) against log(n). Throws std::invalid_argument on
// fewer than 4 distinct n or a non-positive mean MSE.
RateFit fit_rate(const std::vector<ExperimentRecord>& records, int d, double m);

struct AmbientEntry {
  int D = 0;
  double mean_mse = 0.0;
  double ci_low = 0.0;  // mean +- 1.96 SE across reps
  double ci_high = 0.0;
  double ratio = 1.0;   // mean_mse / mean_mse of the first entry
};

struct InvarianceReport {
  std::size_t n_star = 0;
  std::vector<AmbientEntry> entries;  // ascending D
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  bool within_bounds = true;  // every ratio in [1/2, 2]
};

// Compares mean MSE at n_star across ambient dimensions.
// Throws std::invalid_argument with "need >= 2 ambient dimensions" or "mismatched grids".
InvarianceReport ambient_invariance_check(const std::vector<ExperimentRecord>& records, std::size_t n_star);

struct BiasPoint {
  double h = 0.0;
  double expectation = 0.0;  // E[h^-d K(||X - x|| / h)]
  double density = 0.0;      // p(x)
  double bias = 0.0;         // expectation - density
  double se = 0.0;
};

struct McOptions {
  std::size_t samples = 1'000'000;
  // Independent stratified batches; the standard error comes from their spread.
  std::size_t batches = 8;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// Monte-Carlo estimate of the kernel-smoothing bias at x for each h (decreasing).
// Draws are stratified on each sampler's leading uniform. Requires samples >= 1e5
// and, unless allow_singular, a regular point x.
std::vector<BiasPoint> bias_probe(const DomainModel& domain, KernelKind kernel, std::span<const double> x,
                                  std::span<const double> h_grid, const McOptions& mc,
                                  bool allow_singular = false);

struct VarianceRow {
  std::size_t n = 0;
  double h = 0.0;
  double mean_estimate = 0.0;
  double variance = 0.0;  // unbiased across R train sets
  double variance_se = 0.0;
  double predicted = 0.0;  // p(x) * s_d / (n h^d)
};

// Sample variance of the estimate at x across R independent train sets per n.
// Throws std::invalid_argument("R too small") when R < 30.
std::vector<VarianceRow> variance_probe(const DomainModel& domain, KernelKind kernel, std::span<const double> x,
                                        std::span<const std::size_t> n_grid, const BandwidthRule& rule,
                                        std::size_t repetitions, std::uint64_t seed, unsigned threads = 1,
                                        IndexKind index = IndexKind::KdTree);

// Radial test functions for the blow-up diagnostic. Kernel-shaped functions are
// normalized in the intrinsic dimension; Bump is exp(1 - 1/(1 - r^2)).
enum class TestFunction { Zero, TruncatedGaussian, Epanechnikov, Bump };

TestFunction parse_test_function(std::string_view name);

struct BlowupPoint {
  double h = 0.0;
  double lhs = 0.0;  // E[f((X - x)/h)] / h^d
  double lhs_se = 0.0;
  double rhs = 0.0;  // sum over strata of density * int_{T} f
};

// Throws SingularPointError at singular points, except for subspace unions where
// the right side sums over every plane through x.
std::vector<BlowupPoint> tangent_blowup_probe(const DomainModel& domain, std::span<const double> x, TestFunction f,
                                              std::span<const double> h_grid, const McOptions& mc);

// CSV header: domain,D,d,n,rep,h,mse,bias2,var,seconds. With timing off the
// seconds column is written as 0 so that repeated runs are byte-identical.
void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, bool timing);
std::vector<ExperimentRecord> read_records_csv(std::istream& in);
void write_points_csv(std::ostream& out, const std::vector<PointRecord>& points);

// key = value block, one per line.
std::string to_text(const RateFit& fit);
std::string to_json(const RateFit& fit);
std::string to_text(const InvarianceReport& report);
std::string to_json(const InvarianceReport& report);

}  // namespace ikde
