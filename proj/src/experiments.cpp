#include "ikde/experiments.hpp"

#include "ikde/estimator.hpp"
#include "ikde/parallel.hpp"
#include "ikde/quadrature.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ikde {

namespace {

std::string cell_stream(std::string_view prefix, std::size_t a, std::size_t b) {
  return std::string(prefix) + ":" + std::to_string(a) + ":" + std::to_string(b);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> v) {
  MeanSe out;
  if (v.empty()) return out;
  for (double t : v) out.mean += t;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double t : v) ss += (t - out.mean) * (t - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return out;
}

// Stratified Monte-Carlo mean of g(||X - x|| / h) / h^d, one entry per h.
std::vector<MeanSe> smoothed_expectation(const DomainModel& domain, std::span<const double> x,
                                         std::span<const double> h_grid, const McOptions& mc,
                                         std::string_view tag, const std::function<double(double)>& g) {
  if (mc.batches == 0 || mc.samples < mc.batches) throw std::invalid_argument("monte carlo: bad sample/batch counts");
  const std::size_t per_batch = mc.samples / mc.batches;
  const int D = domain.ambient_dim();
  const int d = domain.intrinsic_dim();
  std::vector<double> batch_means(h_grid.size() * mc.batches);

  parallel_for(batch_means.size(), mc.threads, [&](std::size_t job) {
    const std::size_t hi = job / mc.batches;
    const std::size_t b = job % mc.batches;
    const double h = h_grid[hi];
    UniformSource src(mc.seed, cell_stream(tag, hi, b));
    src.stratify(per_batch);
    std::vector<double> point(D);
    double sum = 0.0;
    for (std::size_t i = 0; i < per_batch; ++i) {
      domain.draw(src, point);
      const double r = distance(point, x) / h;
      if (r <= 1.0) sum += g(r);
    }
    batch_means[job] = sum / static_cast<double>(per_batch) / std::pow(h, d);
  });

  std::vector<MeanSe> out;
  for (std::size_t hi = 0; hi < h_grid.size(); ++hi) {
    out.push_back(mean_se(std::span<const double>(batch_means.data() + hi * mc.batches, mc.batches)));
  }
  return out;
}

void check_h_grid(std::span<const double> h_grid) {
  if (h_grid.empty()) throw std::invalid_argument("h-grid is empty");
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    if (!(h_grid[i] > 0.0) || !std::isfinite(h_grid[i])) throw std::invalid_argument("h-grid values must be positive");
    if (i > 0 && !(h_grid[i] < h_grid[i - 1])) throw std::invalid_argument("h-grid must be strictly decreasing");
  }
}

void check_query(const DomainModel& domain, std::span<const double> x) {
  if (static_cast<int>(x.size()) != domain.ambient_dim()) throw std::invalid_argument("query has wrong dimension");
}

}  // namespace

void ExperimentPlan::validate() const {
  if (n_grid.empty()) throw std::invalid_argument("plan: empty n-grid");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] == 0) throw std::invalid_argument("plan: n must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("plan: n-grid must be strictly increasing");
  }
  if (repetitions < 1) throw std::invalid_argument("plan: repetitions must be >= 1");
  if (test_size < 1) throw std::invalid_argument("plan: test size must be >= 1");
  if (test_points) {
    if (test_points->size() != test_size) throw std::invalid_argument("plan: test point count differs from test size");
    if (static_cast<int>(test_points->dim()) != domain.ambient_dim()) {
      throw std::invalid_argument("plan: test points have wrong dimension");
    }
  }
  if (const auto* s = std::get_if<RateSchedule>(&rule); s && s->d != domain.intrinsic_dim()) {
    throw std::invalid_argument("plan: bandwidth schedule dimension differs from the domain's");
  }
}

MseProbeResult mse_probe(const ExperimentPlan& plan) {
  plan.validate();
  const int D = plan.domain.ambient_dim();
  const int d = plan.domain.intrinsic_dim();
  const auto kernel = normalize(plan.kernel, d);

  Dataset test;
  if (plan.test_points) {
    test = *plan.test_points;
  } else {
    UniformSource src(plan.seed, "test");
    test = plan.domain.sample(plan.test_size, src);
  }
  const std::size_t T = test.size();
  std::vector<double> truth(T);
  for (std::size_t j = 0; j < T; ++j) truth[j] = plan.domain.exact_density(test.row(j));

  const std::size_t R = plan.repetitions;
  const std::size_t cells = plan.n_grid.size() * R;
  std::vector<std::vector<double>> estimates(cells);
  std::vector<ExperimentRecord> records(cells);

  parallel_for(cells, plan.threads, [&](std::size_t cell) {
    const std::size_t n = plan.n_grid[cell / R];
    const std::size_t rep = cell % R;
    auto& rec = records[cell];
    rec.domain = plan.domain.id();
    rec.D = D;
    rec.d = d;
    rec.n = n;
    rec.rep = rep;
    const auto start = std::chrono::steady_clock::now();
    UniformSource src(plan.seed, cell_stream("train", n, rep));
    const DensityEstimator est(plan.domain.sample(n, src), kernel, plan.rule, plan.index);
    rec.h = est.bandwidth();
    estimates[cell] = est.density_batch(test, 1);
    double sum = 0.0;
    for (std::size_t j = 0; j < T; ++j) {
      const double e = estimates[cell][j] - truth[j];
      sum += e * e;
    }
    rec.mse = sum / static_cast<double>(T);
    if (!std::isfinite(rec.mse)) rec.diagnostic = "non-finite estimate";
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  MseProbeResult result;
  for (std::size_t ni = 0; ni < plan.n_grid.size(); ++ni) {
    double bias2_avg = 0.0;
    double var_avg = 0.0;
    std::vector<double> across(R);
    for (std::size_t j = 0; j < T; ++j) {
      for (std::size_t r = 0; r < R; ++r) across[r] = estimates[ni * R + r][j];
      const MeanSe ms = mean_se(across);
      const double var = R > 1 ? ms.se * ms.se * static_cast<double>(R) : 0.0;
      const double b = ms.mean - truth[j];
      result.points.push_back({plan.n_grid[ni], j, truth[j], ms.mean, b * b, var});
      bias2_avg += b * b;
      var_avg += var;
    }
    for (std::size_t r = 0; r < R; ++r) {
      auto& rec = records[ni * R + r];
      rec.bias2 = bias2_avg / static_cast<double>(T);
      rec.var = var_avg / static_cast<double>(T);
    }
  }
  result.records = std::move(records);
  return result;
}

std::vector<DecompositionRow> decomposition(const std::vector<ExperimentRecord>& records) {
  std::map<std::size_t, std::vector<const ExperimentRecord*>> by_n;
  for (const auto& r : records) {
    if (r.ok()) by_n[r.n].push_back(&r);
  }
  std::vector<DecompositionRow> rows;
  for (const auto& [n, recs] : by_n) {
    std::vector<double> mses;
    for (const auto* r : recs) mses.push_back(r->mse);
    const MeanSe ms = mean_se(mses);
    DecompositionRow row{n, recs.size(), ms.mean, ms.se, recs.front()->bias2, recs.front()->var, 0.0};
    row.gap = std::abs(row.mse - row.bias2 - row.var);
    rows.push_back(row);
  }
  return rows;
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit: need at least two points");
  const std::size_t k = x.size();
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit: x values must not all be equal");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (k > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double res = ly[i] - fit.intercept - fit.slope * lx[i];
      sse += res * res;
    }
    fit.slope_se = std::sqrt(sse / static_cast<double>(k - 2) / sxx);
  }
  return fit;
}

RateFit fit_rate(const std::vector<ExperimentRecord>& records, int d, double m) {
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto& r : records) {
    if (r.ok()) by_n[r.n].push_back(r.mse);
  }
  if (by_n.size() < 4) throw std::invalid_argument("fit_rate: need at least 4 distinct n values");
  std::vector<double> ns, mses;
  for (const auto& [n, v] : by_n) {
    const double mean = mean_se(v).mean;
    if (!(mean > 0.0)) throw std::invalid_argument("fit_rate: mean MSE must be positive");
    ns.push_back(static_cast<double>(n));
    mses.push_back(mean);
  }
  const LogLogFit f = fit_loglog(ns, mses);
  return RateFit{f.slope, f.intercept, f.slope_se, -2.0 * m / (d + 2.0 * m), ns.size()};
}

InvarianceReport ambient_invariance_check(const std::vector<ExperimentRecord>& records, std::size_t n_star) {
  std::map<int, std::set<std::size_t>> grids;
  std::map<int, std::vector<double>> at_star;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    grids[r.D].insert(r.n);
    if (r.n == n_star) at_star[r.D].push_back(r.mse);
  }
  if (grids.size() < 2) throw std::invalid_argument("need >= 2 ambient dimensions");
  for (const auto& [D, ns] : grids) {
    if (!ns.contains(n_star)) throw std::invalid_argument("mismatched grids: D=" + std::to_string(D) + " lacks n*");
  }
  InvarianceReport report;
  report.n_star = n_star;
  for (const auto& [D, v] : at_star) {
    const MeanSe ms = mean_se(v);
    report.entries.push_back({D, ms.mean, ms.mean - 1.96 * ms.se, ms.mean + 1.96 * ms.se, 1.0});
  }
  const double ref = report.entries.front().mean_mse;
  report.min_ratio = report.max_ratio = 1.0;
  for (auto& e : report.entries) {
    e.ratio = e.mean_mse / ref;
    report.min_ratio = std::min(report.min_ratio, e.ratio);
    report.max_ratio = std::max(report.max_ratio, e.ratio);
  }
  report.within_bounds = report.min_ratio >= 0.5 && report.max_ratio <= 2.0;
  return report;
}

std::vector<BiasPoint> bias_probe(const DomainModel& domain, KernelKind kind, std::span<const double> x,
                                  std::span<const double> h_grid, const McOptions& mc, bool allow_singular) {
  check_query(domain, x);
  check_h_grid(h_grid);
  if (mc.samples < 100'000) throw std::invalid_argument("bias_probe: need at least 1e5 Monte-Carlo samples");
  if (!allow_singular) (void)domain.tangent_frame(x);
  const double p = domain.exact_density(x);
  const auto kernel = normalize(kind, domain.intrinsic_dim());
  const auto means = smoothed_expectation(domain, x, h_grid, mc, "mc:bias", [&](double r) { return kernel(r); });
  std::vector<BiasPoint> out;
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    out.push_back({h_grid[i], means[i].mean, p, means[i].mean - p, means[i].se});
  }
  return out;
}

std::vector<VarianceRow> variance_probe(const DomainModel& domain, KernelKind kind, std::span<const double> x,
                                        std::span<const std::size_t> n_grid, const BandwidthRule& rule,
                                        std::size_t repetitions, std::uint64_t seed, unsigned threads,
                                        IndexKind index) {
  check_query(domain, x);
  if (repetitions < 30) throw std::invalid_argument("R too small");
  if (n_grid.empty()) throw std::invalid_argument("variance_probe: empty n-grid");
  const int d = domain.intrinsic_dim();
  const auto kernel = normalize(kind, d);
  const double p = domain.exact_density(x);
  const std::size_t R = repetitions;
  std::vector<double> values(n_grid.size() * R);
  std::vector<double> widths(n_grid.size());

  parallel_for(values.size(), threads, [&](std::size_t cell) {
    const std::size_t n = n_grid[cell / R];
    UniformSource src(seed, cell_stream("train", n, cell % R));
    const DensityEstimator est(domain.sample(n, src), kernel, rule, index);
    values[cell] = est.density_at(x);
    if (cell % R == 0) widths[cell / R] = est.bandwidth();
  });

  std::vector<VarianceRow> rows;
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    const MeanSe ms = mean_se(std::span<const double>(values.data() + ni * R, R));
    const double var = ms.se * ms.se * static_cast<double>(R);
    const double h = widths[ni];
    const double n = static_cast<double>(n_grid[ni]);
    rows.push_back({n_grid[ni], h, ms.mean, var, var * std::sqrt(2.0 / static_cast<double>(R - 1)),
                    p * kernel.squared_integral() / (n * std::pow(h, d))});
  }
  return rows;
}

TestFunction parse_test_function(std::string_view name) {
  if (name == "zero") return TestFunction::Zero;
  if (name == "truncated_gaussian") return TestFunction::TruncatedGaussian;
  if (name == "epanechnikov") return TestFunction::Epanechnikov;
  if (name == "bump") return TestFunction::Bump;
  throw std::invalid_argument("unknown test function '" + std::string(name) + "'");
}

std::vector<BlowupPoint> tangent_blowup_probe(const DomainModel& domain, std::span<const double> x, TestFunction f,
                                              std::span<const double> h_grid, const McOptions& mc) {
  check_query(domain, x);
  check_h_grid(h_grid);
  const auto strata = domain.tangent_strata(x);
  if (strata.size() != 1 && !std::holds_alternative<SubspaceCross>(domain.params())) throw SingularPointError();

  const int d = domain.intrinsic_dim();
  std::function<double(double)> g;
  switch (f) {
    case TestFunction::Zero: g = [](double) { return 0.0; }; break;
    case TestFunction::TruncatedGaussian:
    case TestFunction::Epanechnikov: {
      const auto k = normalize(f == TestFunction::Epanechnikov ? KernelKind::Epanechnikov
                                                                : KernelKind::TruncatedGaussian, d);
      g = [k](double r) { return k(r); };
      break;
    }
    case TestFunction::Bump:
      g = [](double r) { return r < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0; };
      break;
  }

  // Every tangent plane is a copy of R^d, so each contributes the same radial integral.
  const double plane_integral = f == TestFunction::Zero ? 0.0 : radial_integral(g, d);
  double rhs = 0.0;
  for (const auto& s : strata) rhs += s.density * plane_integral;

  const auto lhs = smoothed_expectation(domain, x, h_grid, mc, "mc:blowup", g);
  std::vector<BlowupPoint> out;
  for (std::size_t i = 0; i < h_grid.size(); ++i) out.push_back({h_grid[i], lhs[i].mean, lhs[i].se, rhs});
  return out;
}

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, bool timing) {
  out << "domain,D,d,n,rep,h,mse,bias2,var,seconds\n";
  for (const auto& r : records) {
    out << r.domain << ',' << r.D << ',' << r.d << ',' << r.n << ',' << r.rep << ',' << fmt(r.h) << ','
        << fmt(r.mse) << ',' << fmt(r.bias2) << ',' << fmt(r.var) << ',' << (timing ? fmt(r.seconds) : "0") << '\n';
  }
}

std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("domain,D,d,n,rep,h,mse,bias2,var,seconds", 0) != 0) {
    throw std::invalid_argument("records csv: missing header");
  }
  std::vector<ExperimentRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 10) throw std::invalid_argument("records csv: expected 10 columns");
    ExperimentRecord r;
    r.domain = f[0];
    r.D = std::stoi(f[1]);
    r.d = std::stoi(f[2]);
    r.n = std::stoul(f[3]);
    r.rep = std::stoul(f[4]);
    r.h = std::stod(f[5]);
    r.mse = std::stod(f[6]);
    r.bias2 = std::stod(f[7]);
    r.var = std::stod(f[8]);
    r.seconds = std::stod(f[9]);
    if (!std::isfinite(r.mse)) r.diagnostic = "non-finite estimate";
    out.push_back(std::move(r));
  }
  return out;
}

void write_points_csv(std::ostream& out, const std::vector<PointRecord>& points) {
  out << "n,point,density,mean_estimate,bias2,var\n";
  for (const auto& p : points) {
    out << p.n << ',' << p.point << ',' << fmt(p.density) << ',' << fmt(p.mean_estimate) << ',' << fmt(p.bias2)
        << ',' << fmt(p.var) << '\n';
  }
}

std::string to_text(const RateFit& fit) {
  std::ostringstream out;
  out << "slope = " << fmt(fit.slope) << '\n'
      << "slope_se = " << fmt(fit.slope_se) << '\n'
      << "slope_theory = " << fmt(fit.slope_theory) << '\n'
      << "intercept = " << fmt(fit.intercept) << '\n'
      << "points = " << fit.points << '\n';
  return out.str();
}

std::string to_json(const RateFit& fit) {
  nlohmann::ordered_json j;
  j["slope"] = fit.slope;
  j["slope_se"] = fit.slope_se;
  j["slope_theory"] = fit.slope_theory;
  j["intercept"] = fit.intercept;
  j["points"] = fit.points;
  return j.dump(2);
}

std::string to_text(const InvarianceReport& report) {
  std::ostringstream out;
  out << "n_star = " << report.n_star << '\n';
  for (const auto& e : report.entries) {
    const std::string key = "D" + std::to_string(e.D);
    out << key << ".mean_mse = " << fmt(e.mean_mse) << '\n'
        << key << ".ci_low = " << fmt(e.ci_low) << '\n'
        << key << ".ci_high = " << fmt(e.ci_high) << '\n'
        << key << ".ratio = " << fmt(e.ratio) << '\n';
  }
  out << "min_ratio = " << fmt(report.min_ratio) << '\n'
      << "max_ratio = " << fmt(report.max_ratio) << '\n'
      << "within_bounds = " << (report.within_bounds ? "true" : "false") << '\n';
  return out.str();
}

std::string to_json(const InvarianceReport& report) {
  nlohmann::ordered_json j;
  j["n_star"] = report.n_star;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    j["entries"].push_back(
        {{"D", e.D}, {"mean_mse", e.mean_mse}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high}, {"ratio", e.ratio}});
  }
  j["min_ratio"] = report.min_ratio;
  j["max_ratio"] = report.max_ratio;
  j["within_bounds"] = report.within_bounds;
  return j.dump(2);
}

}  // namespace ikde
