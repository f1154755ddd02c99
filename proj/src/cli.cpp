#include "ikde/cli.hpp"

#include "ikde/config.hpp"
#include "ikde/domains.hpp"
#include "ikde/estimator.hpp"
#include "ikde/experiments.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

namespace ikde {

namespace {

struct OptionSpec {
  std::string key;
  std::string help;
  bool flag = false;
};

const std::vector<OptionSpec> kCommon = {
    {"config", "key = value configuration file; flags override it"},
    {"seed", "64-bit master seed (default 0)"},
    {"threads", "worker threads (default 1)"},
    {"out", "output file (directory for experiment)"},
};

const std::vector<OptionSpec> kDomain = {
    {"domain", "sparse | sphere | vmf | cross | line"},
    {"D", "ambient dimension"},
    {"d", "intrinsic dimension"},
    {"kappa", "vMF concentration"},
    {"mu", "vMF mean direction, comma separated"},
    {"lines", "number of coordinate subspaces for cross (default 2)"},
    {"weights", "subspace weights for cross, comma separated"},
    {"radius", "ball radius within each subspace (default 1)"},
};

const std::vector<OptionSpec> kEstimator = {
    {"kernel", "truncated_gaussian | uniform | epanechnikov"},
    {"h", "fixed bandwidth; overrides the rate schedule"},
    {"c", "rate schedule constant: h = c n^{-1/(d+2m)} (default 1)"},
    {"m", "tangent approximation order (default 2)"},
    {"index", "kdtree | brute (default kdtree)"},
    {"leaf_size", "kd-tree leaf size (default 16)"},
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DomainModel domain_from(const Config& cfg) {
  const std::string kind = cfg.str("domain");
  try {
    if (kind == "sparse") return make_sparse_gaussian(cfg.integer("D"), cfg.integer("d"));
    if (kind == "sphere") {
      const int D = cfg.integer("D", 2);
      if (cfg.has("d") && cfg.integer("d") != D - 1) throw ConfigError("sphere: d must equal D - 1");
      return make_uniform_sphere(D);
    }
    if (kind == "vmf") {
      const int D = cfg.integer("D", 3);
      std::vector<double> mu(D, 0.0);
      mu[0] = 1.0;
      if (cfg.has("mu")) mu = cfg.reals("mu");
      if (static_cast<int>(mu.size()) != D) throw ConfigError("vmf: mu must have D entries");
      return make_von_mises_fisher(mu, cfg.real("kappa"));
    }
    if (kind == "cross" || kind == "line") {
      const int D = cfg.integer("D", 2);
      const int d = cfg.integer("d", 1);
      const int count = kind == "line" ? 1 : cfg.integer("lines", 2);
      std::vector<double> weights;
      if (cfg.has("weights")) weights = cfg.reals("weights");
      return make_coordinate_cross(D, d, count, weights, cfg.real("radius", 1.0));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown domain '" + kind + "'");
}

BandwidthRule rule_from(const Config& cfg, int d) {
  if (cfg.has("h")) {
    const double h = cfg.real("h");
    if (!(h > 0.0)) throw ConfigError("h must be positive");
    return FixedBandwidth{h};
  }
  const double c = cfg.real("c", 1.0);
  const double m = cfg.real("m", 2.0);
  if (!(c > 0.0) || !(m > 0.0)) throw ConfigError("c and m must be positive");
  return RateSchedule{c, d, m};
}

template <class F>
auto as_config_error(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

KernelKind kernel_from(const Config& cfg) {
  return as_config_error([&] { return parse_kernel_kind(cfg.str("kernel", "truncated_gaussian")); });
}

IndexKind index_from(const Config& cfg) {
  return as_config_error([&] { return parse_index_kind(cfg.str("index", "kdtree")); });
}

unsigned threads_from(const Config& cfg) {
  const auto t = cfg.integer("threads", 1);
  if (t < 1) throw ConfigError("threads must be >= 1");
  return static_cast<unsigned>(t);
}

std::vector<double> point_from(const Config& cfg, const DomainModel& domain) {
  auto x = cfg.reals("x");
  if (static_cast<int>(x.size()) != domain.ambient_dim()) throw ConfigError("x must have D coordinates");
  return x;
}

McOptions mc_from(const Config& cfg) {
  McOptions mc;
  mc.samples = cfg.unsigned_integer("n_mc", 1'000'000);
  mc.batches = cfg.unsigned_integer("batches", 8);
  mc.seed = cfg.unsigned_integer("seed", 0);
  mc.threads = threads_from(cfg);
  if (mc.batches == 0 || mc.samples < mc.batches) throw ConfigError("n_mc must be >= batches >= 1");
  return mc;
}

// Writes to --out when given, else to the provided stream.
void emit(const Config& cfg, std::ostream& fallback, const std::string& text) {
  if (!cfg.has("out")) {
    fallback << text;
    return;
  }
  std::ofstream file(cfg.str("out"));
  if (!file) throw std::runtime_error("cannot write '" + cfg.str("out") + "'");
  file << text;
}

int cmd_sample(const Config& cfg, std::ostream& out, std::ostream& err) {
  const DomainModel domain = domain_from(cfg);
  const auto n = cfg.integer("n");
  if (n < 1) throw ConfigError("n must be >= 1");
  const Dataset data = domain.sample(static_cast<std::size_t>(n), cfg.unsigned_integer("seed", 0));
  std::ostringstream csv;
  write_csv(csv, data);
  emit(cfg, out, csv.str());

  double worst = 0.0;
  std::size_t on_support = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double dist = domain.support_distance(data.row(i));
    worst = std::max(worst, dist);
    on_support += dist <= 1e-12;
  }
  err << "support audit: rows = " << data.size() << ", on_support = " << on_support
      << ", max_distance = " << fmt(worst) << '\n';
  return on_support == data.size() ? 0 : 1;
}

int cmd_estimate(const Config& cfg, std::ostream& out, std::ostream&) {
  const Dataset train = as_config_error([&] { return read_csv_file(cfg.str("train")); });
  const Dataset query = as_config_error([&] { return read_csv_file(cfg.str("query")); });
  if (train.dim() != query.dim()) throw ConfigError("dimension mismatch between train and query");
  const auto d = cfg.integer("d");
  if (d < 1) throw ConfigError("d must be >= 1");
  const auto kernel = normalize(kernel_from(cfg), static_cast<int>(d));
  const auto leaf = cfg.integer("leaf_size", SpatialIndex::kDefaultLeafSize);
  if (leaf < 1) throw ConfigError("leaf_size must be >= 1");
  const DensityEstimator est(train, kernel, rule_from(cfg, static_cast<int>(d)), index_from(cfg),
                             static_cast<std::size_t>(leaf));
  const bool ambient = cfg.boolean("ambient", false);
  std::vector<double> values;
  if (ambient) {
    for (std::size_t i = 0; i < query.size(); ++i) values.push_back(est.ambient_density_at(query.row(i)));
  } else {
    values = est.density_batch(query, threads_from(cfg));
  }
  std::string text;
  for (double v : values) text += fmt(v) + "\n";
  emit(cfg, out, text);
  return 0;
}

int cmd_experiment(const Config& cfg, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.str("out");
  std::vector<int> ambient_dims;
  if (cfg.has("D_grid")) {
    for (auto D : cfg.sizes("D_grid")) ambient_dims.push_back(static_cast<int>(D));
    if (ambient_dims.empty()) throw ConfigError("D_grid is empty");
  } else {
    ambient_dims.push_back(domain_from(cfg).ambient_dim());
  }
  const auto reps = cfg.integer("reps", 10);
  const auto test_size = cfg.integer("test_size", 500);
  if (reps < 1 || test_size < 1) throw ConfigError("reps and test_size must be >= 1");
  const auto n_grid = cfg.sizes("n_grid");
  const double m = cfg.real("m", 2.0);
  const bool timing = cfg.boolean("timing", false);

  std::vector<ExperimentPlan> plans;
  for (int D : ambient_dims) {
    Config per_d = cfg;
    per_d.set("D", std::to_string(D));
    ExperimentPlan plan{domain_from(per_d)};
    plan.kernel = kernel_from(cfg);
    plan.rule = rule_from(cfg, plan.domain.intrinsic_dim());
    plan.n_grid = n_grid;
    plan.repetitions = static_cast<std::size_t>(reps);
    plan.test_size = static_cast<std::size_t>(test_size);
    plan.seed = cfg.unsigned_integer("seed", 0);
    plan.index = index_from(cfg);
    plan.threads = threads_from(cfg);
    as_config_error([&] {
      plan.validate();
      return 0;
    });
    plans.push_back(std::move(plan));
  }

  fs::create_directories(dir);
  {
    Config echo = cfg;
    echo.set("seed", std::to_string(cfg.unsigned_integer("seed", 0)));
    std::ofstream file(dir / "config.txt");
    file << "# resolved configuration; rerun with: ikde experiment --config <this file>\n";
    Config printable;
    for (const auto& [k, v] : echo.values()) {
      if (k != "config") printable.set(k, v);
    }
    file << printable.to_text();
  }

  std::vector<ExperimentRecord> records;
  std::vector<PointRecord> points;
  auto flush = [&] {
    std::ofstream csv(dir / "records.csv");
    write_records_csv(csv, records, timing);
    std::ofstream pts(dir / "points.csv");
    write_points_csv(pts, points);
  };

  try {
    for (const auto& plan : plans) {
      auto result = mse_probe(plan);
      for (const auto& r : result.records) {
        err << "cell domain=" << r.domain << " D=" << r.D << " n=" << r.n << " rep=" << r.rep << " h=" << fmt(r.h)
            << " mse=" << fmt(r.mse) << " seconds=" << fmt(r.seconds) << (r.ok() ? "" : " FAILED: " + r.diagnostic)
            << '\n';
      }
      records.insert(records.end(), result.records.begin(), result.records.end());
      points.insert(points.end(), result.points.begin(), result.points.end());
    }
  } catch (...) {
    flush();
    throw;
  }
  flush();

  std::ostringstream text;
  nlohmann::ordered_json json;
  json["fits"] = nlohmann::ordered_json::object();
  for (const auto& plan : plans) {
    const int D = plan.domain.ambient_dim();
    std::vector<ExperimentRecord> subset;
    for (const auto& r : records) {
      if (r.D == D) subset.push_back(r);
    }
    text << "[fit.D" << D << "]\n";
    try {
      const RateFit fit = fit_rate(subset, plan.domain.intrinsic_dim(), m);
      text << to_text(fit);
      json["fits"][std::to_string(D)] = nlohmann::ordered_json::parse(to_json(fit));
    } catch (const std::invalid_argument& e) {
      text << "skipped = " << e.what() << '\n';
      json["fits"][std::to_string(D)] = {{"skipped", e.what()}};
    }
    for (const auto& row : decomposition(subset)) {
      text << "decomposition.n" << row.n << " = mse " << fmt(row.mse) << " se " << fmt(row.mse_se) << " bias2 "
           << fmt(row.bias2) << " var " << fmt(row.var) << '\n';
    }
  }
  if (plans.size() >= 2) {
    const std::size_t n_star = cfg.has("n_star") ? static_cast<std::size_t>(cfg.integer("n_star")) : n_grid.back();
    const auto report = as_config_error([&] { return ambient_invariance_check(records, n_star); });
    text << "[invariance]\n" << to_text(report);
    json["invariance"] = nlohmann::ordered_json::parse(to_json(report));
  }
  std::ofstream(dir / "report.txt") << text.str();
  std::ofstream(dir / "report.json") << json.dump(2) << '\n';
  out << text.str();
  return 0;
}

int cmd_probe_bias(const Config& cfg, std::ostream& out, std::ostream& err) {
  const DomainModel domain = domain_from(cfg);
  const auto x = point_from(cfg, domain);
  const auto h_grid = cfg.reals("h_grid");
  const auto rows = as_config_error([&] {
    return bias_probe(domain, kernel_from(cfg), x, h_grid, mc_from(cfg), cfg.boolean("allow_singular", false));
  });
  std::string csv = "h,expectation,density,bias,abs_bias,se\n";
  std::vector<double> hs, abs_bias;
  for (const auto& r : rows) {
    csv += fmt(r.h) + "," + fmt(r.expectation) + "," + fmt(r.density) + "," + fmt(r.bias) + "," +
           fmt(std::abs(r.bias)) + "," + fmt(r.se) + "\n";
    hs.push_back(r.h);
    abs_bias.push_back(std::abs(r.bias));
  }
  emit(cfg, out, csv);
  if (rows.size() >= 2 && std::all_of(abs_bias.begin(), abs_bias.end(), [](double b) { return b > 0.0; })) {
    const auto fit = fit_loglog(hs, abs_bias);
    err << "slope = " << fmt(fit.slope) << "\nslope_se = " << fmt(fit.slope_se) << '\n';
  }
  return 0;
}

int cmd_probe_variance(const Config& cfg, std::ostream& out, std::ostream& err) {
  const DomainModel domain = domain_from(cfg);
  const auto x = point_from(cfg, domain);
  const auto n_grid = cfg.sizes("n_grid");
  const auto reps = cfg.integer("reps", 30);
  if (reps < 1) throw ConfigError("reps must be >= 1");
  const auto rows = as_config_error([&] {
    return variance_probe(domain, kernel_from(cfg), x, n_grid, rule_from(cfg, domain.intrinsic_dim()),
                          static_cast<std::size_t>(reps), cfg.unsigned_integer("seed", 0), threads_from(cfg),
                          index_from(cfg));
  });
  std::string csv = "n,h,mean_estimate,variance,variance_se,predicted,ratio\n";
  std::vector<double> scale, var;
  for (const auto& r : rows) {
    csv += std::to_string(r.n) + "," + fmt(r.h) + "," + fmt(r.mean_estimate) + "," + fmt(r.variance) + "," +
           fmt(r.variance_se) + "," + fmt(r.predicted) + "," + fmt(r.variance / r.predicted) + "\n";
    scale.push_back(static_cast<double>(r.n) * std::pow(r.h, domain.intrinsic_dim()));
    var.push_back(r.variance);
  }
  emit(cfg, out, csv);
  if (rows.size() >= 2 && std::all_of(var.begin(), var.end(), [](double v) { return v > 0.0; })) {
    const auto fit = fit_loglog(scale, var);
    err << "slope = " << fmt(fit.slope) << "\nslope_se = " << fmt(fit.slope_se) << '\n';
  }
  return 0;
}

int cmd_probe_tangent(const Config& cfg, std::ostream& out, std::ostream&) {
  const DomainModel domain = domain_from(cfg);
  const auto x = point_from(cfg, domain);
  const auto h_grid = cfg.reals("h_grid");
  const auto f = as_config_error([&] { return parse_test_function(cfg.str("f", "truncated_gaussian")); });
  const auto rows = as_config_error([&] { return tangent_blowup_probe(domain, x, f, h_grid, mc_from(cfg)); });
  std::string csv = "h,lhs,lhs_se,rhs,abs_diff\n";
  for (const auto& r : rows) {
    csv += fmt(r.h) + "," + fmt(r.lhs) + "," + fmt(r.lhs_se) + "," + fmt(r.rhs) + "," + fmt(std::abs(r.lhs - r.rhs)) +
           "\n";
  }
  emit(cfg, out, csv);
  return 0;
}

struct Command {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
  std::function<int(const Config&, std::ostream&, std::ostream&)> run;
};

std::vector<OptionSpec> join(std::initializer_list<std::vector<OptionSpec>> parts) {
  std::vector<OptionSpec> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<Command> commands() {
  return {
      {"sample", "draw a dataset from a synthetic domain",
       join({kCommon, kDomain, {{"n", "number of samples"}}}), cmd_sample},
      {"estimate", "evaluate the density estimator at query points",
       join({kCommon, kEstimator,
             {{"train", "training CSV"},
              {"query", "query CSV"},
              {"d", "intrinsic dimension"},
              {"ambient", "use the ambient-dimension estimator", true}}}),
       cmd_estimate},
      {"experiment", "MSE sweep over sample sizes with rate fit",
       join({kCommon, kDomain, kEstimator,
             {{"n_grid", "sample sizes, comma separated"},
              {"D_grid", "ambient dimensions to compare, comma separated"},
              {"n_star", "sample size for the ambient comparison (default largest n)"},
              {"reps", "repetitions per n (default 10)"},
              {"test_size", "test points (default 500)"},
              {"timing", "write wall-clock seconds to the records CSV", true}}}),
       cmd_experiment},
      {"probe-bias", "Monte-Carlo bias of kernel smoothing against the exact density",
       join({kCommon, kDomain, kEstimator,
             {{"x", "query point, comma separated"},
              {"h_grid", "decreasing bandwidths, comma separated"},
              {"n_mc", "Monte-Carlo samples per h (default 1e6)"},
              {"batches", "stratified batches (default 8)"},
              {"allow_singular", "permit points where strata meet", true}}}),
       cmd_probe_bias},
      {"probe-variance", "variance of the estimate across independent training sets",
       join({kCommon, kDomain, kEstimator,
             {{"x", "query point, comma separated"},
              {"n_grid", "sample sizes, comma separated"},
              {"reps", "training sets per n (default 30)"}}}),
       cmd_probe_variance},
      {"probe-tangent", "blow-up diagnostic against the tangent-plane integral",
       join({kCommon, kDomain,
             {{"x", "query point, comma separated"},
              {"f", "zero | truncated_gaussian | epanechnikov | bump"},
              {"h_grid", "decreasing scales, comma separated"},
              {"n_mc", "Monte-Carlo samples per h (default 1e6)"},
              {"batches", "stratified batches (default 8)"}}}),
       cmd_probe_tangent},
  };
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intrinsic-dimension kernel density estimation toolkit", "ikde"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  const auto cmds = commands();
  std::vector<std::map<std::string, std::string>> given(cmds.size());
  std::vector<CLI::App*> subs;
  for (std::size_t c = 0; c < cmds.size(); ++c) {
    auto* sub = app.add_subcommand(cmds[c].name, cmds[c].help);
    sub->set_help_flag("--help", "print this help and exit");
    for (const auto& opt : cmds[c].options) {
      std::string names = "--" + opt.key;
      if (opt.key.find('_') != std::string::npos) {
        std::string dashed = opt.key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        names += ",--" + dashed;
      }
      auto& slot = given[c][opt.key];
      if (opt.flag) {
        sub->add_flag_callback(names, [&slot] { slot = "true"; }, opt.help);
      } else {
        sub->add_option(names, slot, opt.help);
      }
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (std::size_t c = 0; c < cmds.size(); ++c) {
    if (!subs[c]->parsed()) continue;
    try {
      Config cfg;
      if (!given[c]["config"].empty()) cfg = Config::parse_file(given[c]["config"]);
      Config flags;
      for (const auto& [k, v] : given[c]) {
        if (!v.empty()) flags.set(k, v);
      }
      cfg.merge(flags);
      return cmds[c].run(cfg, out, err);
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << "\n\n" << subs[c]->help();
      return 2;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}

}  // namespace ikde
