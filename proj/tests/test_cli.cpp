#include "ikde/cli.hpp"
#include "ikde/dataset.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ikde");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ikde::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ikde_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<double> numbers(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  for (double v; in >> v;) out.push_back(v);
  return out;
}

}  // namespace

TEST_CASE("sample draws on the support and is reproducible") {
  const auto a = run({"sample", "--domain", "sparse", "--D", "5", "--d", "3", "--n", "100", "--seed", "7"});
  REQUIRE(a.code == 0);
  CHECK(a.err.find("rows = 100, on_support = 100") != std::string::npos);
  std::istringstream csv(a.out);
  const auto data = ikde::read_csv(csv);
  CHECK(data.size() == 100);
  CHECK(data.dim() == 5);
  for (std::size_t i = 0; i < data.size(); ++i) {
    int zeros = 0;
    for (double v : data.row(i)) zeros += v == 0.0;
    CHECK(zeros >= 2);
  }

  CHECK(run({"sample", "--domain", "sparse", "--D", "5", "--d", "3", "--n", "100", "--seed", "7"}).out == a.out);
  CHECK(run({"sample", "--domain", "sparse", "--D", "5", "--d", "3", "--n", "100", "--seed", "8"}).out != a.out);

  const auto sphere = run({"sample", "--domain", "sphere", "--D", "3", "--n", "1000", "--seed", "1"});
  REQUIRE(sphere.code == 0);
  std::istringstream s(sphere.out);
  const auto pts = ikde::read_csv(s);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double r2 = 0.0;
    for (double v : pts.row(i)) r2 += v * v;
    CHECK(std::abs(std::sqrt(r2) - 1.0) <= 1e-12);
  }
}

TEST_CASE("sample writes to a file") {
  const auto dir = scratch("sample");
  const auto r = run({"sample", "--domain", "vmf", "--D", "3", "--kappa", "10", "--n", "20", "--out",
                      (dir / "x.csv").string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::istringstream in(read_file(dir / "x.csv"));
  CHECK(ikde::read_csv(in).size() == 20);
}

TEST_CASE("estimate evaluates the density") {
  const auto dir = scratch("estimate");
  write_file(dir / "train.csv", "0,0\n");
  write_file(dir / "query.csv", "0,0\n5,5\n");
  const std::vector<std::string> base{"estimate",       "--train", (dir / "train.csv").string(), "--query",
                                      (dir / "query.csv").string(), "--d", "2", "--kernel", "epanechnikov",
                                      "--h",            "1"};
  auto r = run(base);
  REQUIRE(r.code == 0);
  const auto values = numbers(r.out);
  REQUIRE(values.size() == 2);
  CHECK(values[0] == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-14));
  CHECK(values[1] == 0.0);

  auto brute = base;
  brute.insert(brute.end(), {"--index", "brute", "--threads", "4"});
  CHECK(run(brute).out == r.out);

  // Ambient estimator in D = 2 with d = 1: ratio of normalizations times h^{-1}.
  write_file(dir / "line.csv", "0,0\n0.3,0\n-0.2,0\n");
  write_file(dir / "q.csv", "0.1,0\n");
  const std::vector<std::string> line{"estimate", "--train", (dir / "line.csv").string(), "--query",
                                      (dir / "q.csv").string(), "--d", "1", "--kernel", "uniform", "--h", "0.5"};
  const double intrinsic = numbers(run(line).out).at(0);
  auto amb = line;
  amb.push_back("--ambient");
  const double ambient = numbers(run(amb).out).at(0);
  CHECK(intrinsic == doctest::Approx(3.0 / (3.0 * 0.5) * 0.5).epsilon(1e-14));
  CHECK(ambient == doctest::Approx(intrinsic * (1.0 / std::numbers::pi) / 0.5 / 0.5).epsilon(1e-13));
}

TEST_CASE("estimate input errors") {
  const auto dir = scratch("errors");
  write_file(dir / "ragged.csv", "0,0\n1\n");
  write_file(dir / "ok.csv", "0,0\n");
  write_file(dir / "three.csv", "0,0,0\n");
  auto r = run({"estimate", "--train", (dir / "ragged.csv").string(), "--query", (dir / "ok.csv").string(), "--d",
                "1", "--h", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("error:") != std::string::npos);
  r = run({"estimate", "--train", (dir / "three.csv").string(), "--query", (dir / "ok.csv").string(), "--d", "1",
           "--h", "1"});
  CHECK(r.code == 2);
  // Missing required key prints usage.
  r = run({"estimate", "--train", (dir / "ok.csv").string(), "--d", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--query") != std::string::npos);
  CHECK(run({"estimate", "--bogus", "1"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"sample", "--domain", "torus", "--n", "3"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("experiment writes records, report and a reproducible config") {
  const auto dir = scratch("experiment");
  const std::vector<std::string> args{"experiment", "--domain", "sparse", "--D", "5", "--d", "3", "--n_grid",
                                      "100,200,400,800", "--reps", "1", "--test-size", "30", "--seed", "5",
                                      "--out", (dir / "a").string()};
  const auto r = run(args);
  REQUIRE(r.code == 0);
  const auto records = read_file(dir / "a" / "records.csv");
  CHECK(std::count(records.begin(), records.end(), '\n') == 5);
  CHECK(records.rfind("domain,D,d,n,rep,h,mse,bias2,var,seconds\n", 0) == 0);
  const auto report = read_file(dir / "a" / "report.txt");
  CHECK(report.find("[fit.D5]") != std::string::npos);
  CHECK(report.find("slope = ") != std::string::npos);
  const auto json = nlohmann::json::parse(read_file(dir / "a" / "report.json"));
  CHECK(json["fits"]["5"].contains("slope"));
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 4);

  // The echoed config alone reproduces the run.
  auto config = read_file(dir / "a" / "config.txt");
  write_file(dir / "echo.txt", config);
  REQUIRE(run({"experiment", "--config", (dir / "echo.txt").string(), "--out", (dir / "b").string()}).code == 0);
  CHECK(read_file(dir / "b" / "records.csv") == records);

  auto threaded = args;
  threaded.back() = (dir / "c").string();
  threaded.insert(threaded.end(), {"--threads", "8"});
  REQUIRE(run(threaded).code == 0);
  CHECK(read_file(dir / "c" / "records.csv") == records);
}

TEST_CASE("experiment compares ambient dimensions") {
  const auto dir = scratch("ambient");
  const auto r = run({"experiment", "--domain", "sparse", "--D_grid", "5,8", "--d", "3", "--n_grid",
                      "100,200,400,800", "--reps", "2", "--test_size", "20", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto report = read_file(dir / "report.txt");
  CHECK(report.find("[fit.D8]") != std::string::npos);
  CHECK(report.find("[invariance]") != std::string::npos);
  const auto json = nlohmann::json::parse(read_file(dir / "report.json"));
  CHECK(json.contains("invariance"));
}

TEST_CASE("config file with flag override") {
  const auto dir = scratch("config");
  write_file(dir / "run.cfg", "# sample config\ndomain = sphere\nD = 3\nn = 5\nseed = 1\n");
  const auto from_file = run({"sample", "--config", (dir / "run.cfg").string()});
  REQUIRE(from_file.code == 0);
  CHECK(std::count(from_file.out.begin(), from_file.out.end(), '\n') == 5);
  const auto overridden = run({"sample", "--config", (dir / "run.cfg").string(), "--n", "7"});
  CHECK(std::count(overridden.out.begin(), overridden.out.end(), '\n') == 7);
  CHECK(run({"sample", "--config", (dir / "missing.cfg").string()}).code == 2);
}

TEST_CASE("probe commands") {
  auto bias = run({"probe-bias", "--domain", "sphere", "--D", "2", "--x", "1,0", "--h_grid", "0.4,0.2,0.1",
                   "--n_mc", "200000"});
  REQUIRE(bias.code == 0);
  CHECK(bias.out.rfind("h,expectation,density,bias,abs_bias,se\n", 0) == 0);
  CHECK(bias.err.find("slope = ") != std::string::npos);
  CHECK(run({"probe-bias", "--domain", "cross", "--x", "0,0", "--h_grid", "0.1", "--n_mc", "200000"}).code == 1);
  CHECK(run({"probe-bias", "--domain", "cross", "--x", "0,0", "--h_grid", "0.1", "--n_mc", "200000",
             "--allow-singular"})
            .code == 0);
  CHECK(run({"probe-bias", "--domain", "sphere", "--x", "1,0,0", "--h_grid", "0.1"}).code == 2);

  auto var = run({"probe-variance", "--domain", "sphere", "--x", "1,0", "--n_grid", "500,1000", "--h", "0.2",
                  "--reps", "30"});
  REQUIRE(var.code == 0);
  CHECK(std::count(var.out.begin(), var.out.end(), '\n') == 3);
  CHECK(run({"probe-variance", "--domain", "sphere", "--x", "1,0", "--n_grid", "500", "--h", "0.2", "--reps", "2"})
            .code == 2);

  auto tangent = run({"probe-tangent", "--domain", "line", "--x", "0.2,0", "--h_grid", "0.3,0.1", "--n_mc",
                      "100000", "--f", "bump"});
  REQUIRE(tangent.code == 0);
  CHECK(tangent.out.rfind("h,lhs,lhs_se,rhs,abs_diff\n", 0) == 0);
}

TEST_CASE("installed binary") {
  const auto dir = scratch("binary");
  const std::string cmd = std::string(IKDE_CLI_PATH) + " sample --domain sphere --D 2 --n 4 --out " +
                          (dir / "s.csv").string() + " 2> " + (dir / "err.txt").string();
  CHECK(std::system(cmd.c_str()) == 0);
  std::istringstream in(read_file(dir / "s.csv"));
  CHECK(ikde::read_csv(in).size() == 4);
  CHECK(std::system((std::string(IKDE_CLI_PATH) + " sample --n 4 > /dev/null 2>&1").c_str()) != 0);
}
