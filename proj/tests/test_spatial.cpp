#include "ikde/spatial.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace ikde;

namespace {

Dataset random_points(std::size_t n, std::size_t D, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n * D);
  for (double& t : v) t = normal(gen);
  return Dataset(D, std::move(v));
}

// Direct scan, written independently of the library.
std::vector<std::size_t> scan(const Dataset& pts, std::span<const double> x, double r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += (pts.row(i)[k] - x[k]) * (pts.row(i)[k] - x[k]);
    if (std::sqrt(s) <= r) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> indices(const std::vector<Neighbor>& nbs) {
  std::vector<std::size_t> out;
  for (const auto& nb : nbs) out.push_back(nb.index);
  return out;
}

}  // namespace

TEST_CASE("closed-ball boundary is included") {
  const Dataset pts(1, {0.0, 1.0, 2.0});
  for (auto kind : {IndexKind::BruteForce, IndexKind::KdTree}) {
    const SpatialIndex index(pts, kind, 1);
    const std::vector<double> x{0.0};
    const auto hits = index.radius_query(x, 1.0);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0] == Neighbor{0, 0.0});
    CHECK(hits[1] == Neighbor{1, 1.0});
    CHECK(index.radius_query(std::vector<double>{10.0}, 0.5).empty());
  }
}

TEST_CASE("small trees") {
  const Dataset collinear(2, {0.0, 0.0, 1.0, 1.0, 2.0, 2.0});
  const SpatialIndex tree(collinear, IndexKind::KdTree, 1);
  CHECK(tree.depth() <= 2);
  CHECK(tree.leaf_count() == 3);

  const SpatialIndex single(Dataset(3, {1.0, 2.0, 3.0}), IndexKind::KdTree);
  CHECK(single.depth() == 0);
  CHECK(single.leaf_count() == 1);

  const SpatialIndex dupes(Dataset(1, std::vector<double>(40, 0.5)), IndexKind::KdTree, 2);
  CHECK(dupes.radius_query(std::vector<double>{0.5}, 1e-9).size() == 40);
}

TEST_CASE("construction and query errors") {
  CHECK_THROWS_AS(SpatialIndex(Dataset(2, {}), IndexKind::KdTree), std::invalid_argument);
  CHECK_THROWS_AS(SpatialIndex(Dataset(2, {0.0, 0.0}), IndexKind::KdTree, 0), std::invalid_argument);
  const SpatialIndex index(Dataset(2, {0.0, 0.0}), IndexKind::KdTree);
  CHECK_THROWS_AS(index.radius_query(std::vector<double>{0.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(index.radius_query(std::vector<double>{0.0, 0.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(index.radius_query(std::vector<double>{NAN, 0.0}, 1.0), std::invalid_argument);
  CHECK(parse_index_kind("kdtree") == IndexKind::KdTree);
  CHECK(parse_index_kind("brute") == IndexKind::BruteForce);
  CHECK_THROWS_AS(parse_index_kind("balltree"), std::invalid_argument);
}

TEST_CASE("kd-tree matches brute force exhaustively") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> radius(0.05, 3.0);
  for (std::size_t n : {1, 10, 100}) {
    for (std::size_t D : {1, 2, 5, 20}) {
      const Dataset pts = random_points(n, D, gen);
      const SpatialIndex tree(pts, IndexKind::KdTree, 4);
      const SpatialIndex brute(pts, IndexKind::BruteForce);
      for (int q = 0; q < 50; ++q) {
        const Dataset x = random_points(1, D, gen);
        const double r = radius(gen);
        const auto a = tree.radius_query(x.row(0), r);
        const auto b = brute.radius_query(x.row(0), r);
        CAPTURE(n);
        CAPTURE(D);
        CHECK(a == b);
        CHECK(indices(a) == scan(pts, x.row(0), r));
      }
    }
  }
}

TEST_CASE("uniform cube queries and large Gaussian cloud") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> v(1000 * 3);
  for (double& t : v) t = unif(gen);
  const Dataset cube(3, v);
  const SpatialIndex tree(cube, IndexKind::KdTree);
  const SpatialIndex brute(cube, IndexKind::BruteForce);
  for (int q = 0; q < 100; ++q) {
    const std::vector<double> x{unif(gen), unif(gen), unif(gen)};
    CHECK(tree.radius_query(x, 0.2) == brute.radius_query(x, 0.2));
  }

  const Dataset cloud = random_points(10'000, 10, gen);
  const SpatialIndex big(cloud, IndexKind::KdTree);
  const SpatialIndex big_brute(cloud, IndexKind::BruteForce);
  for (int q = 0; q < 20; ++q) {
    const Dataset x = random_points(1, 10, gen);
    CHECK(big.radius_query(x.row(0), 2.5) == big_brute.radius_query(x.row(0), 2.5));
  }
}

TEST_CASE("distances are exact and result sets are monotone in r") {
  std::mt19937_64 gen(99);
  const Dataset pts = random_points(300, 4, gen);
  const SpatialIndex tree(pts, IndexKind::KdTree, 8);
  for (int q = 0; q < 30; ++q) {
    const Dataset x = random_points(1, 4, gen);
    const auto small = tree.radius_query(x.row(0), 0.8);
    const auto large = tree.radius_query(x.row(0), 1.6);
    for (const auto& nb : small) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += (pts.row(nb.index)[k] - x.row(0)[k]) * (pts.row(nb.index)[k] - x.row(0)[k]);
      CHECK(std::abs(nb.distance - std::sqrt(s)) <= 1e-15);
      CHECK(std::find(large.begin(), large.end(), nb) != large.end());
    }
  }
}
