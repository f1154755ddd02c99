#pragma once

#include "ikde/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ikde {

enum class IndexKind { BruteForce, KdTree };

// Parses "brute" | "kdtree".
IndexKind parse_index_kind(std::string_view name);
std::string to_string(IndexKind kind);

struct Neighbor {
  std::size_t index;
  double distance;
  bool operator==(const Neighbor&) const = default;
};

// Closed-ball radius search over a fixed point set.
//
// Results are sorted by point index and carry distances recomputed from the
// original coordinates, so every backend returns bit-identical lists.
// Immutable after construction; concurrent queries are safe.
class SpatialIndex {
public:
  static constexpr std::size_t kDefaultLeafSize = 16;

  // Copies the points. Throws std::invalid_argument on an empty set or leaf_size == 0.
  SpatialIndex(const Dataset& points, IndexKind kind, std::size_t leaf_size = kDefaultLeafSize);

  IndexKind kind() const { return kind_; }
  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return points_.dim(); }

  // Depth of the tree (a single leaf has depth 0). Zero for brute force.
  std::size_t depth() const;
  std::size_t leaf_count() const;

  // {i : ||X_i - x|| <= r}. Throws on dimension mismatch, r <= 0 or non-finite input.
  std::vector<Neighbor> radius_query(std::span<const double> x, double r) const;

  // Appends into `out` (cleared first); avoids reallocating in hot loops.
  void radius_query(std::span<const double> x, double r, std::vector<Neighbor>& out) const;

private:
  struct Node {
    // Leaf when left == kNone: points perm_[begin, end).
    std::uint32_t begin = 0, end = 0;
    std::uint32_t left = kNone, right = kNone;
    std::uint32_t split_dim = 0;
    double split = 0.0;
  };
  static constexpr std::uint32_t kNone = 0xffffffffu;

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, std::span<const double> x, double r2, double reduced,
              std::vector<double>& offsets, std::vector<Neighbor>& out) const;

  Dataset points_;
  IndexKind kind_;
  std::size_t leaf_size_;
  std::vector<std::uint32_t> perm_;
  std::vector<Node> nodes_;
};

}  // namespace ikde
