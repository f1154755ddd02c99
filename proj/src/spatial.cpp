#include "ikde/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ikde {

IndexKind parse_index_kind(std::string_view name) {
  if (name == "kdtree") return IndexKind::KdTree;
  if (name == "brute") return IndexKind::BruteForce;
  throw std::invalid_argument("unknown index kind '" + std::string(name) + "'");
}

std::string to_string(IndexKind kind) { return kind == IndexKind::KdTree ? "kdtree" : "brute"; }

SpatialIndex::SpatialIndex(const Dataset& points, IndexKind kind, std::size_t leaf_size)
    : points_(points), kind_(kind), leaf_size_(leaf_size) {
  if (points_.empty()) throw std::invalid_argument("spatial index: empty point set");
  if (leaf_size_ == 0) throw std::invalid_argument("spatial index: leaf size must be >= 1");
  if (points_.size() >= kNone) throw std::invalid_argument("spatial index: too many points");
  if (kind_ == IndexKind::KdTree) {
    perm_.resize(points_.size());
    std::iota(perm_.begin(), perm_.end(), 0u);
    nodes_.reserve(2 * (points_.size() / leaf_size_ + 1));
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  // Split on the dimension of largest spread.
  const std::size_t D = points_.dim();
  std::size_t best_dim = 0;
  double best_spread = -1.0;
  for (std::size_t k = 0; k < D; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::uint32_t i = begin; i < end; ++i) {
      const double v = points_.row(perm_[i])[k];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = k;
    }
  }
  if (best_spread <= 0.0) return id;  // all points identical: keep as one leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  auto coord = [&](std::uint32_t p) { return points_.row(p)[best_dim]; };
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return coord(a) < coord(b); });

  const double split = coord(perm_[mid]);
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.left = left;
  node.right = right;
  node.split_dim = static_cast<std::uint32_t>(best_dim);
  node.split = split;
  return id;
}

std::size_t SpatialIndex::depth() const {
  if (kind_ == IndexKind::BruteForce) return 0;
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0u, 0}};
  while (!stack.empty()) {
    const auto [id, level] = stack.back();
    stack.pop_back();
    best = std::max(best, level);
    if (nodes_[id].left != kNone) {
      stack.push_back({nodes_[id].left, level + 1});
      stack.push_back({nodes_[id].right, level + 1});
    }
  }
  return best;
}

std::size_t SpatialIndex::leaf_count() const {
  if (kind_ == IndexKind::BruteForce) return 1;
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.left == kNone; }));
}

std::vector<Neighbor> SpatialIndex::radius_query(std::span<const double> x, double r) const {
  std::vector<Neighbor> out;
  radius_query(x, r, out);
  return out;
}

void SpatialIndex::radius_query(std::span<const double> x, double r, std::vector<Neighbor>& out) const {
  if (x.size() != points_.dim()) throw std::invalid_argument("radius_query: dimension mismatch");
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("radius_query: radius must be positive");
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("radius_query: non-finite query");
  }
  out.clear();
  const double r2 = r * r;

  if (kind_ == IndexKind::BruteForce) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double dist = distance(points_.row(i), x);
      if (dist <= r) out.push_back({i, dist});
    }
    return;
  }

  std::vector<double> offsets(points_.dim(), 0.0);
  search(0, x, r2, 0.0, offsets, out);
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });

  // The pruning test works on squared distances; the final membership test is on
  // the distance itself, matching brute force exactly.
  std::erase_if(out, [r](const Neighbor& nb) { return nb.distance > r; });
}

void SpatialIndex::search(std::uint32_t id, std::span<const double> x, double r2, double reduced,
                          std::vector<double>& offsets, std::vector<Neighbor>& out) const {
  const Node& node = nodes_[id];
  if (node.left == kNone) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::size_t p = perm_[i];
      // Loose squared-distance filter, then the exact test in radius_query.
      const double d2 = squared_distance(points_.row(p), x);
      if (d2 <= r2 * (1.0 + 1e-12)) out.push_back({p, std::sqrt(d2)});
    }
    return;
  }
  const std::size_t k = node.split_dim;
  const double diff = x[k] - node.split;
  const std::uint32_t near = diff < 0.0 ? node.left : node.right;
  const std::uint32_t far = diff < 0.0 ? node.right : node.left;
  search(near, x, r2, reduced, offsets, out);

  // Lower bound on the squared distance from x to the far cell.
  const double saved = offsets[k];
  const double far_reduced = reduced - saved * saved + diff * diff;
  if (far_reduced <= r2 * (1.0 + 1e-12)) {
    offsets[k] = diff;
    search(far, x, r2, far_reduced, offsets, out);
    offsets[k] = saved;
  }
}

}  // namespace ikde
