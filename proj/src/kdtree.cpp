#include "matsplat/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace matsplat {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  if (a.distance2 != b.distance2) return a.distance2 < b.distance2;
  return a.index < b.index;
}

}  // namespace

KdTree::KdTree(std::vector<Vec3> points, std::size_t leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, 0, 0.0});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (!(hi[axis] > lo[axis])) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::int32_t node_id, const Vec3& q, std::size_t k, double& bound,
                    std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const Neighbor cand{order_[i], distance2(q, points_[order_[i]])};
      if (cand.distance2 > bound) continue;
      if (heap.size() == k) {
        if (!closer(cand, heap.front())) continue;
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.pop_back();
      }
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), closer);
      if (heap.size() == k) bound = std::min(bound, heap.front().distance2);
    }
    return;
  }
  // Left holds coordinates <= split, right holds >= split.
  const double diff = q[node.axis] - node.split;
  const std::int32_t first = diff <= 0 ? node.left : node.right;
  const std::int32_t second = diff <= 0 ? node.right : node.left;
  search(first, q, k, bound, heap);
  // Equal distances must still be visited so the lowest index can win.
  if (diff * diff <= bound) search(second, q, k, bound, heap);
}

std::vector<Neighbor> KdTree::nearest(const Vec3& query, std::size_t k) const {
  std::vector<Neighbor> heap;
  if (k == 0 || points_.empty()) return heap;
  heap.reserve(k + 1);
  double bound = std::numeric_limits<double>::infinity();
  search(0, query, k, bound, heap);
  std::sort(heap.begin(), heap.end(), closer);
  return heap;
}

std::optional<Neighbor> KdTree::nearest_within(const Vec3& query, double radius) const {
  if (points_.empty()) return std::nullopt;
  std::vector<Neighbor> heap;
  double bound = radius * radius;
  search(0, query, 1, bound, heap);
  if (heap.empty()) return std::nullopt;
  return heap.front();
}

}  // namespace matsplat
