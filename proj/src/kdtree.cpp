#include "negvol/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "negvol/error.hpp"

namespace negvol {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorKind::Config, "kd-tree: too many points");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis] ||
                            (points_[a][axis] == points_[b][axis] && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  return id;
}

void KdTree::search(std::int32_t node, const Vec3& q, std::size_t& best, double& best_d2) const {
  const Node& n = nodes_[node];
  if (n.left < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const double d2 = (points_[order_[i]] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && order_[i] < best)) {
        best_d2 = d2;
        best = order_[i];
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds >= split.
  const double diff = q[n.axis] - n.split;
  const std::int32_t near = diff < 0.0 ? n.left : n.right;
  const std::int32_t far = diff < 0.0 ? n.right : n.left;
  search(near, q, best, best_d2);
  if (diff * diff <= best_d2) search(far, q, best, best_d2);
}

std::pair<std::size_t, double> KdTree::nearest(const Vec3& q) const {
  if (points_.empty()) fail(ErrorKind::Geometry, "kd-tree: nearest-neighbor query on an empty set");
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  search(0, q, best, best_d2);
  return {best, best_d2};
}

}  // namespace negvol
