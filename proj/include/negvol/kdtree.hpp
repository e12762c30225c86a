#pragma once

#include <cstdint>
#include <vector>

#include "negvol/grid.hpp"

namespace negvol {

/// Static 3-d tree for exact nearest-neighbor queries.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);

  std::size_t size() const { return points_.size(); }

  /// Index and squared distance of the closest point. The tree must not be
  /// empty.
  std::pair<std::size_t, double> nearest(const Vec3& q) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range in order_
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& q, std::size_t& best, double& best_d2) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace negvol
