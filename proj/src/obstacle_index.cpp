#include "mavnav/obstacle_index.hpp"

#include <algorithm>
#include <cmath>

namespace mavnav {

namespace {

constexpr int kLeafSize = 8;

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

double squared(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

ObstacleIndex::ObstacleIndex(std::vector<Vec3> centers) : points_(std::move(centers)) {
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<int>(points_.size()), 0);
  }
}

int ObstacleIndex::build(int begin, int end, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  // Split on the axis of largest extent.
  Vec3 lo = points_[begin];
  Vec3 hi = points_[begin];
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[i]);
    hi = hi.cwiseMax(points_[i]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                   [axis](const Vec3& a, const Vec3& b) {
                     if (a[axis] != b[axis]) return a[axis] < b[axis];
                     return lex_less(a, b);
                   });
  (void)depth;
  const double split = points_[mid][axis];
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void ObstacleIndex::search(int node_id, const Vec3& q, double& best_sq, int& best) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const double d = squared(points_[i], q);
      if (d < best_sq || (d == best_sq && best >= 0 && lex_less(points_[i], points_[best]))) {
        best_sq = d;
        best = i;
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double diff = q[node.axis] - node.split;
  const int near = diff <= 0.0 ? node.left : node.right;
  const int far = diff <= 0.0 ? node.right : node.left;
  search(near, q, best_sq, best);
  // Inclusive comparison keeps equal-distance candidates reachable for the tie rule.
  if (diff * diff <= best_sq) search(far, q, best_sq, best);
}

NearestObstacle ObstacleIndex::nearest(const Vec3& q) const {
  return nearest_within(q, std::numeric_limits<double>::infinity());
}

NearestObstacle ObstacleIndex::nearest_within(const Vec3& q, double max_distance) const {
  NearestObstacle out;
  if (points_.empty()) return out;
  double best_sq = std::isinf(max_distance)
                       ? std::numeric_limits<double>::infinity()
                       : std::nextafter(max_distance * max_distance,
                                        std::numeric_limits<double>::infinity());
  int best = -1;
  search(0, q, best_sq, best);
  if (best < 0) return out;
  out.center = points_[best];
  out.distance = point_distance(points_[best], q);
  return out;
}

NearestObstacle nearest_linear_scan(const std::vector<Vec3>& centers, const Vec3& q) {
  NearestObstacle out;
  double best_sq = std::numeric_limits<double>::infinity();
  for (const auto& c : centers) {
    const double d = squared(c, q);
    if (d < best_sq || (d == best_sq && out.center && lex_less(c, *out.center))) {
      best_sq = d;
      out.center = c;
    }
  }
  if (out.center) out.distance = point_distance(*out.center, q);
  return out;
}

}  // namespace mavnav
