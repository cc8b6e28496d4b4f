#pragma once

#include "mavnav/dynamics.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace mavnav {

struct NearestObstacle {
  double distance = std::numeric_limits<double>::infinity();
  std::optional<Vec3> center;
};

/// Euclidean distance computed the same way everywhere it must agree bitwise.
inline double point_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Static k-d tree over obstacle centers. Immutable once built, so it can be
/// shared between the planner and metrics without locking.
class ObstacleIndex {
 public:
  ObstacleIndex() = default;
  explicit ObstacleIndex(std::vector<Vec3> centers);

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  /// Exact nearest center. Equal distances resolve to the lexicographically
  /// smallest center. Empty index yields +inf and no center.
  NearestObstacle nearest(const Vec3& q) const;

  /// Like nearest(), but may stop early and report +inf when nothing lies
  /// within max_distance (inclusive).
  NearestObstacle nearest_within(const Vec3& q, double max_distance) const;

 private:
  struct Node {
    int begin = 0;
    int end = 0;
    int left = -1;
    int right = -1;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
  };

  int build(int begin, int end, int depth);
  void search(int node, const Vec3& q, double& best_sq, int& best) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
};

/// Brute-force nearest center with the same tie rule; kept for validation.
NearestObstacle nearest_linear_scan(const std::vector<Vec3>& centers, const Vec3& q);

}  // namespace mavnav
