#pragma once

#include "mavnav/dynamics.hpp"
#include "mavnav/obstacle_index.hpp"

#include <Eigen/Geometry>

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mavnav {

using VoxelIndex = Eigen::Vector3i;

/// Classification of a voxel from its hit/miss tallies.
enum class OccupancyRule {
  kHitsAtLeastMisses,  // occupied iff hits >= 1 and hits >= misses
  kHitsExceedMisses,   // occupied iff hits >= 1 and hits > misses
};

struct VoxelMapConfig {
  double resolution = 0.25;
  int scan_window = 30;
  OccupancyRule rule = OccupancyRule::kHitsAtLeastMisses;

  bool operator==(const VoxelMapConfig&) const = default;
};

/// Ordered 3D Bresenham chain from start to end, both inclusive.
std::vector<VoxelIndex> bresenham_line(const VoxelIndex& start, const VoxelIndex& end);

/// Contributions of one scan, kept so they can be withdrawn when it ages out.
struct ScanRecord {
  std::int64_t scan_index = 0;
  std::vector<std::uint32_t> hits;    // linear voxel indices
  std::vector<std::uint32_t> misses;  // linear voxel indices
};

/// Axis-aligned bounds used for the planner's "inside the map" test.
struct MapBounds {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  bool operator==(const MapBounds&) const = default;
};

/// Immutable view handed to the planner: obstacle centers plus map extent.
struct MapSnapshot {
  std::shared_ptr<const ObstacleIndex> obstacles = std::make_shared<ObstacleIndex>();
  MapBounds bounds;
  double stamp = 0.0;  // time of the newest scan it contains
};

/// Dense aged occupancy grid with a per-scan contribution log.
class VoxelGrid {
 public:
  VoxelGrid(Vec3 origin, Eigen::Vector3i dims, VoxelMapConfig config = {});

  /// Grid covering [min, max] (rounded outward to whole voxels).
  static VoxelGrid covering(const MapBounds& bounds, VoxelMapConfig config = {});

  const VoxelMapConfig& config() const { return config_; }
  double resolution() const { return config_.resolution; }
  const Vec3& origin() const { return origin_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  MapBounds bounds() const;

  bool in_bounds(const VoxelIndex& idx) const;
  std::optional<VoxelIndex> index_of(const Vec3& point) const;
  Vec3 center_of(const VoxelIndex& idx) const;
  std::uint32_t linear(const VoxelIndex& idx) const;
  VoxelIndex unlinear(std::uint32_t lin) const;

  std::uint32_t hit_count(const VoxelIndex& idx) const { return hits_[linear(idx)]; }
  std::uint32_t miss_count(const VoxelIndex& idx) const { return misses_[linear(idx)]; }

  /// Bresenham traversal; throws std::out_of_range for out-of-grid indices.
  std::vector<VoxelIndex> raytrace_voxels(const VoxelIndex& start, const VoxelIndex& end) const;

  /// Bins sensor-frame points at the given pose and records one hit per
  /// endpoint voxel and one miss per traversed voxel that is not an endpoint
  /// of this scan. Throws std::logic_error unless scan_index increases.
  void integrate_scan(const Eigen::Isometry3d& sensor_pose, const std::vector<Vec3>& points,
                      std::int64_t scan_index);

  /// Withdraws every record with index <= current_scan_index - scan_window.
  void expire_old_scans(std::int64_t current_scan_index);

  bool is_occupied(const VoxelIndex& idx) const;
  std::vector<VoxelIndex> occupied_voxels() const;
  std::vector<Vec3> occupied_centers() const;
  MapSnapshot snapshot(double stamp) const;

  const std::deque<ScanRecord>& scan_log() const { return log_; }

  /// Map export: "ix,iy,iz,cx,cy,cz" per occupied voxel, 6 decimals, LF.
  std::string export_csv() const;

 private:
  VoxelMapConfig config_;
  Vec3 origin_;
  Eigen::Vector3i dims_;
  std::vector<std::uint32_t> hits_;
  std::vector<std::uint32_t> misses_;
  std::deque<ScanRecord> log_;
  std::optional<std::int64_t> last_scan_;
  // Per-voxel stamp used to deduplicate within one scan.
  std::vector<std::int64_t> touched_;
};

}  // namespace mavnav
