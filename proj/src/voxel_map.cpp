#include "mavnav/voxel_map.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mavnav {

namespace {

constexpr std::int64_t kNeverTouched = std::numeric_limits<std::int64_t>::min();

// Integer 3D Bresenham; calls visit(idx) for every voxel from start to end.
template <typename Visit>
void for_each_bresenham(const VoxelIndex& start, const VoxelIndex& end, Visit&& visit) {
  const VoxelIndex delta = end - start;
  const VoxelIndex step(delta.x() >= 0 ? 1 : -1, delta.y() >= 0 ? 1 : -1,
                        delta.z() >= 0 ? 1 : -1);
  const VoxelIndex abs_delta = delta.cwiseAbs();
  int major = 0;
  abs_delta.maxCoeff(&major);
  const int m1 = (major + 1) % 3;
  const int m2 = (major + 2) % 3;
  const int n = abs_delta[major];

  VoxelIndex cur = start;
  int err1 = 2 * abs_delta[m1] - n;
  int err2 = 2 * abs_delta[m2] - n;
  visit(cur);
  for (int i = 0; i < n; ++i) {
    if (err1 > 0) {
      cur[m1] += step[m1];
      err1 -= 2 * n;
    }
    if (err2 > 0) {
      cur[m2] += step[m2];
      err2 -= 2 * n;
    }
    err1 += 2 * abs_delta[m1];
    err2 += 2 * abs_delta[m2];
    cur[major] += step[major];
    visit(cur);
  }
}

}  // namespace

std::vector<VoxelIndex> bresenham_line(const VoxelIndex& start, const VoxelIndex& end) {
  std::vector<VoxelIndex> out;
  out.reserve(static_cast<std::size_t>((end - start).cwiseAbs().maxCoeff()) + 1);
  for_each_bresenham(start, end, [&](const VoxelIndex& v) { out.push_back(v); });
  return out;
}

VoxelGrid::VoxelGrid(Vec3 origin, Eigen::Vector3i dims, VoxelMapConfig config)
    : config_(config), origin_(std::move(origin)), dims_(std::move(dims)) {
  if (!(config_.resolution > 0.0)) throw std::invalid_argument("map: resolution must be > 0");
  if (config_.scan_window < 1) throw std::invalid_argument("map: scan_window must be >= 1");
  if ((dims_.array() <= 0).any()) throw std::invalid_argument("map: dims must be positive");
  const auto count = static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z();
  if (count > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("map: grid too large");
  }
  hits_.assign(count, 0);
  misses_.assign(count, 0);
  touched_.assign(count, kNeverTouched);
}

VoxelGrid VoxelGrid::covering(const MapBounds& bounds, VoxelMapConfig config) {
  const Vec3 extent = bounds.max - bounds.min;
  if ((extent.array() <= 0.0).any()) throw std::invalid_argument("map: degenerate bounds");
  Eigen::Vector3i dims;
  for (int i = 0; i < 3; ++i) {
    dims[i] = static_cast<int>(std::ceil(extent[i] / config.resolution - 1e-9));
  }
  return VoxelGrid(bounds.min, dims, config);
}

MapBounds VoxelGrid::bounds() const {
  return MapBounds{origin_, origin_ + dims_.cast<double>() * config_.resolution};
}

bool VoxelGrid::in_bounds(const VoxelIndex& idx) const {
  return (idx.array() >= 0).all() && (idx.array() < dims_.array()).all();
}

std::optional<VoxelIndex> VoxelGrid::index_of(const Vec3& point) const {
  VoxelIndex idx;
  for (int i = 0; i < 3; ++i) {
    const double f = std::floor((point[i] - origin_[i]) / config_.resolution);
    if (!(f >= 0.0 && f < dims_[i])) return std::nullopt;
    idx[i] = static_cast<int>(f);
  }
  return idx;
}

Vec3 VoxelGrid::center_of(const VoxelIndex& idx) const {
  return origin_ + (idx.cast<double>().array() + 0.5).matrix() * config_.resolution;
}

std::uint32_t VoxelGrid::linear(const VoxelIndex& idx) const {
  return static_cast<std::uint32_t>((idx.z() * dims_.y() + idx.y()) * dims_.x() + idx.x());
}

VoxelIndex VoxelGrid::unlinear(std::uint32_t lin) const {
  const int x = static_cast<int>(lin % static_cast<std::uint32_t>(dims_.x()));
  const std::uint32_t rest = lin / static_cast<std::uint32_t>(dims_.x());
  const int y = static_cast<int>(rest % static_cast<std::uint32_t>(dims_.y()));
  const int z = static_cast<int>(rest / static_cast<std::uint32_t>(dims_.y()));
  return {x, y, z};
}

std::vector<VoxelIndex> VoxelGrid::raytrace_voxels(const VoxelIndex& start,
                                                   const VoxelIndex& end) const {
  if (!in_bounds(start) || !in_bounds(end)) {
    throw std::out_of_range("raytrace_voxels: index outside grid");
  }
  return bresenham_line(start, end);
}

void VoxelGrid::integrate_scan(const Eigen::Isometry3d& sensor_pose,
                               const std::vector<Vec3>& points, std::int64_t scan_index) {
  if (last_scan_ && scan_index <= *last_scan_) {
    throw std::logic_error("integrate_scan: scan index " + std::to_string(scan_index) +
                           " not greater than " + std::to_string(*last_scan_));
  }
  last_scan_ = scan_index;

  ScanRecord record;
  record.scan_index = scan_index;

  // Endpoints: one hit per voxel per scan. Hit stamps use 2k, miss stamps 2k+1
  // so both fit in one array without colliding across scans.
  const std::int64_t hit_stamp = 2 * scan_index;
  const std::int64_t miss_stamp = 2 * scan_index + 1;
  std::vector<VoxelIndex> endpoints;
  for (const auto& p : points) {
    const auto idx = index_of(sensor_pose * p);
    if (!idx) continue;
    const auto lin = linear(*idx);
    if (touched_[lin] == hit_stamp) continue;
    touched_[lin] = hit_stamp;
    record.hits.push_back(lin);
    endpoints.push_back(*idx);
  }

  if (const auto sensor = index_of(sensor_pose.translation())) {
    for (const auto& end : endpoints) {
      for_each_bresenham(*sensor, end, [&](const VoxelIndex& v) {
        if (v == *sensor || v == end) return;
        const auto lin = linear(v);
        if (touched_[lin] == hit_stamp || touched_[lin] == miss_stamp) return;
        touched_[lin] = miss_stamp;
        record.misses.push_back(lin);
      });
    }
  }

  for (auto lin : record.hits) ++hits_[lin];
  for (auto lin : record.misses) ++misses_[lin];
  log_.push_back(std::move(record));
}

void VoxelGrid::expire_old_scans(std::int64_t current_scan_index) {
  const std::int64_t cutoff = current_scan_index - config_.scan_window;
  while (!log_.empty() && log_.front().scan_index <= cutoff) {
    const auto& rec = log_.front();
    for (auto lin : rec.hits) {
      if (hits_[lin] > 0) --hits_[lin];
    }
    for (auto lin : rec.misses) {
      if (misses_[lin] > 0) --misses_[lin];
    }
    log_.pop_front();
  }
}

bool VoxelGrid::is_occupied(const VoxelIndex& idx) const {
  const auto lin = linear(idx);
  const auto h = hits_[lin];
  const auto m = misses_[lin];
  if (h == 0) return false;
  return config_.rule == OccupancyRule::kHitsAtLeastMisses ? h >= m : h > m;
}

std::vector<VoxelIndex> VoxelGrid::occupied_voxels() const {
  std::vector<VoxelIndex> out;
  const auto count = static_cast<std::uint32_t>(hits_.size());
  for (std::uint32_t lin = 0; lin < count; ++lin) {
    if (hits_[lin] == 0) continue;
    const VoxelIndex idx = unlinear(lin);
    if (is_occupied(idx)) out.push_back(idx);
  }
  return out;
}

std::vector<Vec3> VoxelGrid::occupied_centers() const {
  std::vector<Vec3> out;
  for (const auto& idx : occupied_voxels()) out.push_back(center_of(idx));
  return out;
}

MapSnapshot VoxelGrid::snapshot(double stamp) const {
  MapSnapshot snap;
  snap.obstacles = std::make_shared<const ObstacleIndex>(occupied_centers());
  snap.bounds = bounds();
  snap.stamp = stamp;
  return snap;
}

std::string VoxelGrid::export_csv() const {
  fmt::memory_buffer buf;
  for (const auto& idx : occupied_voxels()) {
    const Vec3 c = center_of(idx);
    fmt::format_to(std::back_inserter(buf), "{},{},{},{:.6f},{:.6f},{:.6f}\n", idx.x(), idx.y(),
                   idx.z(), c.x(), c.y(), c.z());
  }
  return fmt::to_string(buf);
}

}  // namespace mavnav
