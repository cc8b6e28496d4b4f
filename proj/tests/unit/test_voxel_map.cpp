#include "mavnav/obstacle_index.hpp"
#include "mavnav/voxel_map.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

using namespace mavnav;

namespace {

VoxelGrid small_grid(int window = 30) {
  VoxelMapConfig cfg;
  cfg.resolution = 0.25;
  cfg.scan_window = window;
  return VoxelGrid(Vec3::Constant(-2.0), Eigen::Vector3i::Constant(16), cfg);
}

Eigen::Isometry3d pose_at(const Vec3& p) {
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  pose.translate(p);
  return pose;
}

// Tallies rebuilt from the surviving scan log.
void check_log_consistent(const VoxelGrid& g) {
  std::map<std::uint32_t, std::uint32_t> hits, misses;
  for (const auto& rec : g.scan_log()) {
    for (auto lin : rec.hits) ++hits[lin];
    for (auto lin : rec.misses) ++misses[lin];
  }
  const auto& d = g.dims();
  bool ok = true;
  for (int x = 0; x < d.x(); ++x)
    for (int y = 0; y < d.y(); ++y)
      for (int z = 0; z < d.z(); ++z) {
        const VoxelIndex idx(x, y, z);
        const auto lin = g.linear(idx);
        ok = ok && g.hit_count(idx) == hits[lin] && g.miss_count(idx) == misses[lin];
      }
  CHECK(ok);
}

}  // namespace

TEST_CASE("bresenham examples") {
  const VoxelGrid g = small_grid();
  const VoxelIndex a(3, 4, 5);
  CHECK(g.raytrace_voxels(a, a) == std::vector<VoxelIndex>{a});
  const auto line = g.raytrace_voxels({0, 0, 0}, {3, 0, 0});
  CHECK(line == std::vector<VoxelIndex>{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  CHECK_THROWS_AS(g.raytrace_voxels({0, 0, 0}, {16, 0, 0}), std::out_of_range);
}

TEST_CASE("bresenham coverage and connectivity on random rays") {
  VoxelMapConfig cfg;
  cfg.resolution = 1.0;
  const VoxelGrid g(Vec3::Zero(), Eigen::Vector3i::Constant(32), cfg);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> c(0, 31);
  const double limit = std::sqrt(3.0) / 2.0 + 1e-9;
  for (int i = 0; i < 100; ++i) {
    const VoxelIndex a(c(rng), c(rng), c(rng));
    const VoxelIndex b(c(rng), c(rng), c(rng));
    const auto line = g.raytrace_voxels(a, b);
    REQUIRE(!line.empty());
    CHECK(line.front() == a);
    CHECK(line.back() == b);
    CHECK(line.size() == static_cast<std::size_t>((b - a).cwiseAbs().maxCoeff() + 1));
    for (std::size_t k = 0; k < line.size(); ++k) {
      CHECK(testing::sampled_center_distance(g, a, b, line[k]) <= limit);
      if (k > 0) CHECK((line[k] - line[k - 1]).cwiseAbs().maxCoeff() == 1);
    }
    // Reversed ray covers the same voxel count.
    CHECK(g.raytrace_voxels(b, a).size() == line.size());
  }
}

TEST_CASE("integrate_scan examples") {
  VoxelGrid g = small_grid();
  const Eigen::Isometry3d pose = pose_at(Vec3::Constant(0.125));

  g.integrate_scan(pose, {}, 0);
  CHECK(g.scan_log().size() == 1);
  CHECK(g.scan_log().back().hits.empty());
  CHECK(g.occupied_centers().empty());

  g.integrate_scan(pose, {Vec3(1, 0, 0)}, 1);
  CHECK(g.hit_count({12, 8, 8}) == 1);
  for (int x = 9; x <= 11; ++x) CHECK(g.miss_count({x, 8, 8}) == 1);
  CHECK(g.miss_count({8, 8, 8}) == 0);  // sensor voxel
  CHECK(g.miss_count({12, 8, 8}) == 0);

  // Two points in one voxel count once.
  g.integrate_scan(pose, {Vec3(1.0, 0, 0), Vec3(1.1, 0.05, 0.05)}, 2);
  CHECK(g.hit_count({12, 8, 8}) == 2);
  CHECK(g.scan_log().back().hits.size() == 1);

  // Out-of-range points are dropped.
  g.integrate_scan(pose, {Vec3(10, 0, 0)}, 3);
  CHECK(g.scan_log().back().hits.empty());

  CHECK_THROWS_AS(g.integrate_scan(pose, {}, 3), std::logic_error);
  check_log_consistent(g);
}

TEST_CASE("endpoints of the current scan are not cleared by its own rays") {
  VoxelGrid g = small_grid();
  // The second point lies behind the first along the same ray.
  g.integrate_scan(pose_at(Vec3::Constant(0.125)), {Vec3(0.5, 0, 0), Vec3(1.0, 0, 0)}, 0);
  CHECK(g.hit_count({10, 8, 8}) == 1);
  CHECK(g.miss_count({10, 8, 8}) == 0);
  CHECK(g.is_occupied({10, 8, 8}));
}

TEST_CASE("expire_old_scans examples") {
  const Eigen::Isometry3d pose = pose_at(Vec3::Constant(0.125));
  const VoxelIndex target(12, 8, 8);

  VoxelGrid g = small_grid(5);
  g.integrate_scan(pose, {Vec3(1, 0, 0)}, 0);
  for (int k = 1; k < 5; ++k) {
    g.integrate_scan(pose, {}, k);
    g.expire_old_scans(k);
    CHECK(g.hit_count(target) == 1);
  }
  g.integrate_scan(pose, {}, 5);
  g.expire_old_scans(5);
  CHECK(g.hit_count(target) == 0);
  CHECK(g.miss_count({10, 8, 8}) == 0);

  VoxelGrid h = small_grid(5);
  h.integrate_scan(pose, {Vec3(1, 0, 0)}, 0);
  h.integrate_scan(pose, {Vec3(1, 0, 0)}, 5);
  h.expire_old_scans(5);
  CHECK(h.hit_count(target) == 1);
  check_log_consistent(h);
}

TEST_CASE("occupied_centers and the classification rule") {
  VoxelGrid g = small_grid();
  CHECK(g.occupied_centers().empty());
  const Eigen::Isometry3d pose = pose_at(Vec3::Constant(0.125));
  for (int k = 0; k < 3; ++k) g.integrate_scan(pose, {Vec3(1, 0, 0)}, k);
  const auto centers = g.occupied_centers();
  REQUIRE(centers.size() == 1);
  CHECK((centers[0] - Vec3(-2 + 12.5 * 0.25, -2 + 8.5 * 0.25, -2 + 8.5 * 0.25)).norm() < 1e-12);

  // A voxel hit once and seen through five times is free.
  VoxelGrid f = small_grid();
  f.integrate_scan(pose, {Vec3(0.5, 0, 0)}, 0);
  for (int k = 1; k <= 5; ++k) f.integrate_scan(pose, {Vec3(1, 0, 0)}, k);
  CHECK(f.hit_count({10, 8, 8}) == 1);
  CHECK(f.miss_count({10, 8, 8}) == 5);
  CHECK_FALSE(f.is_occupied({10, 8, 8}));

  // Equal tallies: occupied under the default rule only.
  VoxelGrid e = small_grid();
  e.integrate_scan(pose, {Vec3(0.5, 0, 0)}, 0);
  e.integrate_scan(pose, {Vec3(1, 0, 0)}, 1);
  CHECK(e.is_occupied({10, 8, 8}));
  VoxelMapConfig strict;
  strict.rule = OccupancyRule::kHitsExceedMisses;
  VoxelGrid s(Vec3::Constant(-2.0), Eigen::Vector3i::Constant(16), strict);
  s.integrate_scan(pose, {Vec3(0.5, 0, 0)}, 0);
  s.integrate_scan(pose, {Vec3(1, 0, 0)}, 1);
  CHECK_FALSE(s.is_occupied({10, 8, 8}));
}

TEST_CASE("random scan sequences keep tallies consistent with the log") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-1.9, 1.9);
  VoxelGrid g = small_grid(4);
  for (int k = 0; k < 25; ++k) {
    std::vector<Vec3> pts;
    const int n = static_cast<int>(rng() % 20);
    const Vec3 origin(c(rng) * 0.3, c(rng) * 0.3, c(rng) * 0.3);
    for (int i = 0; i < n; ++i) pts.emplace_back(c(rng), c(rng), c(rng));
    g.integrate_scan(pose_at(origin), pts, k);
    g.expire_old_scans(k);
    CHECK(g.scan_log().size() <= 4);
  }
  check_log_consistent(g);
}

TEST_CASE("index_of and center_of round-trip") {
  const VoxelGrid g = small_grid();
  CHECK(*g.index_of(Vec3(0.1, -0.1, 1.9)) == VoxelIndex(8, 7, 15));
  CHECK_FALSE(g.index_of(Vec3(2.5, 0, 0)));
  const VoxelIndex idx(3, 9, 14);
  CHECK(*g.index_of(g.center_of(idx)) == idx);
  CHECK(g.unlinear(g.linear(idx)) == idx);
}

TEST_CASE("nearest_obstacle examples") {
  const ObstacleIndex empty;
  CHECK(std::isinf(empty.nearest(Vec3::Zero()).distance));
  CHECK_FALSE(empty.nearest(Vec3::Zero()).center);

  const ObstacleIndex two({Vec3(0, 0, 0), Vec3(10, 0, 0)});
  const auto n = two.nearest(Vec3(4, 0, 0));
  CHECK(n.distance == 4.0);
  CHECK(*n.center == Vec3(0, 0, 0));
  CHECK(two.nearest(Vec3(10, 0, 0)).distance == 0.0);
  // Ties resolve to the lexicographically smaller center.
  CHECK(*two.nearest(Vec3(5, 0, 0)).center == Vec3(0, 0, 0));
}

TEST_CASE("k-d tree equals linear scan") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> c(-10, 10);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Vec3> centers;
    for (int i = 0; i < 1000; ++i) {
      // Snap some coordinates to a coarse grid to force ties.
      Vec3 p(c(rng), c(rng), c(rng));
      if (i % 3 == 0) p = ((p * 2).array().round() / 2).matrix();
      centers.push_back(p);
    }
    const ObstacleIndex index(centers);
    for (int q = 0; q < 100; ++q) {
      Vec3 x(c(rng), c(rng), c(rng));
      if (q % 4 == 0) x = ((x * 2).array().round() / 2).matrix() + Vec3(0.25, 0, 0);
      const auto tree = index.nearest(x);
      const auto brute = nearest_linear_scan(centers, x);
      CHECK(tree.distance == brute.distance);
      CHECK(*tree.center == *brute.center);

      const double r = std::abs(c(rng)) * 0.3;
      const auto bounded = index.nearest_within(x, r);
      if (brute.distance <= r) {
        CHECK(bounded.distance == brute.distance);
      } else {
        CHECK(bounded.distance > r);
      }
    }
  }
}
