#pragma once

#include "mavnav/dynamics.hpp"
#include "mavnav/voxel_map.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace mavnav {

enum class LatticeMode { kUniform, kMultiresolution };

struct LatticeConfig {
  double tau = 0.5;
  int accel_levels = 3;          // odd, spans [-a_max, a_max]
  double a_max = 1.0;            // per-axis lattice acceleration bound
  double rho = 1000.0;           // time weight
  double d_min = 1.0;            // safety distance
  double d_max = 2.0;            // obstacle cost vanishes beyond this
  double obstacle_weight = 50.0;
  double invalid_penalty = 1e6;  // per invalid sample on an escaping primitive
  double v_max_lattice = 1.5;
  LatticeMode mode = LatticeMode::kUniform;
  double base_resolution = 0.25;
  int levels = 3;
  double level_extent = 4.0;     // half-width of the finest level around the anchor
  int level_growth = 2;          // cell size ratio between consecutive levels
  double goal_pos_tol = -1.0;    // <= 0 selects half the local cell size
  double goal_speed_tol = -1.0;  // <= 0 selects one velocity bin
  double collision_sample_step = 0.1;
  int min_collision_samples = 5;
  std::size_t max_expansions = 500000;
  double heuristic_extent = 64.0;  // distance covered by the 1D table (m)
  double heuristic_weight = 1.0;   // > 1 trades optimality for speed (cost <= w * optimum)

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  double accel_step() const;
  double velocity_step() const { return accel_step() * tau; }
  /// Smallest position increment a primitive can produce: a_step tau^2 / 2.
  double position_quantum() const { return accel_step() * tau * tau / 2.0; }
  /// Default: half the cell size of the level the state lies in.
  double goal_position_tolerance(int level = 0) const;
  int coarsest_level() const { return mode == LatticeMode::kUniform ? 0 : levels - 1; }
  double goal_speed_tolerance() const;
  int max_velocity_bin() const;
  std::vector<double> accel_values() const;

  bool operator==(const LatticeConfig&) const = default;
};

/// Ramp cost for one sample: nullopt below d_min, (d_max - d)/(d_max - d_min)
/// inside the band, zero from d_max on.
std::optional<double> obstacle_ramp(double distance, double d_min, double d_max);

/// Obstacle cost from the nearest-obstacle distances of consecutive samples.
/// nullopt marks the primitive invalid.
std::optional<double> obstacle_cost_from_distances(std::span<const double> distances,
                                                   const LatticeConfig& config);

/// Sample times used for collision checking a primitive.
std::vector<double> collision_sample_times(const MotionPrimitive& prim,
                                           const LatticeConfig& config);

std::optional<double> obstacle_cost_of_primitive(const MotionPrimitive& prim,
                                                 const ObstacleIndex& index,
                                                 const LatticeConfig& config);

struct LatticeKey {
  Eigen::Vector3i corner;  // in base_resolution cells relative to the anchor
  Eigen::Vector3i vel;     // in velocity bins relative to the anchor offset

  bool operator==(const LatticeKey& o) const { return corner == o.corner && vel == o.vel; }
};

struct LatticeKeyHash {
  std::size_t operator()(const LatticeKey& k) const noexcept;
};

struct LatticeNode {
  State6 state;  // continuous state the search actually reached
  LatticeKey key;
  int level = 0;
};

struct Successor {
  LatticeNode node;
  MotionPrimitive primitive;
  double cost = 0.0;
};

/// Lattice graph anchored at a plan's start state. Node positions snap to the
/// corners of a uniform or anchor-centered multiresolution grid; velocities
/// stay on the bin grid offset by the anchor's velocity residual.
class StateLattice {
 public:
  StateLattice(LatticeConfig config, MapSnapshot map, State6 anchor);

  const LatticeConfig& config() const { return config_; }
  const MapSnapshot& map() const { return map_; }
  const State6& anchor() const { return anchor_; }

  /// Node for an arbitrary state; the state itself is kept verbatim.
  LatticeNode node_for(const State6& s) const;

  /// Resolution level covering position p.
  int level_at(const Vec3& p) const;
  double level_resolution(int level) const;

  /// All surviving successors, in fixed control order (x varies fastest).
  std::vector<Successor> successors(const LatticeNode& node) const;

  bool is_goal(const State6& s, const Vec3& goal) const;

 private:
  // Snaps a reached state onto the lattice; canonicalizes float dust.
  LatticeNode settle(const State6& reached) const;

  LatticeConfig config_;
  MapSnapshot map_;
  State6 anchor_;
  Vec3 vel_offset_;
  std::vector<double> accels_;
};

}  // namespace mavnav
