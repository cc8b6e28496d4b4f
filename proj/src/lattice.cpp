#include "mavnav/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mavnav {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("planner.") + field + ": " + what);
}

constexpr double kLipschitzSlack = 1e-9;

// Length bound for a constant-acceleration segment; |v(t)| is convex in t.
double path_length_bound(const MotionPrimitive& prim) {
  const Vec3 v_end = prim.s0.v + prim.tau * prim.u;
  return prim.tau * std::max(prim.s0.v.norm(), v_end.norm());
}

}  // namespace

void LatticeConfig::validate() const {
  require(tau > 0.0, "tau", "must be > 0");
  require(accel_levels >= 1, "accel_levels", "acceleration set is empty");
  require(accel_levels % 2 == 1, "accel_levels", "must be odd so zero control is representable");
  require(a_max > 0.0, "a_max", "must be > 0");
  require(rho >= 0.0, "rho", "must be >= 0");
  require(d_min > 0.0 && d_min < d_max, "d_min", "need 0 < d_min < d_max");
  require(obstacle_weight >= 0.0, "obstacle_weight", "must be >= 0");
  require(invalid_penalty >= 0.0, "invalid_penalty", "must be >= 0");
  require(v_max_lattice > 0.0, "v_max_lattice", "must be > 0");
  require(base_resolution > 0.0, "base_resolution", "must be > 0");
  require(levels >= 1, "levels", "must be >= 1");
  require(level_extent > 0.0, "level_extent", "must be > 0");
  require(level_growth >= 1, "level_growth", "must be >= 1");
  require(collision_sample_step > 0.0, "collision_sample_step", "must be > 0");
  require(min_collision_samples >= 2, "min_collision_samples", "must be >= 2");
  require(max_expansions > 0, "max_expansions", "must be > 0");
  require(heuristic_extent > 0.0, "heuristic_extent", "must be > 0");
  require(heuristic_weight >= 1.0, "heuristic_weight", "must be >= 1");
}

double LatticeConfig::accel_step() const {
  if (accel_levels <= 1) return a_max;
  return a_max / static_cast<double>((accel_levels - 1) / 2);
}

double LatticeConfig::goal_position_tolerance(int level) const {
  if (goal_pos_tol > 0.0) return goal_pos_tol;
  return base_resolution * std::pow(static_cast<double>(level_growth), level) / 2.0;
}

double LatticeConfig::goal_speed_tolerance() const {
  return goal_speed_tol > 0.0 ? goal_speed_tol : velocity_step();
}

int LatticeConfig::max_velocity_bin() const {
  return static_cast<int>(std::floor(v_max_lattice / velocity_step() + 1e-9));
}

std::vector<double> LatticeConfig::accel_values() const {
  std::vector<double> out;
  const int half = (accel_levels - 1) / 2;
  const double step = accel_step();
  for (int k = -half; k <= half; ++k) out.push_back(k * step);
  return out;
}

std::optional<double> obstacle_ramp(double distance, double d_min, double d_max) {
  if (distance < d_min) return std::nullopt;
  if (distance >= d_max) return 0.0;
  return (d_max - distance) / (d_max - d_min);
}

std::optional<double> obstacle_cost_from_distances(std::span<const double> distances,
                                                   const LatticeConfig& config) {
  if (distances.empty()) return 0.0;
  const bool invalid_start = distances.front() < config.d_min;
  if (invalid_start) {
    // Escaping an invalid start is allowed only while moving away.
    for (std::size_t i = 1; i < distances.size(); ++i) {
      if (distances[i] < distances[i - 1]) return std::nullopt;
    }
  }
  double worst = 0.0;
  int invalid = 0;
  for (double d : distances) {
    const auto c = obstacle_ramp(d, config.d_min, config.d_max);
    if (!c) {
      if (!invalid_start) return std::nullopt;
      ++invalid;
      continue;
    }
    worst = std::max(worst, *c);
  }
  return config.obstacle_weight * worst + config.invalid_penalty * invalid;
}

std::vector<double> collision_sample_times(const MotionPrimitive& prim,
                                           const LatticeConfig& config) {
  const double length = path_length_bound(prim);
  const int n = std::max(config.min_collision_samples,
                         static_cast<int>(std::ceil(length / config.collision_sample_step)) + 1);
  std::vector<double> times(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) times[i] = prim.tau * i / (n - 1);
  times.back() = prim.tau;
  return times;
}

std::optional<double> obstacle_cost_of_primitive(const MotionPrimitive& prim,
                                                 const ObstacleIndex& index,
                                                 const LatticeConfig& config) {
  std::vector<double> distances;
  for (double t : collision_sample_times(prim, config)) {
    distances.push_back(index.nearest(eval_primitive(prim, t).p).distance);
  }
  return obstacle_cost_from_distances(distances, config);
}

std::size_t LatticeKeyHash::operator()(const LatticeKey& k) const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](int v) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
    h *= 1099511628211ULL;
  };
  for (int i = 0; i < 3; ++i) mix(k.corner[i]);
  for (int i = 0; i < 3; ++i) mix(k.vel[i]);
  return static_cast<std::size_t>(h ^ (h >> 29));
}

StateLattice::StateLattice(LatticeConfig config, MapSnapshot map, State6 anchor)
    : config_(std::move(config)), map_(std::move(map)), anchor_(std::move(anchor)) {
  config_.validate();
  const double dv = config_.velocity_step();
  for (int i = 0; i < 3; ++i) {
    vel_offset_[i] = anchor_.v[i] - std::round(anchor_.v[i] / dv) * dv;
  }
  accels_ = config_.accel_values();
}

int StateLattice::level_at(const Vec3& p) const {
  if (config_.mode == LatticeMode::kUniform) return 0;
  const double dist = (p - anchor_.p).cwiseAbs().maxCoeff();
  int level = 0;
  double extent = config_.level_extent;
  while (level + 1 < config_.levels && dist > extent) {
    extent *= 2.0;
    ++level;
  }
  return level;
}

double StateLattice::level_resolution(int level) const {
  return config_.base_resolution * std::pow(static_cast<double>(config_.level_growth), level);
}

LatticeNode StateLattice::node_for(const State6& s) const {
  LatticeNode node = settle(s);
  node.state = s;
  return node;
}

LatticeNode StateLattice::settle(const State6& reached) const {
  LatticeNode node;
  node.state = reached;
  node.level = level_at(reached.p);
  const double res = level_resolution(node.level);
  const int scale = static_cast<int>(std::lround(std::pow(config_.level_growth, node.level)));
  const double dv = config_.velocity_step();
  for (int i = 0; i < 3; ++i) {
    const double offset = reached.p[i] - anchor_.p[i];
    node.key.corner[i] = static_cast<int>(std::lround(offset / res)) * scale;
    const double corner_pos = anchor_.p[i] + node.key.corner[i] * config_.base_resolution;
    if (std::abs(reached.p[i] - corner_pos) <= 1e-10 * (1.0 + std::abs(corner_pos))) {
      node.state.p[i] = corner_pos;
    }
    node.key.vel[i] = static_cast<int>(std::lround((reached.v[i] - vel_offset_[i]) / dv));
    const double bin_vel = vel_offset_[i] + node.key.vel[i] * dv;
    if (std::abs(reached.v[i] - bin_vel) <= 1e-10 * (1.0 + std::abs(bin_vel))) {
      node.state.v[i] = bin_vel;
    }
  }
  return node;
}

std::vector<Successor> StateLattice::successors(const LatticeNode& node) const {
  std::vector<Successor> out;
  const auto& obstacles = *map_.obstacles;
  // Nothing beyond this radius can reach within d_max of a sample.
  const double reach = config_.tau * (node.state.v.norm() + config_.tau * config_.a_max * std::sqrt(3.0)) +
                       config_.d_max + kLipschitzSlack;
  const double start_distance = obstacles.nearest_within(node.state.p, reach).distance;
  const bool invalid_start = start_distance < config_.d_min;
  const double v_lim = config_.v_max_lattice + 1e-9;
  std::vector<double> distances;

  for (double uz : accels_) {
    for (double uy : accels_) {
      for (double ux : accels_) {
        MotionPrimitive prim{node.state, Vec3(ux, uy, uz), config_.tau};
        const State6 end = eval_primitive(prim, prim.tau);

        bool speed_ok = true;
        for (int i = 0; i < 3; ++i) {
          const double v = std::abs(end.v[i]);
          if (v > v_lim && v >= std::abs(node.state.v[i])) speed_ok = false;
        }
        if (!speed_ok) continue;

        LatticeNode next = settle(end);
        if (next.key == node.key) continue;
        if (!map_.bounds.contains(end.p)) continue;

        const auto times = collision_sample_times(prim, config_);
        bool inside = true;
        for (double t : times) {
          if (!map_.bounds.contains(eval_primitive(prim, t).p)) {
            inside = false;
            break;
          }
        }
        if (!inside) continue;

        std::optional<double> obstacle_cost;
        if (invalid_start) {
          distances.clear();
          for (double t : times) {
            distances.push_back(obstacles.nearest(eval_primitive(prim, t).p).distance);
          }
          obstacle_cost = obstacle_cost_from_distances(distances, config_);
        } else if (start_distance - path_length_bound(prim) >= config_.d_max) {
          // Every sample lies within the length bound of the start.
          obstacle_cost = 0.0;
        } else {
          // The ramp is non-increasing in distance, so only the smallest
          // sample distance matters. The distance field is 1-Lipschitz:
          // samples that cannot undercut the running minimum are skipped and
          // the others are searched only within it.
          double closest = std::min(start_distance, config_.d_max);
          Vec3 known_p = node.state.p;
          double known_d = start_distance;  // lower bound on the distance at known_p
          bool valid = true;
          for (double t : times) {
            if (t == 0.0) continue;
            const Vec3 p = eval_primitive(prim, t).p;
            const double bound = std::max(start_distance - point_distance(p, node.state.p),
                                          known_d - point_distance(p, known_p));
            if (bound - kLipschitzSlack >= closest) continue;
            const double d = obstacles.nearest_within(p, closest).distance;
            known_p = p;
            known_d = std::min(d, closest);
            if (d < config_.d_min) {
              valid = false;
              break;
            }
            closest = std::min(closest, d);
          }
          if (valid) {
            obstacle_cost =
                config_.obstacle_weight * *obstacle_ramp(closest, config_.d_min, config_.d_max);
          }
        }
        if (!obstacle_cost) continue;

        // The edge starts from the parent's state and ends where the lattice
        // keeps the successor, so chained primitives stay continuous.
        prim.s0 = node.state;
        out.push_back(Successor{next, prim, primitive_cost(prim, config_.rho) + *obstacle_cost});
      }
    }
  }
  return out;
}

bool StateLattice::is_goal(const State6& s, const Vec3& goal) const {
  return (s.p - goal).cwiseAbs().maxCoeff() <=
             config_.goal_position_tolerance(level_at(s.p)) &&
         s.v.norm() <= config_.goal_speed_tolerance();
}

}  // namespace mavnav
