#include "mavnav/world.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mavnav {

double box_distance(const Box& box, const Vec3& p) {
  const Vec3 below = (box.min - p).cwiseMax(0.0);
  const Vec3 above = (p - box.max).cwiseMax(0.0);
  return (below + above).norm();
}

std::optional<double> ray_box_entry(const Vec3& origin, const Vec3& direction, const Box& box,
                                    double max_range) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (direction[i] == 0.0) {
      if (origin[i] < box.min[i] || origin[i] > box.max[i]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[i] - origin[i]) / direction[i];
    double t1 = (box.max[i] - origin[i]) / direction[i];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit || t_enter < 0.0 || t_enter > max_range) return std::nullopt;
  return t_enter;
}

Vec3 DynamicBox::center_at(double t) const {
  if (schedule.empty()) return Vec3::Zero();
  if (t <= schedule.front().time) return schedule.front().center;
  if (t >= schedule.back().time) return schedule.back().center;
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    const auto& a = schedule[i - 1];
    const auto& b = schedule[i];
    if (t <= b.time) {
      const double s = (t - a.time) / (b.time - a.time);
      return a.center + s * (b.center - a.center);
    }
  }
  return schedule.back().center;
}

Box DynamicBox::at(double t) const {
  const Vec3 c = center_at(t);
  return Box{c - size / 2.0, c + size / 2.0};
}

void World::validate() const {
  for (std::size_t i = 0; i < static_boxes.size(); ++i) {
    if (!(static_boxes[i].min.array() < static_boxes[i].max.array()).all()) {
      throw std::invalid_argument("world.static_boxes[" + std::to_string(i) +
                                  "]: min must be below max on every axis");
    }
  }
  for (std::size_t i = 0; i < dynamic_boxes.size(); ++i) {
    const auto& d = dynamic_boxes[i];
    const std::string where = "world.dynamic_boxes[" + std::to_string(i) + "]";
    if (!(d.size.array() > 0.0).all()) {
      throw std::invalid_argument(where + ".size: must be positive on every axis");
    }
    if (d.schedule.empty()) throw std::invalid_argument(where + ".schedule: must not be empty");
    for (std::size_t k = 1; k < d.schedule.size(); ++k) {
      if (!(d.schedule[k].time > d.schedule[k - 1].time)) {
        throw std::invalid_argument(where + ".schedule: times must increase");
      }
    }
  }
}

std::vector<Box> World::boxes_at(double t) const {
  std::vector<Box> out = static_boxes;
  for (const auto& d : dynamic_boxes) out.push_back(d.at(t));
  return out;
}

double World::clearance(const Vec3& p, double t) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : static_boxes) best = std::min(best, box_distance(b, p));
  for (const auto& d : dynamic_boxes) best = std::min(best, box_distance(d.at(t), p));
  return best;
}

void SensorModel::validate() const {
  if (azimuth_rays < 1) throw std::invalid_argument("sensor.azimuth_rays: must be >= 1");
  if (elevation_rays < 1) throw std::invalid_argument("sensor.elevation_rays: must be >= 1");
  if (!(vertical_fov_deg >= 0.0 && vertical_fov_deg <= 180.0)) {
    throw std::invalid_argument("sensor.vertical_fov_deg: must be in [0, 180]");
  }
  if (!(max_range > 0.0)) throw std::invalid_argument("sensor.max_range: must be > 0");
  if (!(range_sigma >= 0.0)) throw std::invalid_argument("sensor.range_sigma: must be >= 0");
  if (!(pose_sigma >= 0.0)) throw std::invalid_argument("sensor.pose_sigma: must be >= 0");
  if (!(drift_rate >= 0.0)) throw std::invalid_argument("sensor.drift_rate: must be >= 0");
  if (!(imu_sigma >= 0.0)) throw std::invalid_argument("sensor.imu_sigma: must be >= 0");
}

std::vector<Vec3> SensorModel::directions() const {
  constexpr double kDeg = std::numbers::pi / 180.0;
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(azimuth_rays) * elevation_rays);
  for (int i = 0; i < azimuth_rays; ++i) {
    const double az = 2.0 * std::numbers::pi * i / azimuth_rays;
    for (int j = 0; j < elevation_rays; ++j) {
      const double el = (-vertical_fov_deg / 2.0 + vertical_fov_deg * j / elevation_rays) * kDeg;
      out.emplace_back(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    }
  }
  return out;
}

std::vector<Vec3> cast_scan(const Eigen::Isometry3d& pose, const World& world,
                            const SensorModel& sensor, double clock, std::mt19937_64* rng) {
  const std::vector<Box> boxes = world.boxes_at(clock);
  std::vector<Vec3> points;
  if (boxes.empty()) return points;
  std::normal_distribution<double> noise(0.0, sensor.range_sigma);
  const Vec3 origin = pose.translation();
  for (const Vec3& local : sensor.directions()) {
    const Vec3 dir = pose.linear() * local;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : boxes) {
      if (auto t = ray_box_entry(origin, dir, b, sensor.max_range)) best = std::min(best, *t);
    }
    if (!std::isfinite(best)) continue;
    if (rng != nullptr && sensor.range_sigma > 0.0) best += noise(*rng);
    points.push_back(local * best);
  }
  return points;
}

}  // namespace mavnav
