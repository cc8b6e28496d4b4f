#pragma once

#include "mavnav/controller.hpp"

#include <Eigen/Geometry>

#include <random>

namespace mavnav {

/// Simulated multirotor: a triple integrator whose acceleration follows the
/// attitude command through a first-order lag.
struct MavModel {
  FullState9 state;
  double attitude_lag = 0.15;       // s; 0 applies commands instantly
  double disturbance_sigma = 0.0;   // m/s^2 per tick
  std::mt19937_64 rng{0};

  /// Body orientation implied by the current horizontal acceleration.
  Eigen::Quaterniond orientation(double g = kGravity) const;
};

/// Advances the plant by dt. The horizontal acceleration relaxes toward
/// g*tan(command angle), the vertical velocity toward the climb rate; both
/// are integrated in closed form. Throws std::invalid_argument if dt <= 0.
MavModel mav_step(const MavModel& model, const AttitudeCommand& cmd, double dt,
                  double g = kGravity);

}  // namespace mavnav
