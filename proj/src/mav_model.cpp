#include "mavnav/mav_model.hpp"

#include <cmath>
#include <stdexcept>

namespace mavnav {

Eigen::Quaterniond MavModel::orientation(double g) const {
  const double pitch = std::atan2(state.a.x(), g);
  const double roll = std::atan2(state.a.y(), g);
  return Eigen::Quaterniond(Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                            Eigen::AngleAxisd(-roll, Vec3::UnitX()));
}

MavModel mav_step(const MavModel& model, const AttitudeCommand& cmd, double dt, double g) {
  if (!(dt > 0.0)) throw std::invalid_argument("mav_step: dt must be > 0");
  MavModel out = model;
  const FullState9& s = model.state;
  FullState9& n = out.state;
  const double tau = model.attitude_lag;
  // With tau = 0 the lag terms vanish: decay = 0 and tau * (1 - decay) = 0.
  const double decay = tau > 0.0 ? std::exp(-dt / tau) : 0.0;
  const double lag_v = tau * (1.0 - decay);

  const double target[2] = {g * std::tan(cmd.pitch), g * std::tan(cmd.roll)};
  for (int i = 0; i < 2; ++i) {
    const double da = s.a[i] - target[i];
    n.a[i] = target[i] + da * decay;
    n.v[i] = s.v[i] + target[i] * dt + da * lag_v;
    n.p[i] = s.p[i] + s.v[i] * dt + target[i] * dt * dt / 2.0 + da * tau * (dt - lag_v);
  }
  const double dv = s.v.z() - cmd.climb_rate;
  n.v.z() = cmd.climb_rate + dv * decay;
  n.p.z() = s.p.z() + cmd.climb_rate * dt + dv * lag_v;
  n.a.z() = tau > 0.0 ? -dv * decay / tau : 0.0;

  if (model.disturbance_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, model.disturbance_sigma);
    for (int i = 0; i < 3; ++i) {
      const double d = noise(out.rng);
      n.v[i] += d * dt;
      n.p[i] += d * dt * dt / 2.0;
    }
  }
  return out;
}

}  // namespace mavnav
