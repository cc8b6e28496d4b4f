#include "mavnav/state_filter.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace mavnav;

namespace {

constexpr double g = 9.81;

FilterState rest_state() { return initial_filter_state(Vec3::Zero(), Vec3::Zero(), 0.0, FilterConfig{}); }

}  // namespace

TEST_CASE("world_accel examples") {
  ImuSample hover;
  hover.accel_body = Vec3(0, 0, g);
  CHECK(world_accel(hover, g).norm() <= 1e-12);

  ImuSample push = hover;
  push.accel_body = Vec3(1, 0, g);
  CHECK((world_accel(push, g) - Vec3(1, 0, 0)).norm() <= 1e-12);

  // 90 degree pitch: body z points along world x.
  ImuSample pitched;
  pitched.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitY()));
  pitched.accel_body = Vec3(0, 0, g);
  const Vec3 expected = pitched.orientation.toRotationMatrix() * Vec3(0, 0, g) - Vec3(0, 0, g);
  CHECK((world_accel(pitched, g) - expected).norm() <= 1e-12);
  CHECK((world_accel(pitched, g) - Vec3(g, 0, -g)).norm() <= 1e-9);

  ImuSample bad;
  bad.orientation = Eigen::Quaterniond(2, 0, 0, 0);
  CHECK_THROWS_AS(world_accel(bad, g), std::invalid_argument);
}

TEST_CASE("predict examples") {
  const Mat6 q = white_jerk_noise(1.0, 0.02);
  const FilterState s0 = rest_state();
  const FilterState still = predict(s0, Vec3::Zero(), 0.02, q);
  CHECK(still.p == Vec3::Zero());
  CHECK(still.P.trace() > s0.P.trace());

  const FilterState moved = predict(s0, Vec3(1, 0, 0), 0.02, q);
  CHECK((moved.v - Vec3(0.02, 0, 0)).norm() <= 1e-15);
  CHECK((moved.p - Vec3(2e-4, 0, 0)).norm() <= 1e-15);
  CHECK(moved.stamp == doctest::Approx(0.02));

  FilterState s = s0;
  double trace = s.P.trace();
  bool increasing = true;
  for (int k = 0; k < 100; ++k) {
    s = predict(s, Vec3::Zero(), 0.02, q);
    increasing = increasing && s.P.trace() > trace;
    trace = s.P.trace();
  }
  CHECK(increasing);
  CHECK_THROWS_AS(predict(s0, Vec3::Zero(), 0.0, q), std::invalid_argument);
}

TEST_CASE("update_position examples") {
  FilterState s = predict(rest_state(), Vec3::Zero(), 0.02, white_jerk_noise(1.0, 0.02));
  PoseMeasurement z;
  z.position = s.p;
  z.stamp = 0.02;
  const FilterState u = update_position(s, z);
  CHECK(u.p == s.p);
  CHECK(u.v == s.v);
  CHECK(u.P.trace() < s.P.trace());

  PoseMeasurement target;
  target.position = Vec3(0.5, -0.2, 1.0);
  target.noise = Eigen::Matrix3d::Identity() * 1e-8;
  FilterState f = rest_state();
  int n = 0;
  for (; n < 50 && (f.p - target.position).norm() > 1e-3; ++n) {
    target.stamp = f.stamp + 0.1 * (n + 1);
    f = update_position(f, target);
  }
  CHECK((f.p - target.position).norm() <= 1e-3);
  CHECK(n <= 50);

  // Older measurements are rejected.
  PoseMeasurement old = target;
  old.stamp = 0.0;
  const FilterState r = update_position(f, old);
  CHECK(r.rejected_updates == f.rejected_updates + 1);
  CHECK(r.p == f.p);
}

TEST_CASE("noise-free filter reproduces the truth") {
  FilterConfig cfg;
  cfg.sigma_jerk = 0.0;
  FilterState f = initial_filter_state(Vec3(1, 1, 1), Vec3(0.5, 0, 0), 0.0, cfg);
  Vec3 p(1, 1, 1), v(0.5, 0, 0);
  const double dt = 0.02;
  for (int k = 1; k <= 500; ++k) {
    const Vec3 a(std::sin(k * dt), std::cos(k * dt), 0.1);
    ImuSample imu;
    imu.accel_body = a + Vec3(0, 0, g);
    imu.stamp = k * dt;
    f = predict_imu(f, imu, dt, cfg, g);
    p += v * dt + a * dt * dt / 2;
    v += a * dt;
    if (k % 5 == 0) {
      PoseMeasurement z;
      z.position = p;
      z.stamp = k * dt;
      z.noise = Eigen::Matrix3d::Identity() * 1e-12;
      f = update_position(f, z);
    }
  }
  CHECK((f.p - p).norm() <= 1e-6);
  CHECK((f.v - v).norm() <= 1e-6);
}

TEST_CASE("velocity converges from position updates") {
  FilterConfig cfg;
  FilterState f = initial_filter_state(Vec3::Zero(), Vec3::Zero(), 0.0, cfg);
  const Vec3 v_true(0.8, -0.4, 0.2);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.002);
  const double dt = 0.02;
  double worst_after_2s = 0.0;
  for (int k = 1; k <= 250; ++k) {
    ImuSample imu;
    imu.accel_body = Vec3(0, 0, g);
    imu.stamp = k * dt;
    f = predict_imu(f, imu, dt, cfg, g);
    if (k % 5 == 0) {
      PoseMeasurement z;
      z.position = v_true * (k * dt) + Vec3(noise(rng), noise(rng), noise(rng));
      z.stamp = k * dt;
      f = update_position(f, z);
    }
    if (k * dt >= 2.0) worst_after_2s = std::max(worst_after_2s, (f.v - v_true).norm());
  }
  CHECK(worst_after_2s <= 0.05);
}

TEST_CASE("orientation passes through and covariance stays valid") {
  FilterConfig cfg;
  FilterState f = initial_filter_state(Vec3::Zero(), Vec3::Zero(), 0.0, cfg);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ang(-0.3, 0.3);
  for (int k = 1; k <= 200; ++k) {
    ImuSample imu;
    imu.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(ang(rng), Vec3::UnitX()) *
                                         Eigen::AngleAxisd(ang(rng), Vec3::UnitY()));
    imu.accel_body = Vec3(0, 0, g);
    imu.stamp = k * 0.02;
    f = predict_imu(f, imu, 0.02, cfg, g);
    CHECK(f.orientation.coeffs() == imu.orientation.coeffs());
    if (k % 5 == 0) {
      PoseMeasurement z;
      z.stamp = imu.stamp;
      f = update_position(f, z);
    }
    const Eigen::SelfAdjointEigenSolver<Mat6> es(f.P);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
  }
}

TEST_CASE("condition_covariance symmetrizes and clips") {
  Mat6 p = Mat6::Identity();
  p(0, 1) = 0.1;
  p(1, 0) = 0.3;
  const Mat6 c = condition_covariance(p);
  CHECK(c(0, 1) == c(1, 0));
  CHECK(c(0, 1) == doctest::Approx(0.2));
}
