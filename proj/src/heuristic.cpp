#include "mavnav/heuristic.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace mavnav {

std::string format_decimal(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(buf, res.ptr);
  if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
  return out;
}

Heuristic1DTable Heuristic1DTable::build(const LatticeConfig& config) {
  config.validate();
  Heuristic1DTable table;
  const double q = config.position_quantum();
  const double dv = config.velocity_step();
  table.distance_step_ = q;
  table.velocity_step_ = dv;
  table.v_max_ = config.v_max_lattice;
  table.max_v_ = config.max_velocity_bin();
  table.max_d_ = static_cast<int>(std::ceil(config.heuristic_extent / q - 1e-9));

  const int vb = table.max_v_;
  // Optimal sequences from the table's edge may overshoot; search a padded range.
  const int pad = 2 * (vb + 1) * (vb + 1) + 4;
  const int xb = table.max_d_ + pad;
  const int nx = 2 * xb + 1;
  const int nv = 2 * vb + 1;
  auto id = [&](int x, int m) { return static_cast<std::size_t>((x + xb) * nv + (m + vb)); };

  const int half = (config.accel_levels - 1) / 2;
  const double a_step = config.accel_step();
  const double pos_tol = config.goal_position_tolerance(config.coarsest_level()) + 1e-12;
  const double speed_tol = config.goal_speed_tolerance() + 1e-12;

  struct Best {
    double cost = std::numeric_limits<double>::infinity();
    double time = 0.0;
    double control = 0.0;
  };
  std::vector<Best> best(static_cast<std::size_t>(nx) * nv);
  using Item = std::tuple<double, double, double, int, int>;  // cost, time, control, x, m
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;

  for (int x = -xb; x <= xb; ++x) {
    for (int m = -vb; m <= vb; ++m) {
      if (std::abs(x) * q <= pos_tol && std::abs(m) * dv <= speed_tol) {
        best[id(x, m)] = Best{0.0, 0.0, 0.0};
        open.emplace(0.0, 0.0, 0.0, x, m);
      }
    }
  }

  // Backward Dijkstra. Forward step from (x, m) with control j moves the
  // position by (2m + j) quanta toward the goal and changes m by j.
  while (!open.empty()) {
    const auto [cost, time, control, x1, m1] = open.top();
    open.pop();
    const Best& cur = best[id(x1, m1)];
    if (cost != cur.cost || time != cur.time) continue;
    for (int j = -half; j <= half; ++j) {
      const int m0 = m1 - j;
      if (std::abs(m0) > vb) continue;
      const int x0 = x1 + 2 * m0 + j;
      if (std::abs(x0) > xb) continue;
      const double u = j * a_step;
      const double step_control = u * u * config.tau;
      const double c0 = cost + config.rho * config.tau + step_control;
      const double t0 = time + config.tau;
      Best& prev = best[id(x0, m0)];
      if (c0 < prev.cost || (c0 == prev.cost && t0 < prev.time)) {
        prev = Best{c0, t0, control + step_control};
        open.emplace(c0, t0, prev.control, x0, m0);
      }
    }
  }

  table.entries_.resize(static_cast<std::size_t>(2 * table.max_d_ + 1) * nv);
  for (int x = -table.max_d_; x <= table.max_d_; ++x) {
    for (int m = -vb; m <= vb; ++m) {
      const Best& b = best[id(x, m)];
      if (std::isfinite(b.cost)) table.entries_[table.slot(x, m)] = HeuristicEntry{b.time, b.control};
    }
  }
  return table;
}

std::size_t Heuristic1DTable::slot(int d_bin, int v_bin) const {
  return static_cast<std::size_t>((d_bin + max_d_) * (2 * max_v_ + 1) + (v_bin + max_v_));
}

std::optional<HeuristicEntry> Heuristic1DTable::entry(int d_bin, int v_bin) const {
  if (std::abs(d_bin) > max_d_ || std::abs(v_bin) > max_v_) return std::nullopt;
  return entries_[slot(d_bin, v_bin)];
}

std::string Heuristic1DTable::to_csv() const {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "d_bin,v_bin,time,control_cost\n");
  for (int d = -max_d_; d <= max_d_; ++d) {
    for (int v = -max_v_; v <= max_v_; ++v) {
      const auto& e = entries_[slot(d, v)];
      if (!e) continue;
      fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", d, v, format_decimal(e->time),
                     format_decimal(e->control));
    }
  }
  return fmt::to_string(buf);
}

namespace {

struct AxisEstimate {
  double time = 0.0;
  double control = 0.0;
};

// Candidate bins: the exact bin when the value sits on one, else both neighbours.
std::vector<int> neighbour_bins(double value) {
  const double r = std::round(value);
  if (std::abs(value - r) <= 1e-9) return {static_cast<int>(r)};
  return {static_cast<int>(std::floor(value)), static_cast<int>(std::ceil(value))};
}

AxisEstimate estimate_axis(double distance, double velocity, const Heuristic1DTable& table,
                           double rho) {
  const double d_units = distance / table.distance_step();
  const double v_units = velocity / table.velocity_step();
  double best_cost = std::numeric_limits<double>::infinity();
  AxisEstimate best;
  for (int d : neighbour_bins(d_units)) {
    double extra_time = 0.0;
    if (std::abs(d) > table.max_distance_bin()) {
      const int edge = d > 0 ? table.max_distance_bin() : -table.max_distance_bin();
      extra_time = (std::abs(distance) - table.max_distance_bin() * table.distance_step()) /
                   table.v_max();
      d = edge;
    }
    for (int v : neighbour_bins(v_units)) {
      v = std::clamp(v, -table.max_velocity_bin(), table.max_velocity_bin());
      const auto e = table.entry(d, v);
      if (!e) continue;
      const double t = e->time + std::max(0.0, extra_time);
      const double c = rho * t + e->control;
      if (c < best_cost) {
        best_cost = c;
        best = AxisEstimate{t, e->control};
      }
    }
  }
  return std::isfinite(best_cost) ? best : AxisEstimate{};
}

}  // namespace

double heuristic_estimate(const State6& s, const Vec3& goal, const Heuristic1DTable& table,
                          double rho) {
  AxisEstimate chosen;
  bool first = true;
  for (int i = 0; i < 3; ++i) {
    const AxisEstimate e = estimate_axis(goal[i] - s.p[i], s.v[i], table, rho);
    if (first || e.time > chosen.time || (e.time == chosen.time && e.control > chosen.control)) {
      chosen = e;
      first = false;
    }
  }
  return rho * chosen.time + chosen.control;
}

}  // namespace mavnav
