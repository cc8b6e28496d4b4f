#pragma once

#include "mavnav/dynamics.hpp"
#include "mavnav/lattice.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mavnav {

struct HeuristicEntry {
  double time = 0.0;     // seconds, a multiple of tau
  double control = 0.0;  // sum of u^2 tau along the optimal 1D sequence

  double cost(double rho) const { return rho * time + control; }
};

/// Optimal obstacle-free 1D costs indexed by signed distance to the goal
/// (goal minus position, in position quanta) and start velocity (in velocity
/// bins). The terminal set is the per-axis projection of the planner's goal
/// test, so each axis cost stays a lower bound on the 3D cost.
class Heuristic1DTable {
 public:
  static Heuristic1DTable build(const LatticeConfig& config);

  int max_distance_bin() const { return max_d_; }
  int max_velocity_bin() const { return max_v_; }
  double distance_step() const { return distance_step_; }
  double velocity_step() const { return velocity_step_; }
  double v_max() const { return v_max_; }

  /// nullopt outside the stored range or if the entry is unreachable.
  std::optional<HeuristicEntry> entry(int d_bin, int v_bin) const;

  /// "d_bin,v_bin,time,control_cost" lines after a header, ordered by d then v.
  std::string to_csv() const;

 private:
  std::size_t slot(int d_bin, int v_bin) const;

  int max_d_ = 0;
  int max_v_ = 0;
  double distance_step_ = 0.0;
  double velocity_step_ = 0.0;
  double v_max_ = 0.0;
  std::vector<std::optional<HeuristicEntry>> entries_;
};

/// Combined 3D estimate: the axis with the longest 1D time supplies both the
/// time and the control cost (larger control cost among tied axes).
double heuristic_estimate(const State6& s, const Vec3& goal, const Heuristic1DTable& table,
                          double rho);

/// Shortest decimal form that round-trips, always with a fractional part
/// ("0.0", "2.0", "0.25").
std::string format_decimal(double value);

}  // namespace mavnav
