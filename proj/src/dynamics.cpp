#include "mavnav/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mavnav {

void Limits::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(v_min[i] < 0.0 && v_max[i] > 0.0 && a_min[i] < 0.0 && a_max[i] > 0.0 &&
          j_min[i] < 0.0 && j_max[i] > 0.0)) {
      throw std::invalid_argument("limits: every min must be < 0 < max (axis " +
                                  std::to_string(i) + ")");
    }
  }
}

State6 eval_primitive(const MotionPrimitive& prim, double t) {
  if (!(t >= 0.0 && t <= prim.tau)) {
    throw std::out_of_range("eval_primitive: t=" + std::to_string(t) + " outside [0, " +
                            std::to_string(prim.tau) + "]");
  }
  State6 s;
  s.p = prim.s0.p + t * prim.s0.v + (t * t / 2.0) * prim.u;
  s.v = prim.s0.v + t * prim.u;
  return s;
}

double primitive_cost(const MotionPrimitive& prim, double rho) {
  return prim.u.squaredNorm() * prim.tau + rho * prim.tau;
}

PiecewiseTrajectory::PiecewiseTrajectory(double start_time, State6 start_state)
    : start_time_(start_time), start_state_(std::move(start_state)) {}

double PiecewiseTrajectory::duration() const {
  double d = 0.0;
  for (const auto& s : segments_) d += s.tau;
  return d;
}

State6 PiecewiseTrajectory::end_state() const {
  if (segments_.empty()) return start_state_;
  const auto& last = segments_.back();
  return eval_primitive(last, last.tau);
}

void PiecewiseTrajectory::append(const MotionPrimitive& segment) {
  if (!(segment.tau > 0.0)) {
    throw std::invalid_argument("append: segment duration must be positive");
  }
  const State6 end = end_state();
  const double gap = std::max((end.p - segment.s0.p).cwiseAbs().maxCoeff(),
                              (end.v - segment.s0.v).cwiseAbs().maxCoeff());
  if (!(gap <= kJunctionTolerance)) {
    throw std::invalid_argument("append: segment breaks continuity (gap " + std::to_string(gap) +
                                ")");
  }
  segments_.push_back(segment);
}

std::pair<std::size_t, double> PiecewiseTrajectory::locate(double t) const {
  // Segment boundaries are cumulative sums from start_time_; a boundary time
  // belongs to the earlier segment.
  double seg_start = start_time_;
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    const double seg_end = seg_start + segments_[i].tau;
    if (t <= seg_end) return {i, seg_start};
    seg_start = seg_end;
  }
  return {segments_.size() - 1, seg_start};
}

State6 PiecewiseTrajectory::state_at(double t) const {
  const double end = end_time();
  if (!(t >= start_time_ - kJunctionTolerance && t <= end + kJunctionTolerance)) {
    throw std::out_of_range("trajectory: t=" + std::to_string(t) + " outside [" +
                            std::to_string(start_time_) + ", " + std::to_string(end) + "]");
  }
  if (segments_.empty()) return start_state_;
  const auto [idx, seg_start] = locate(t);
  const auto& seg = segments_[idx];
  const double local = std::clamp(t - seg_start, 0.0, seg.tau);
  return eval_primitive(seg, local);
}

PiecewiseTrajectory PiecewiseTrajectory::prefix_until(double t) const {
  PiecewiseTrajectory out(start_time_, start_state_);
  if (segments_.empty() || t <= start_time_) return out;
  if (t >= end_time()) {
    out.segments_ = segments_;
    return out;
  }
  const auto [idx, seg_start] = locate(t);
  out.segments_.assign(segments_.begin(), segments_.begin() + static_cast<std::ptrdiff_t>(idx));
  const double local = t - seg_start;
  if (local > 0.0) {
    MotionPrimitive cut = segments_[idx];
    cut.tau = std::min(local, cut.tau);
    out.segments_.push_back(cut);
  }
  return out;
}

double PiecewiseTrajectory::max_junction_gap() const {
  double worst = 0.0;
  State6 prev_end = start_state_;
  for (const auto& seg : segments_) {
    const double gap = std::max((prev_end.p - seg.s0.p).cwiseAbs().maxCoeff(),
                                (prev_end.v - seg.s0.v).cwiseAbs().maxCoeff());
    worst = std::max(worst, gap);
    prev_end = eval_primitive(seg, seg.tau);
  }
  return worst;
}

}  // namespace mavnav
