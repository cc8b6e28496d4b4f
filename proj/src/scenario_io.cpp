#include "mavnav/scenario_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace mavnav {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

// Reads the keys of one JSON object and remembers which were consumed, so
// that leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string name) : node_(node), name_(std::move(name)) {
    if (!node_.is_object()) throw ScenarioError(name_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ScenarioError(path(key) + ": wrong type");
    }
  }

  void vec(const char* key, Vec3& out) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end()) return;
    out = to_vec(*it, path(key));
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) throw ScenarioError(path(item.key()) + ": unknown key");
    }
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  static Vec3 to_vec(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ScenarioError(where + ": expected [x, y, z]");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
      if (!j[i].is_number()) throw ScenarioError(where + ": expected numbers");
      v[i] = j[i].get<double>();
    }
    return v;
  }

 private:
  const json& node_;
  std::string name_;
  std::set<std::string> seen_;
};

const json& array_at(const json* node, const std::string& where) {
  if (!node->is_array()) throw ScenarioError(where + ": expected an array");
  return *node;
}

ordered vec_json(const Vec3& v) { return ordered::array({v.x(), v.y(), v.z()}); }

const char* rule_name(OccupancyRule rule) {
  return rule == OccupancyRule::kHitsAtLeastMisses ? "hits_at_least_misses"
                                                   : "hits_exceed_misses";
}

}  // namespace

const char* to_string(LatticeMode mode) {
  return mode == LatticeMode::kUniform ? "uniform" : "multires";
}

LatticeMode lattice_mode_from(const std::string& name) {
  if (name == "uniform") return LatticeMode::kUniform;
  if (name == "multires") return LatticeMode::kMultiresolution;
  throw ScenarioError("planner.mode: expected \"uniform\" or \"multires\", got \"" + name + "\"");
}

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario: not valid JSON (") + e.what() + ")");
  }
  Scenario sc;
  Section top(root, "scenario");
  top.get("seed", sc.seed);

  if (const json* w = top.child("world")) {
    Section s(*w, "world");
    if (const json* boxes = s.child("static_boxes")) {
      const json& arr = array_at(boxes, "world.static_boxes");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section b(arr[i], "world.static_boxes[" + std::to_string(i) + "]");
        Box box;
        b.vec("min", box.min);
        b.vec("max", box.max);
        b.finish();
        sc.world.static_boxes.push_back(box);
      }
    }
    if (const json* boxes = s.child("dynamic_boxes")) {
      const json& arr = array_at(boxes, "world.dynamic_boxes");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = "world.dynamic_boxes[" + std::to_string(i) + "]";
        Section b(arr[i], where);
        DynamicBox box;
        b.vec("size", box.size);
        if (const json* sched = b.child("schedule")) {
          const json& knots = array_at(sched, where + ".schedule");
          for (std::size_t k = 0; k < knots.size(); ++k) {
            Section kn(knots[k], where + ".schedule[" + std::to_string(k) + "]");
            ScheduleKnot knot;
            kn.get("time", knot.time);
            kn.vec("center", knot.center);
            kn.finish();
            box.schedule.push_back(knot);
          }
        }
        b.finish();
        sc.world.dynamic_boxes.push_back(box);
      }
    }
    s.finish();
  }

  if (const json* m = top.child("map")) {
    Section s(*m, "map");
    s.vec("min", sc.map.bounds.min);
    s.vec("max", sc.map.bounds.max);
    s.get("resolution", sc.map.voxel.resolution);
    s.get("scan_window", sc.map.voxel.scan_window);
    std::string rule = rule_name(sc.map.voxel.rule);
    s.get("occupancy_rule", rule);
    if (rule == "hits_at_least_misses") {
      sc.map.voxel.rule = OccupancyRule::kHitsAtLeastMisses;
    } else if (rule == "hits_exceed_misses") {
      sc.map.voxel.rule = OccupancyRule::kHitsExceedMisses;
    } else {
      throw ScenarioError("map.occupancy_rule: unknown rule \"" + rule + "\"");
    }
    s.finish();
  }

  if (const json* m = top.child("mav")) {
    Section s(*m, "mav");
    s.vec("start", sc.mav.start);
    s.vec("v_min", sc.mav.limits.v_min);
    s.vec("v_max", sc.mav.limits.v_max);
    s.vec("a_min", sc.mav.limits.a_min);
    s.vec("a_max", sc.mav.limits.a_max);
    s.vec("j_min", sc.mav.limits.j_min);
    s.vec("j_max", sc.mav.limits.j_max);
    s.get("attitude_lag", sc.mav.attitude_lag);
    s.get("disturbance_sigma", sc.mav.disturbance_sigma);
    s.finish();
  }

  if (const json* m = top.child("sensor")) {
    Section s(*m, "sensor");
    auto& o = sc.sensor;
    s.get("azimuth_rays", o.azimuth_rays);
    s.get("elevation_rays", o.elevation_rays);
    s.get("vertical_fov_deg", o.vertical_fov_deg);
    s.get("max_range", o.max_range);
    s.get("range_sigma", o.range_sigma);
    s.get("pose_sigma", o.pose_sigma);
    s.get("drift_rate", o.drift_rate);
    s.get("imu_sigma", o.imu_sigma);
    s.finish();
  }

  if (const json* m = top.child("planner")) {
    Section s(*m, "planner");
    auto& o = sc.planner;
    s.get("tau", o.tau);
    s.get("accel_levels", o.accel_levels);
    s.get("a_max", o.a_max);
    s.get("rho", o.rho);
    s.get("d_min", o.d_min);
    s.get("d_max", o.d_max);
    s.get("obstacle_weight", o.obstacle_weight);
    s.get("invalid_penalty", o.invalid_penalty);
    s.get("v_max", o.v_max_lattice);
    std::string mode = to_string(o.mode);
    s.get("mode", mode);
    o.mode = lattice_mode_from(mode);
    s.get("base_resolution", o.base_resolution);
    s.get("levels", o.levels);
    s.get("level_extent", o.level_extent);
    s.get("level_growth", o.level_growth);
    s.get("goal_pos_tol", o.goal_pos_tol);
    s.get("goal_speed_tol", o.goal_speed_tol);
    s.get("collision_sample_step", o.collision_sample_step);
    s.get("min_collision_samples", o.min_collision_samples);
    s.get("max_expansions", o.max_expansions);
    s.get("heuristic_extent", o.heuristic_extent);
    s.get("heuristic_weight", o.heuristic_weight);
    s.finish();
  }

  if (const json* m = top.child("tracker")) {
    Section s(*m, "tracker");
    auto& o = sc.tracker;
    s.get("t0", o.t0);
    s.get("dt_sample", o.dt_sample);
    s.get("publish_rate", o.publish_rate);
    s.get("d_tracking", o.d_tracking);
    s.get("d_replan", o.d_replan);
    s.finish();
  }

  if (const json* m = top.child("filter")) {
    Section s(*m, "filter");
    auto& o = sc.filter;
    s.get("sigma_jerk", o.sigma_jerk);
    s.get("sigma_position", o.sigma_position);
    s.get("initial_sigma_position", o.initial_sigma_position);
    s.get("initial_sigma_velocity", o.initial_sigma_velocity);
    s.finish();
  }

  if (const json* m = top.child("mission")) {
    Section s(*m, "mission");
    s.get("t_plan", sc.mission.t_plan);
    s.get("max_time", sc.mission.max_time);
    s.get("failure_budget", sc.mission.failure_budget);
    s.finish();
  }

  if (const json* g = top.child("goals")) {
    const json& arr = array_at(g, "goals");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section s(arr[i], "goals[" + std::to_string(i) + "]");
      GoalSpec goal;
      s.vec("position", goal.position);
      s.get("tolerance", goal.tolerance);
      s.get("speed_tolerance", goal.speed_tolerance);
      s.get("hold", goal.hold);
      s.finish();
      sc.goals.push_back(goal);
    }
  }
  top.finish();

  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string dump_scenario(const Scenario& sc) {
  ordered root;
  root["seed"] = sc.seed;

  ordered world;
  world["static_boxes"] = ordered::array();
  for (const auto& b : sc.world.static_boxes) {
    world["static_boxes"].push_back({{"min", vec_json(b.min)}, {"max", vec_json(b.max)}});
  }
  world["dynamic_boxes"] = ordered::array();
  for (const auto& d : sc.world.dynamic_boxes) {
    ordered box;
    box["size"] = vec_json(d.size);
    box["schedule"] = ordered::array();
    for (const auto& k : d.schedule) {
      box["schedule"].push_back({{"time", k.time}, {"center", vec_json(k.center)}});
    }
    world["dynamic_boxes"].push_back(box);
  }
  root["world"] = world;

  root["map"] = {{"min", vec_json(sc.map.bounds.min)},
                 {"max", vec_json(sc.map.bounds.max)},
                 {"resolution", sc.map.voxel.resolution},
                 {"scan_window", sc.map.voxel.scan_window},
                 {"occupancy_rule", rule_name(sc.map.voxel.rule)}};

  const Limits& l = sc.mav.limits;
  root["mav"] = {{"start", vec_json(sc.mav.start)},  {"v_min", vec_json(l.v_min)},
                 {"v_max", vec_json(l.v_max)},       {"a_min", vec_json(l.a_min)},
                 {"a_max", vec_json(l.a_max)},       {"j_min", vec_json(l.j_min)},
                 {"j_max", vec_json(l.j_max)},       {"attitude_lag", sc.mav.attitude_lag},
                 {"disturbance_sigma", sc.mav.disturbance_sigma}};

  const SensorModel& se = sc.sensor;
  root["sensor"] = {{"azimuth_rays", se.azimuth_rays},
                    {"elevation_rays", se.elevation_rays},
                    {"vertical_fov_deg", se.vertical_fov_deg},
                    {"max_range", se.max_range},
                    {"range_sigma", se.range_sigma},
                    {"pose_sigma", se.pose_sigma},
                    {"drift_rate", se.drift_rate},
                    {"imu_sigma", se.imu_sigma}};

  const LatticeConfig& p = sc.planner;
  root["planner"] = {{"tau", p.tau},
                     {"accel_levels", p.accel_levels},
                     {"a_max", p.a_max},
                     {"rho", p.rho},
                     {"d_min", p.d_min},
                     {"d_max", p.d_max},
                     {"obstacle_weight", p.obstacle_weight},
                     {"invalid_penalty", p.invalid_penalty},
                     {"v_max", p.v_max_lattice},
                     {"mode", to_string(p.mode)},
                     {"base_resolution", p.base_resolution},
                     {"levels", p.levels},
                     {"level_extent", p.level_extent},
                     {"level_growth", p.level_growth},
                     {"goal_pos_tol", p.goal_pos_tol},
                     {"goal_speed_tol", p.goal_speed_tol},
                     {"collision_sample_step", p.collision_sample_step},
                     {"min_collision_samples", p.min_collision_samples},
                     {"max_expansions", p.max_expansions},
                     {"heuristic_extent", p.heuristic_extent},
                     {"heuristic_weight", p.heuristic_weight}};

  const TrackerConfig& t = sc.tracker;
  root["tracker"] = {{"t0", t.t0},
                     {"dt_sample", t.dt_sample},
                     {"publish_rate", t.publish_rate},
                     {"d_tracking", t.d_tracking},
                     {"d_replan", t.d_replan}};

  const FilterConfig& f = sc.filter;
  root["filter"] = {{"sigma_jerk", f.sigma_jerk},
                    {"sigma_position", f.sigma_position},
                    {"initial_sigma_position", f.initial_sigma_position},
                    {"initial_sigma_velocity", f.initial_sigma_velocity}};

  root["mission"] = {{"t_plan", sc.mission.t_plan},
                     {"max_time", sc.mission.max_time},
                     {"failure_budget", sc.mission.failure_budget}};

  root["goals"] = ordered::array();
  for (const auto& g : sc.goals) {
    root["goals"].push_back({{"position", vec_json(g.position)},
                             {"tolerance", g.tolerance},
                             {"speed_tolerance", g.speed_tolerance},
                             {"hold", g.hold}});
  }
  return root.dump(2) + "\n";
}

}  // namespace mavnav
