#include "mavnav/planner.hpp"

#include <chrono>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace mavnav {

namespace {

struct SearchNode {
  LatticeNode node;
  double g = 0.0;
  double h = 0.0;
  int parent = -1;
  MotionPrimitive primitive;  // edge from parent
  bool closed = false;
};

// Ordered by f, then h, then insertion sequence.
using OpenItem = std::tuple<double, double, std::uint64_t, int>;

}  // namespace

PlanResult plan(const PlanRequest& request) {
  const auto t_begin = std::chrono::steady_clock::now();
  request.config.validate();
  if (!request.map.bounds.contains(request.start.p)) {
    throw std::invalid_argument("plan: start position outside the map");
  }
  if (!request.map.bounds.contains(request.goal)) {
    throw std::invalid_argument("plan: goal outside the map");
  }
  if (request.heuristic == HeuristicMode::kTable && request.table == nullptr) {
    throw std::invalid_argument("plan: heuristic table missing");
  }

  const StateLattice lattice(request.config, request.map, request.start);
  const double rho = request.config.rho;
  auto heuristic = [&](const State6& s) {
    if (request.heuristic == HeuristicMode::kZero) return 0.0;
    return request.config.heuristic_weight *
           heuristic_estimate(s, request.goal, *request.table, rho);
  };

  PlanResult result;
  result.trajectory = PiecewiseTrajectory(request.start_time, request.start);

  std::vector<SearchNode> nodes;
  std::unordered_map<LatticeKey, int, LatticeKeyHash> index;
  std::priority_queue<OpenItem, std::vector<OpenItem>, std::greater<>> open;
  std::uint64_t seq = 0;

  SearchNode root;
  root.node = lattice.node_for(request.start);
  root.h = heuristic(request.start);
  nodes.push_back(root);
  index.emplace(root.node.key, 0);
  open.emplace(root.h, root.h, seq++, 0);

  int goal_id = -1;
  while (!open.empty()) {
    const auto [f, h, s, id] = open.top();
    open.pop();
    SearchNode& cur = nodes[id];
    if (cur.closed || f != cur.g + cur.h) continue;  // stale entry
    if (lattice.is_goal(cur.node.state, request.goal)) {
      goal_id = id;
      break;
    }
    cur.closed = true;
    if (++result.expanded > request.config.max_expansions) break;

    const LatticeNode parent_node = cur.node;
    const double parent_g = cur.g;
    for (auto& succ : lattice.successors(parent_node)) {
      const double g = parent_g + succ.cost;
      const auto it = index.find(succ.node.key);
      if (it == index.end()) {
        SearchNode n;
        n.node = succ.node;
        n.g = g;
        n.h = heuristic(succ.node.state);
        n.parent = id;
        n.primitive = succ.primitive;
        const int nid = static_cast<int>(nodes.size());
        nodes.push_back(std::move(n));
        index.emplace(succ.node.key, nid);
        open.emplace(g + nodes[nid].h, nodes[nid].h, seq++, nid);
      } else {
        SearchNode& n = nodes[it->second];
        if (g >= n.g) continue;
        // An expanded node keeps its representative state: its children were
        // generated from it and must stay continuous.
        if (n.closed && !(n.node.state == succ.node.state)) continue;
        // Cheaper route to a merged lattice state: adopt it and reopen.
        n.node = succ.node;
        n.g = g;
        n.h = heuristic(succ.node.state);
        n.parent = id;
        n.primitive = succ.primitive;
        n.closed = false;
        open.emplace(g + n.h, n.h, seq++, it->second);
      }
    }
  }

  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  if (goal_id < 0) {
    result.status = PlanStatus::kNoPath;
    result.message = result.expanded > request.config.max_expansions
                         ? "expansion budget exhausted"
                         : "open set exhausted";
    return result;
  }

  std::vector<MotionPrimitive> chain;
  for (int id = goal_id; nodes[id].parent >= 0; id = nodes[id].parent) {
    chain.push_back(nodes[id].primitive);
  }
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) result.trajectory.append(*it);
  result.cost = nodes[goal_id].g;
  result.status = PlanStatus::kSuccess;
  return result;
}

ReplanResult replan(const PiecewiseTrajectory& current, double waypoint_time, double t_plan,
                    const MapSnapshot& map, const Vec3& goal, const LatticeConfig& config,
                    const Heuristic1DTable& table) {
  ReplanResult out;
  out.replan_time = std::min(waypoint_time + t_plan, current.end_time());
  PiecewiseTrajectory prefix = current.prefix_until(out.replan_time);
  out.replan_state = prefix.end_state();

  PlanRequest request;
  request.start = out.replan_state;
  request.start_time = prefix.end_time();
  request.goal = goal;
  request.map = map;
  request.config = config;
  request.table = &table;
  try {
    out.plan = plan(request);
  } catch (const std::invalid_argument& e) {
    out.plan.status = PlanStatus::kNoPath;
    out.plan.message = e.what();
  }
  if (!out.plan.ok()) {
    out.failed = true;
    out.trajectory = current;
    return out;
  }
  for (const auto& seg : out.plan.trajectory.segments()) prefix.append(seg);
  out.trajectory = std::move(prefix);
  return out;
}

bool trajectory_clear(const PiecewiseTrajectory& traj, double from, const ObstacleIndex& obstacles,
                      const LatticeConfig& config) {
  double begin = traj.start_time();
  for (const auto& seg : traj.segments()) {
    const double end = begin + seg.tau;
    if (end > from) {
      MotionPrimitive rest = seg;
      if (from > begin) {
        rest.s0 = eval_primitive(seg, from - begin);
        rest.tau = end - from;
      }
      for (double t : collision_sample_times(rest, config)) {
        if (obstacles.nearest(eval_primitive(rest, t).p).distance < config.d_min) return false;
      }
    }
    begin = end;
  }
  return true;
}

}  // namespace mavnav
