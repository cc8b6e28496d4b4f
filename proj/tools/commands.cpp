#include "commands.hpp"

#include "mavnav/heuristic.hpp"
#include "mavnav/mission.hpp"
#include "mavnav/planner.hpp"
#include "mavnav/scenario_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace mavnav::cli {

namespace {

namespace fs = std::filesystem;

struct ScenarioArgs {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
};

void add_scenario_flags(CLI::App* cmd, ScenarioArgs& a, bool scenario_required) {
  auto* opt = cmd->add_option("--scenario", a.scenario, "scenario file (JSON)");
  if (scenario_required) opt->required();
  cmd->add_option("--out", a.out, "output directory")->required();
  cmd->add_option("--seed", a.seed, "override the scenario seed");
  cmd->add_option("--mode", a.mode, "override the planner mode")
      ->check(CLI::IsMember({"uniform", "multires"}));
}

Scenario load_with_overrides(const ScenarioArgs& a) {
  Scenario sc = load_scenario(a.scenario);
  if (a.seed) sc.seed = *a.seed;
  if (a.mode) sc.planner.mode = lattice_mode_from(*a.mode);
  return sc;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
  return p;
}

int cmd_run(const ScenarioArgs& a, std::ostream& out) {
  const Scenario sc = load_with_overrides(a);
  const fs::path dir = prepare_out(a.out);
  const MissionReport rep = run_mission(sc);
  write_file(dir / "mission_log.csv", rep.log_csv());
  write_file(dir / "map.csv", rep.map_csv);
  write_file(dir / "replans.csv", rep.replans_csv());
  write_file(dir / "report.txt", rep.summary());
  out << rep.summary();
  return rep.success ? kOk : kMissionFailure;
}

std::string trajectory_csv(const PiecewiseTrajectory& traj) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "t,px,py,pz,vx,vy,vz\n");
  const auto n = static_cast<long>(std::floor(traj.duration() / kControlDt + 1e-9));
  auto row = [&](double t) {
    const State6 s = traj.state_at(t);
    fmt::format_to(std::back_inserter(buf), "{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n",
                   t, s.p.x(), s.p.y(), s.p.z(), s.v.x(), s.v.y(), s.v.z());
  };
  for (long k = 0; k <= n; ++k) row(traj.start_time() + static_cast<double>(k) * kControlDt);
  if (traj.start_time() + static_cast<double>(n) * kControlDt < traj.end_time() - 1e-9) {
    row(traj.end_time());
  }
  return fmt::to_string(buf);
}

int cmd_plan(const ScenarioArgs& a, std::ostream& out, std::ostream& err) {
  const Scenario sc = load_with_overrides(a);
  const fs::path dir = prepare_out(a.out);

  // Map from one scan taken at the start pose before take-off.
  VoxelGrid grid = VoxelGrid::covering(sc.map.bounds, sc.map.voxel);
  std::seed_seq seq{static_cast<std::uint32_t>(sc.seed), static_cast<std::uint32_t>(sc.seed >> 32),
                    1u};
  std::mt19937_64 rng(seq);
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  pose.translate(sc.mav.start);
  grid.integrate_scan(pose, cast_scan(pose, sc.world, sc.sensor, 0.0, &rng), 0);
  write_file(dir / "map.csv", grid.export_csv());

  const Heuristic1DTable table = Heuristic1DTable::build(sc.planner);
  PlanRequest req;
  req.start = State6{sc.mav.start, Vec3::Zero()};
  req.goal = sc.goals.front().position;
  req.map = grid.snapshot(0.0);
  req.config = sc.planner;
  req.table = &table;
  const PlanResult r = plan(req);
  if (!r.ok()) {
    fmt::print(err, "no path to goal: {} after expanding {} nodes\n", r.message, r.expanded);
    out << fmt::format("status=no_path\nexpanded={}\n", r.expanded);
    return kMissionFailure;
  }
  write_file(dir / "trajectory.csv", trajectory_csv(r.trajectory));

  double clearance = std::numeric_limits<double>::infinity();
  for (double t = 0.0; t <= r.trajectory.duration() + 1e-9; t += 0.01) {
    const auto n = req.map.obstacles->nearest(r.trajectory.state_at(std::min(t, r.trajectory.duration())).p);
    clearance = std::min(clearance, n.distance);
  }
  out << fmt::format(
      "status=ok\nexpanded={}\ncost={:.6f}\nduration={:.3f}\nwall_time={:.4f}\n"
      "min_clearance={:.4f}\nmode={}\n",
      r.expanded, r.cost, r.trajectory.duration(), r.wall_time, clearance,
      to_string(sc.planner.mode));
  return kOk;
}

int cmd_heuristic_build(const ScenarioArgs& a, std::ostream& out) {
  LatticeConfig config;
  if (!a.scenario.empty()) config = load_with_overrides(a).planner;
  config.validate();
  const fs::path dir = prepare_out(a.out);
  const Heuristic1DTable table = Heuristic1DTable::build(config);
  write_file(dir / "heuristic.csv", table.to_csv());
  out << fmt::format("wrote {} (d_bin range +-{}, v_bin range +-{})\n",
                     (dir / "heuristic.csv").string(), table.max_distance_bin(),
                     table.max_velocity_bin());
  return kOk;
}

int cmd_heuristic_inspect(const std::string& path, int d_bin, int v_bin, std::ostream& out,
                          std::ostream& err) {
  std::ifstream f(path);
  if (!f) {
    fmt::print(err, "cannot read heuristic table {}\n", path);
    return kInputError;
  }
  std::string line;
  if (!std::getline(f, line) || line != "d_bin,v_bin,time,control_cost") {
    fmt::print(err, "{}: not a heuristic table\n", path);
    return kInputError;
  }
  int max_d = 0;
  int max_v = 0;
  std::optional<std::string> found;
  while (std::getline(f, line)) {
    std::istringstream ss(line);
    std::string d_s, v_s;
    if (!std::getline(ss, d_s, ',') || !std::getline(ss, v_s, ',')) continue;
    const int d = std::stoi(d_s);
    const int v = std::stoi(v_s);
    max_d = std::max(max_d, std::abs(d));
    max_v = std::max(max_v, std::abs(v));
    if (d == d_bin && v == v_bin) found = line;
  }
  if (std::abs(d_bin) > max_d || std::abs(v_bin) > max_v) {
    fmt::print(err, "bin ({}, {}) out of range: d_bin in [-{}, {}], v_bin in [-{}, {}]\n", d_bin,
               v_bin, max_d, max_d, max_v, max_v);
    return kInputError;
  }
  if (!found) {
    fmt::print(err, "bin ({}, {}) has no entry (goal unreachable from it)\n", d_bin, v_bin);
    return kInputError;
  }
  out << *found << "\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kinodynamic MAV navigation simulator", "mavnav"};
  app.require_subcommand(1);

  ScenarioArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "run a closed-loop mission");
  add_scenario_flags(run_cmd, run_args, true);

  ScenarioArgs plan_args;
  auto* plan_cmd = app.add_subcommand("plan", "one-shot plan to the first goal");
  add_scenario_flags(plan_cmd, plan_args, true);

  auto* heur = app.add_subcommand("heuristic", "1D heuristic table tools");
  heur->require_subcommand(1);
  ScenarioArgs build_args;
  auto* build_cmd = heur->add_subcommand("build", "write heuristic.csv");
  add_scenario_flags(build_cmd, build_args, false);
  std::string table_path;
  int d_bin = 0;
  int v_bin = 0;
  auto* inspect_cmd = heur->add_subcommand("inspect", "print one table entry");
  inspect_cmd->add_option("--table", table_path, "heuristic.csv path")->required();
  inspect_cmd->add_option("--d-bin", d_bin, "distance bin")->required();
  inspect_cmd->add_option("--v-bin", v_bin, "velocity bin")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kInputError;
  }

  try {
    if (*run_cmd) return cmd_run(run_args, out);
    if (*plan_cmd) return cmd_plan(plan_args, out, err);
    if (*build_cmd) return cmd_heuristic_build(build_args, out);
    if (*inspect_cmd) return cmd_heuristic_inspect(table_path, d_bin, v_bin, out, err);
  } catch (const ScenarioError& e) {
    err << "scenario error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace mavnav::cli
