#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kinoplan/bench.hpp"
#include "kinoplan/ddpg.hpp"
#include "kinoplan/svg.hpp"

namespace py = pybind11;
using namespace kinoplan;

namespace {

RobotState make_state(RobotKind kind, double x, double y, double theta, double v0,
                      double v1) {
  RobotState s;
  s.kind = kind;
  s.x = x;
  s.y = y;
  s.theta = theta;
  s.vel = {v0, v1};
  return s;
}

py::dict plan_result_to_dict(const PlanResult& r) {
  py::dict d;
  d["success"] = r.success;
  d["planner"] = r.planner_name;
  d["iterations"] = r.stats.iterations;
  d["samples_drawn"] = r.stats.samples_drawn;
  d["pruned_count"] = r.stats.pruned_count;
  d["estimator_calls"] = r.stats.estimator_calls;
  d["tree_size"] = r.stats.tree_size;
  d["wall_seconds"] = r.stats.wall_seconds;
  if (r.success) {
    d["finish_time"] = r.plan.finish_time;
    py::list states;
    for (const auto& s : r.plan.states)
      states.append(py::make_tuple(s.x, s.y, s.theta, s.vel[0], s.vel[1]));
    d["states"] = states;
    py::list actions;
    for (const auto& a : r.plan.actions) actions.append(py::make_tuple(a.u[0], a.u[1]));
    d["actions"] = actions;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(kinoplan, m) {
  m.doc() = "kinodynamic planning toolkit: occupancy grids, robot dynamics, learned "
            "local planners, TTR estimation, RL-RRT and SST";

  py::enum_<RobotKind>(m, "RobotKind")
      .value("DiffDrive", RobotKind::DiffDrive)
      .value("Car", RobotKind::Car)
      .value("Asteroid", RobotKind::Asteroid);

  py::class_<OccupancyGrid>(m, "OccupancyGrid")
      .def_property_readonly("width_cells", &OccupancyGrid::width_cells)
      .def_property_readonly("height_cells", &OccupancyGrid::height_cells)
      .def_property_readonly("resolution", &OccupancyGrid::resolution)
      .def_property_readonly("width_m", &OccupancyGrid::width_m)
      .def_property_readonly("height_m", &OccupancyGrid::height_m)
      .def("occupied", &OccupancyGrid::occupied, py::arg("ix"), py::arg("iy"))
      .def("occupied_count", &OccupancyGrid::occupied_count)
      .def("free_count", &OccupancyGrid::free_count);

  m.def("load_map", &load_map, py::arg("path"));
  m.def(
      "point_free",
      [](const OccupancyGrid& g, double x, double y, double radius) {
        return point_free(g, {x, y}, radius);
      },
      py::arg("grid"), py::arg("x"), py::arg("y"), py::arg("robot_radius") = kRobotRadius);
  m.def(
      "raycast",
      [](const OccupancyGrid& g, double x, double y, double angle, double max_range) {
        return raycast(g, {x, y}, angle, max_range);
      },
      py::arg("grid"), py::arg("x"), py::arg("y"), py::arg("angle"), py::arg("max_range"));

  py::class_<LidarConfig>(m, "LidarConfig")
      .def(py::init<>())
      .def_readwrite("n_beams", &LidarConfig::n_beams)
      .def_readwrite("max_range", &LidarConfig::max_range)
      .def_readwrite("noise_sigma", &LidarConfig::noise_sigma)
      .def_readwrite("field_of_view", &LidarConfig::field_of_view);

  m.def(
      "lidar_scan",
      [](const OccupancyGrid& g, double x, double y, double heading, const LidarConfig& cfg,
         uint64_t seed) {
        Rng rng(seed);
        return lidar_scan(g, {x, y}, heading, cfg, rng);
      },
      py::arg("grid"), py::arg("x"), py::arg("y"), py::arg("heading"), py::arg("cfg"),
      py::arg("seed") = 0);

  py::class_<RobotState>(m, "RobotState")
      .def(py::init(&make_state), py::arg("kind"), py::arg("x"), py::arg("y"),
           py::arg("theta") = 0.0, py::arg("v0") = 0.0, py::arg("v1") = 0.0)
      .def_readwrite("kind", &RobotState::kind)
      .def_readwrite("x", &RobotState::x)
      .def_readwrite("y", &RobotState::y)
      .def_readwrite("theta", &RobotState::theta)
      .def_property(
          "vel", [](const RobotState& s) { return py::make_tuple(s.vel[0], s.vel[1]); },
          [](RobotState& s, std::pair<double, double> v) {
            s.vel = {v.first, v.second};
          });

  py::class_<RobotAction>(m, "RobotAction")
      .def(py::init([](RobotKind kind, double u0, double u1) {
             return RobotAction{kind, {u0, u1}};
           }),
           py::arg("kind"), py::arg("u0"), py::arg("u1"))
      .def_property_readonly(
          "u", [](const RobotAction& a) { return py::make_tuple(a.u[0], a.u[1]); });

  py::class_<DynamicsParams>(m, "DynamicsParams")
      .def(py::init<>())
      .def_readwrite("kappa", &DynamicsParams::kappa)
      .def_readwrite("wheelbase", &DynamicsParams::wheelbase)
      .def_readwrite("dt_integrate", &DynamicsParams::dt_integrate);

  m.def("clamp_action", &clamp_action, py::arg("raw"));
  m.def("propagate", &propagate, py::arg("state"), py::arg("action"), py::arg("duration"),
        py::arg("params") = DynamicsParams{});
  m.def("state_distance_euclidean", &state_distance_euclidean, py::arg("a"), py::arg("b"));

  py::class_<LocalPlannerPolicy>(m, "LocalPlannerPolicy")
      .def("robot_kind", &LocalPlannerPolicy::robot_kind)
      .def("kind_tag", &LocalPlannerPolicy::kind_tag);

  py::class_<DwaPolicy, LocalPlannerPolicy>(m, "DwaPolicy")
      .def(py::init([](const LidarConfig& lidar, bool enable_clearance) {
             return DwaPolicy(lidar, DwaConfig{}, enable_clearance);
           }),
           py::arg("lidar"), py::arg("enable_clearance") = true);

  py::class_<LearnedPolicy, LocalPlannerPolicy>(m, "LearnedPolicy");
  m.def("load_policy", &load_policy, py::arg("prefix"));

  m.def(
      "rollout",
      [](const LocalPlannerPolicy& policy, const OccupancyGrid& grid,
         const RobotState& start, double goal_x, double goal_y, double goal_radius,
         double max_time, uint64_t seed) {
        EpisodeConfig cfg;
        cfg.max_episode_time = max_time;
        cfg.goal_radius = goal_radius;
        Rng rng(seed);
        const RolloutResult r =
            rollout(policy, grid, start, {{goal_x, goal_y}, goal_radius}, cfg, rng);
        py::dict d;
        d["outcome"] = rollout_outcome_name(r.outcome);
        d["total_time"] = r.total_time;
        d["steps"] = r.steps.size();
        d["final"] = py::make_tuple(r.final_state.x, r.final_state.y);
        return d;
      },
      py::arg("policy"), py::arg("grid"), py::arg("start"), py::arg("goal_x"),
      py::arg("goal_y"), py::arg("goal_radius") = 0.5, py::arg("max_time") = 20.0,
      py::arg("seed") = 0);

  py::class_<TTRConfig>(m, "TTRConfig")
      .def(py::init<>())
      .def_readwrite("dt", &TTRConfig::dt)
      .def_readwrite("T_horizon", &TTRConfig::T_horizon)
      .def_readwrite("n_episodes", &TTRConfig::n_episodes)
      .def_readwrite("goal_sample_radius", &TTRConfig::goal_sample_radius)
      .def_readwrite("ttr_threshold", &TTRConfig::ttr_threshold);
  m.def("default_ttr_config", &default_ttr_config, py::arg("kind"));
  m.def("ttr_step_cost", &ttr_step_cost, py::arg("elapsed"), py::arg("collided"),
        py::arg("reached"), py::arg("cfg"));
  m.def("cumulative_future_cost", &cumulative_future_cost, py::arg("cost_history"));

  m.def(
      "collect_training_data",
      [](const LocalPlannerPolicy& policy, const OccupancyGrid& grid, const TTRConfig& cfg,
         uint64_t seed, const std::string& out_path) {
        Rng rng(seed);
        const TtrDataset ds = collect_training_data(policy, grid, cfg, rng);
        if (!out_path.empty()) save_dataset(ds, out_path);
        return py::make_tuple(ds.rows.size(), ds.n_episodes);
      },
      py::arg("policy"), py::arg("grid"), py::arg("cfg"), py::arg("seed") = 0,
      py::arg("out_path") = "");

  py::class_<ReachabilityEstimator>(m, "ReachabilityEstimator")
      .def_readonly("ttr_threshold", &ReachabilityEstimator::ttr_threshold);
  m.def("load_estimator", &load_estimator, py::arg("prefix"));
  m.def(
      "train_estimator_file",
      [](const std::string& dataset_path, const std::string& out_prefix,
         std::vector<int> hidden, int epochs, double lr, double dropout, uint64_t seed) {
        const TtrDataset ds = load_dataset(dataset_path);
        EstimatorTrainConfig cfg;
        cfg.base.learning_rate = lr;
        cfg.base.epochs = epochs;
        cfg.base.seed = seed;
        cfg.hidden = std::move(hidden);
        cfg.dropout_p = dropout;
        EstimatorReport report;
        const ReachabilityEstimator est = train_estimator(ds, cfg, &report);
        save_estimator(est, out_prefix);
        py::dict d;
        d["accuracy"] = report.heldout.accuracy();
        d["precision"] = report.heldout.precision();
        d["recall"] = report.heldout.recall();
        d["heldout_mse"] = report.heldout_mse;
        return d;
      },
      py::arg("dataset_path"), py::arg("out_prefix"), py::arg("hidden"),
      py::arg("epochs") = 40, py::arg("lr") = 1e-3, py::arg("dropout") = 0.2,
      py::arg("seed") = 1);

  m.def(
      "predict_ttr_for",
      [](const ReachabilityEstimator& est, const OccupancyGrid& grid,
         const RobotState& from, double goal_x, double goal_y, uint64_t seed) {
        Rng rng(seed);
        FrameStack stack;
        stack.push(lidar_scan(grid, from.position(), from.theta, est.lidar, rng));
        return predict_ttr(est, make_observation(from, {{goal_x, goal_y}, 0.5}, stack));
      },
      py::arg("estimator"), py::arg("grid"), py::arg("from_state"), py::arg("goal_x"),
      py::arg("goal_y"), py::arg("seed") = 0);

  m.def(
      "avg_ttr",
      [](const ReachabilityEstimator& est, const RobotState& from, const RobotState& to,
         const OccupancyGrid& grid, int n_samples, double half_width, uint64_t seed) {
        Rng rng(seed);
        return avg_ttr(est, from, to, grid, rng, n_samples, half_width);
      },
      py::arg("estimator"), py::arg("from_state"), py::arg("to_state"), py::arg("grid"),
      py::arg("n_samples") = 10, py::arg("half_width") = 0.3, py::arg("seed") = 0);

  py::class_<PlannerConfig>(m, "PlannerConfig")
      .def(py::init<>())
      .def_readwrite("p_goal_bias", &PlannerConfig::p_goal_bias)
      .def_readwrite("k_c", &PlannerConfig::k_c)
      .def_readwrite("p_prune", &PlannerConfig::p_prune)
      .def_readwrite("ttr_threshold", &PlannerConfig::ttr_threshold)
      .def_readwrite("dt_policy", &PlannerConfig::dt_policy)
      .def_readwrite("dt_tree", &PlannerConfig::dt_tree)
      .def_readwrite("t_max_extend", &PlannerConfig::t_max_extend)
      .def_readwrite("time_budget", &PlannerConfig::time_budget)
      .def_readwrite("max_iterations", &PlannerConfig::max_iterations)
      .def_readwrite("goal_radius", &PlannerConfig::goal_radius);

  py::class_<SstConfig>(m, "SstConfig")
      .def(py::init<>())
      .def_readwrite("delta_bn", &SstConfig::delta_bn)
      .def_readwrite("delta_s", &SstConfig::delta_s)
      .def_readwrite("t_prop_min", &SstConfig::t_prop_min)
      .def_readwrite("t_prop_max", &SstConfig::t_prop_max)
      .def_readwrite("time_budget", &SstConfig::time_budget)
      .def_readwrite("max_iterations", &SstConfig::max_iterations)
      .def_readwrite("goal_radius", &SstConfig::goal_radius);

  m.def(
      "rl_rrt",
      [](const OccupancyGrid& grid, const RobotState& root, double goal_x, double goal_y,
         const LocalPlannerPolicy& policy, const ReachabilityEstimator& est,
         const PlannerConfig& cfg, uint64_t seed) {
        Rng rng(seed);
        return plan_result_to_dict(
            rl_rrt(grid, root, {{goal_x, goal_y}, cfg.goal_radius}, policy, est, cfg, rng));
      },
      py::arg("grid"), py::arg("root"), py::arg("goal_x"), py::arg("goal_y"),
      py::arg("policy"), py::arg("estimator"), py::arg("cfg"), py::arg("seed") = 0);

  m.def(
      "rl_rrt_euclidean",
      [](const OccupancyGrid& grid, const RobotState& root, double goal_x, double goal_y,
         const LocalPlannerPolicy& policy, const PlannerConfig& cfg, uint64_t seed) {
        Rng rng(seed);
        return plan_result_to_dict(rl_rrt_euclidean(
            grid, root, {{goal_x, goal_y}, cfg.goal_radius}, policy, cfg, rng));
      },
      py::arg("grid"), py::arg("root"), py::arg("goal_x"), py::arg("goal_y"),
      py::arg("policy"), py::arg("cfg"), py::arg("seed") = 0);

  m.def(
      "sst_plan",
      [](const OccupancyGrid& grid, const RobotState& root, double goal_x, double goal_y,
         const SstConfig& cfg, uint64_t seed) {
        Rng rng(seed);
        return plan_result_to_dict(
            sst_plan(grid, root, {{goal_x, goal_y}, cfg.goal_radius}, cfg, rng));
      },
      py::arg("grid"), py::arg("root"), py::arg("goal_x"), py::arg("goal_y"),
      py::arg("cfg"), py::arg("seed") = 0);

  m.def(
      "rrt_steer_plan",
      [](const OccupancyGrid& grid, const RobotState& root, double goal_x, double goal_y,
         bool enable_clearance, const LidarConfig& lidar, const PlannerConfig& cfg,
         uint64_t seed) {
        Rng rng(seed);
        return plan_result_to_dict(rrt_steer_plan(
            grid, root, {{goal_x, goal_y}, cfg.goal_radius}, enable_clearance, lidar, cfg,
            rng));
      },
      py::arg("grid"), py::arg("root"), py::arg("goal_x"), py::arg("goal_y"),
      py::arg("enable_clearance"), py::arg("lidar"), py::arg("cfg"), py::arg("seed") = 0);

  m.def(
      "render_svg",
      [](const OccupancyGrid& grid, const std::string& out_path) {
        render_svg(grid, {}, {}, std::nullopt, std::nullopt, out_path);
      },
      py::arg("grid"), py::arg("out_path"));
}
