#include "kinoplan/planner.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace kinoplan {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

MotionPlan extract_plan(const Tree& tree, int goal_node, double dt_policy) {
  std::vector<int> chain;
  for (int id = goal_node; id != -1; id = tree.node(id).parent) chain.push_back(id);
  std::reverse(chain.begin(), chain.end());

  MotionPlan plan;
  for (int id : chain) {
    const Node& n = tree.node(id);
    plan.states.push_back(n.state);
    plan.times.push_back(n.arrival_time);
    plan.actions.insert(plan.actions.end(), n.action_log.begin(), n.action_log.end());
  }
  plan.finish_time = static_cast<double>(plan.actions.size()) * dt_policy;
  return plan;
}

}  // namespace

AvgTtrFn make_estimator_avg_ttr(const ReachabilityEstimator& est, const OccupancyGrid& grid,
                                int n_samples, double half_width) {
  return [&est, &grid, n_samples, half_width](const RobotState& from, const RobotState& to,
                                              Rng& rng) {
    return avg_ttr(est, from, to, grid, rng, n_samples, half_width);
  };
}

std::pair<int, double> select_nearest_hierarchical(const Tree& tree, const RobotState& x_rnd,
                                                   const AvgTtrFn& ttr, int k_c, Rng& rng) {
  if (tree.size() == 0)
    throw std::invalid_argument("select_nearest_hierarchical: empty tree");
  const std::vector<int> candidates = tree.k_nearest(x_rnd.position(), k_c);
  int best = -1;
  double best_ttr = 0.0;
  for (int id : candidates) {
    const double t = ttr(tree.node(id).state, x_rnd, rng);
    if (best == -1 || t < best_ttr || (t == best_ttr && id < best)) {
      best = id;
      best_ttr = t;
    }
  }
  return {best, best_ttr};
}

ExtendResult extend(const LocalPlannerPolicy& policy, const Node& from, int from_id,
                    int next_id, const RobotState& x_rnd, const GoalSpec& goal,
                    const OccupancyGrid& grid, const PlannerConfig& cfg, Rng& rng) {
  ExtendResult result;
  const auto steps_per_node =
      std::max<long>(1, std::llround(cfg.dt_tree / cfg.dt_policy));
  const auto max_steps = static_cast<long>(std::llround(cfg.t_max_extend / cfg.dt_policy));
  const GoalSpec target{x_rnd.position(), cfg.goal_radius};

  RobotState state = from.state;
  FrameStack stack;
  std::vector<RobotAction> pending;
  std::vector<Vec2> recent;  // trailing positions for the stall cutoff
  const long stall_steps =
      cfg.stall_time > 0.0 ? std::llround(cfg.stall_time / cfg.dt_policy) : 0;
  int last_id = from_id;

  for (long i = 1; i <= max_steps; ++i) {
    stack.push(lidar_scan(grid, state.position(), state.theta, policy.lidar_config(), rng));
    const RobotAction action = policy.act(make_observation(state, target, stack));
    state = propagate(state, action, cfg.dt_policy, cfg.dynamics);
    pending.push_back(action);

    if (!point_free(grid, state.position(), cfg.robot_radius)) break;  // nothing added

    const bool reached_goal =
        distance(state.position(), goal.position) <= goal.radius;
    const bool reached_target =
        distance(state.position(), x_rnd.position()) < cfg.goal_radius;
    const bool cadence = i % steps_per_node == 0;

    if (cadence || reached_goal || reached_target) {
      Node n;
      n.state = state;
      n.parent = last_id;
      n.target = x_rnd.position();
      n.arrival_time = from.arrival_time + static_cast<double>(i) * cfg.dt_policy;
      n.action_log = std::move(pending);
      pending = {};
      result.nodes.push_back(std::move(n));
      last_id = next_id + static_cast<int>(result.nodes.size()) - 1;
    }
    if (reached_goal) {
      result.reached_goal = true;
      break;
    }
    if (reached_target) {
      result.reached_target = true;
      break;
    }
    if (stall_steps > 0) {
      recent.push_back(state.position());
      if (static_cast<long>(recent.size()) > stall_steps) {
        const Vec2 past = recent[recent.size() - 1 - static_cast<size_t>(stall_steps)];
        if (distance(state.position(), past) < cfg.stall_distance) break;
      }
    }
  }
  return result;
}

PlanResult rl_rrt_with_distance(const OccupancyGrid& grid, const RobotState& root,
                                const GoalSpec& goal, const LocalPlannerPolicy& policy,
                                const AvgTtrFn* ttr, const PlannerConfig& cfg, Rng& rng,
                                const std::string& planner_name, PlanTrace* trace) {
  if (root.kind != policy.robot_kind())
    throw std::invalid_argument("planner: root state kind does not match policy");
  if (!point_free(grid, root.position(), cfg.robot_radius))
    throw std::invalid_argument("planner: root state is in collision");

  // Independent streams so the sample sequence is identical across planner
  // variants with the same seed.
  Rng sample_rng(rng());
  Rng select_rng(rng());
  Rng prune_rng(rng());
  Rng extend_rng(rng());

  const auto t0 = Clock::now();
  PlanResult result;
  result.planner_name = planner_name;

  Tree tree(grid.width_m(), grid.height_m());
  Node root_node;
  root_node.state = root;
  root_node.target = root.position();
  tree.add(std::move(root_node));

  int goal_node = -1;
  if (distance(root.position(), goal.position) <= goal.radius) {
    goal_node = 0;
    result.stats.first_solution_walltime = 0.0;
    result.stats.first_solution_iteration = 0;
  }

  while (goal_node < 0) {
    if (cfg.max_iterations > 0 && result.stats.iterations >= cfg.max_iterations) break;
    if (cfg.time_budget > 0.0 && seconds_since(t0) >= cfg.time_budget) break;
    ++result.stats.iterations;

    // Sample until a target survives the reachability prune.
    RobotState x_rnd;
    int chosen = -1;
    bool good = false;
    long guard = 0;
    while (!good) {
      if (++guard > cfg.max_samples_per_iteration) break;
      if (cfg.time_budget > 0.0 && seconds_since(t0) >= cfg.time_budget) break;
      x_rnd = sample_free_state(grid, root.kind, sample_rng, goal, cfg.p_goal_bias,
                                cfg.robot_radius);
      ++result.stats.samples_drawn;

      double ttr_value = 0.0;
      if (ttr != nullptr) {
        std::tie(chosen, ttr_value) =
            select_nearest_hierarchical(tree, x_rnd, *ttr, cfg.k_c, select_rng);
        result.stats.estimator_calls += std::min<long>(cfg.k_c, tree.size());
        good = ttr_value < cfg.ttr_threshold || uniform01(prune_rng) > cfg.p_prune;
        if (!good) ++result.stats.pruned_count;
      } else {
        chosen = tree.nearest(x_rnd.position());
        ttr_value = distance(tree.node(chosen).state.position(), x_rnd.position());
        good = true;
      }
      if (trace != nullptr)
        trace->samples.push_back({x_rnd, chosen, ttr_value, !good});
    }
    if (!good) continue;

    ExtendResult ext =
        extend(policy, tree.node(chosen), chosen, tree.size(), x_rnd, goal, grid, cfg,
               extend_rng);
    for (Node& n : ext.nodes) tree.add(std::move(n));
    if (ext.reached_goal) {
      goal_node = tree.size() - 1;
      result.stats.first_solution_walltime = seconds_since(t0);
      result.stats.first_solution_iteration = result.stats.iterations;
    }
  }

  result.stats.tree_size = tree.size();
  result.stats.wall_seconds = seconds_since(t0);
  result.seed = 0;
  if (goal_node >= 0) {
    result.success = true;
    result.plan = extract_plan(tree, goal_node, cfg.dt_policy);
  }
  if (trace != nullptr) trace->tree_nodes = tree.nodes();
  return result;
}

PlanResult rl_rrt(const OccupancyGrid& grid, const RobotState& root, const GoalSpec& goal,
                  const LocalPlannerPolicy& policy, const ReachabilityEstimator& estimator,
                  const PlannerConfig& cfg, Rng& rng, PlanTrace* trace) {
  const AvgTtrFn ttr =
      make_estimator_avg_ttr(estimator, grid, cfg.ttr_samples, cfg.ttr_half_width);
  return rl_rrt_with_distance(grid, root, goal, policy, &ttr, cfg, rng, "rl-rrt", trace);
}

PlanResult rl_rrt_euclidean(const OccupancyGrid& grid, const RobotState& root,
                            const GoalSpec& goal, const LocalPlannerPolicy& policy,
                            const PlannerConfig& cfg, Rng& rng, PlanTrace* trace) {
  return rl_rrt_with_distance(grid, root, goal, policy, nullptr, cfg, rng, "rl-rrt-e",
                              trace);
}

PlanResult rrt_steer_plan(const OccupancyGrid& grid, const RobotState& root,
                          const GoalSpec& goal, bool enable_clearance,
                          const LidarConfig& lidar, const PlannerConfig& cfg, Rng& rng,
                          PlanTrace* trace) {
  if (root.kind != RobotKind::DiffDrive)
    throw std::invalid_argument("rrt_steer_plan: differential drive only");
  const DwaPolicy steering(lidar, DwaConfig{}, enable_clearance);
  return rl_rrt_with_distance(grid, root, goal, steering, nullptr, cfg, rng,
                              enable_clearance ? "rrt-dw" : "rrt-s", trace);
}

PlanCheck verify_plan(const MotionPlan& plan, const OccupancyGrid& grid,
                      const PlannerConfig& cfg) {
  PlanCheck check;
  if (plan.states.empty()) return check;
  check.collision_free = point_free(grid, plan.states.front().position(), cfg.robot_radius);
  check.replays = true;

  RobotState state = plan.states.front();
  size_t next_state = 1;
  for (size_t i = 0; i < plan.actions.size(); ++i) {
    state = propagate(state, plan.actions[i], cfg.dt_policy, cfg.dynamics);
    if (!point_free(grid, state.position(), cfg.robot_radius)) check.collision_free = false;

    // Node states sit at their arrival-time step index.
    if (next_state < plan.states.size() &&
        static_cast<size_t>(std::llround(plan.times[next_state] / cfg.dt_policy)) == i + 1) {
      const RobotState& expect = plan.states[next_state];
      const double err = std::max({std::abs(state.x - expect.x), std::abs(state.y - expect.y),
                                   std::abs(state.theta - expect.theta),
                                   std::abs(state.vel[0] - expect.vel[0]),
                                   std::abs(state.vel[1] - expect.vel[1])});
      check.max_state_error = std::max(check.max_state_error, err);
      if (err > 1e-9) check.replays = false;
      ++next_state;
    }
  }
  if (next_state != plan.states.size()) check.replays = false;
  check.ok = check.replays && check.collision_free;
  return check;
}

TreeDump dump_tree(const Tree& tree, const std::string& name) {
  TreeDump dump;
  dump.name = name;
  for (int id = 1; id < tree.size(); ++id) {
    const Node& n = tree.node(id);
    dump.edges.push_back({tree.node(n.parent).state.position(), n.state.position()});
  }
  return dump;
}

TreeDump dump_tree_nodes(const std::vector<Node>& nodes, const std::string& name) {
  TreeDump dump;
  dump.name = name;
  for (size_t id = 1; id < nodes.size(); ++id) {
    const Node& n = nodes[id];
    if (n.parent < 0) continue;
    dump.edges.push_back(
        {nodes[static_cast<size_t>(n.parent)].state.position(), n.state.position()});
  }
  return dump;
}

namespace {

json state_to_json(const RobotState& s) {
  return json{{"x", s.x}, {"y", s.y}, {"theta", s.theta}, {"vel", {s.vel[0], s.vel[1]}}};
}

}  // namespace

std::string plan_to_json(const PlanResult& result, const std::string& config_echo) {
  json j;
  j["planner"] = result.planner_name;
  j["seed"] = result.seed;
  j["success"] = result.success;
  j["config"] = config_echo;
  j["stats"] = {{"iterations", result.stats.iterations},
                {"samples_drawn", result.stats.samples_drawn},
                {"pruned_count", result.stats.pruned_count},
                {"estimator_calls", result.stats.estimator_calls},
                {"tree_size", result.stats.tree_size},
                {"wall_seconds", result.stats.wall_seconds},
                {"first_solution_walltime", result.stats.first_solution_walltime},
                {"first_solution_iteration", result.stats.first_solution_iteration}};
  if (result.success) {
    j["finish_time"] = result.plan.finish_time;
    j["times"] = result.plan.times;
    j["states"] = json::array();
    for (const auto& s : result.plan.states) j["states"].push_back(state_to_json(s));
    j["actions"] = json::array();
    for (const auto& a : result.plan.actions) j["actions"].push_back({a.u[0], a.u[1]});
  }
  return j.dump(2);
}

void write_plan_json(const PlanResult& result, const std::string& config_echo,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << plan_to_json(result, config_echo) << "\n";
}

void write_tree_json(const TreeDump& dump, const std::string& path) {
  json j;
  j["name"] = dump.name;
  j["edges"] = json::array();
  for (const auto& e : dump.edges) j["edges"].push_back({e.a.x, e.a.y, e.b.x, e.b.y});
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << j.dump() << "\n";
}

TreeDump read_tree_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open tree file");
  json j = json::parse(in);
  TreeDump dump;
  dump.name = j.value("name", "tree");
  for (const auto& e : j.at("edges"))
    dump.edges.push_back({{e[0].get<double>(), e[1].get<double>()},
                          {e[2].get<double>(), e[3].get<double>()}});
  return dump;
}

}  // namespace kinoplan
