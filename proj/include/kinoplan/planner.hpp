#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kinoplan/estimator.hpp"
#include "kinoplan/policy.hpp"
#include "kinoplan/sampling.hpp"
#include "kinoplan/tree.hpp"

namespace kinoplan {

struct PlannerConfig {
  double p_goal_bias = 0.05;
  int k_c = 20;                 // Euclidean candidate count
  double p_prune = 0.9;         // pruning probability for unreachable samples
  double ttr_threshold = 20.0;  // seconds
  double dt_policy = 0.1;
  double dt_tree = 1.0;         // node-insertion period, multiple of dt_policy
  double t_max_extend = 20.0;
  double time_budget = 10.0;    // wall seconds; <= 0 disables
  long max_iterations = 0;      // deterministic budget; 0 disables
  double goal_radius = 0.5;     // d_G for both reach() and goal connection
  double robot_radius = kRobotRadius;
  int ttr_samples = 10;         // averaged-TTR target count
  double ttr_half_width = 0.3;  // target hypercube half width, meters
  // Extensions that stop making progress are cut early (thrashing at a dead
  // end otherwise burns the full t_max_extend).
  double stall_time = 3.0;      // seconds of trailing window; <= 0 disables
  double stall_distance = 0.5;  // minimum displacement over the window
  long max_samples_per_iteration = 10000;
  DynamicsParams dynamics;
};

// Averaged TTR estimate from a tree state toward a sampled state; the rng
// drives target sampling and simulated sensing.
using AvgTtrFn =
    std::function<double(const RobotState& from, const RobotState& to, Rng& rng)>;

AvgTtrFn make_estimator_avg_ttr(const ReachabilityEstimator& est, const OccupancyGrid& grid,
                                int n_samples, double half_width);

struct MotionPlan {
  std::vector<RobotState> states;       // node states, root first
  std::vector<double> times;            // arrival time per state
  std::vector<RobotAction> actions;     // one per dt_policy along the whole plan
  double finish_time = 0.0;             // trajectory duration, seconds
};

struct PlanStats {
  long iterations = 0;
  long samples_drawn = 0;
  long pruned_count = 0;
  long estimator_calls = 0;
  long tree_size = 0;
  double wall_seconds = 0.0;
  double first_solution_walltime = -1.0;  // < 0 when no solution was found
  long first_solution_iteration = -1;
};

struct PlanResult {
  bool success = false;
  MotionPlan plan;                      // valid when success
  PlanStats stats;
  std::string planner_name;
  uint64_t seed = 0;
};

// Per-sample decision record, for instrumentation-driven tests.
struct SampleDecision {
  RobotState x_rnd;
  int chosen_node = -1;
  double avg_ttr = 0.0;
  bool pruned = false;
};

struct PlanTrace {
  std::vector<SampleDecision> samples;
  std::vector<Node> tree_nodes;  // copy of the final tree
};

// Among the k_c Euclidean-nearest nodes, returns the one with the smallest
// averaged TTR toward x_rnd (ties by lower node id).
std::pair<int, double> select_nearest_hierarchical(const Tree& tree, const RobotState& x_rnd,
                                                   const AvgTtrFn& ttr, int k_c, Rng& rng);

struct ExtendResult {
  std::vector<Node> nodes;  // parents already assigned, first one = from_id
  bool reached_target = false;
  bool reached_goal = false;
};

// Rolls the policy from `from` toward x_rnd, appending a node every dt_tree
// while collision-free; stops on collision (nothing at or after it), on
// t_max_extend, or when x_rnd is reached (the final state is always added).
// next_id is the id the first new node will get when inserted.
ExtendResult extend(const LocalPlannerPolicy& policy, const Node& from, int from_id,
                    int next_id, const RobotState& x_rnd, const GoalSpec& goal,
                    const OccupancyGrid& grid, const PlannerConfig& cfg, Rng& rng);

// RL-RRT: policy as the local planner, averaged TTR as the distance function,
// probabilistic pruning of unreachable samples. Budget exhaustion returns a
// failure report (success = false), never an exception.
PlanResult rl_rrt(const OccupancyGrid& grid, const RobotState& root, const GoalSpec& goal,
                  const LocalPlannerPolicy& policy, const ReachabilityEstimator& estimator,
                  const PlannerConfig& cfg, Rng& rng, PlanTrace* trace = nullptr);

// Core with a pluggable distance; ttr == nullptr selects by Euclidean
// distance only and disables pruning (the RL-RRT-E ablation).
PlanResult rl_rrt_with_distance(const OccupancyGrid& grid, const RobotState& root,
                                const GoalSpec& goal, const LocalPlannerPolicy& policy,
                                const AvgTtrFn* ttr, const PlannerConfig& cfg, Rng& rng,
                                const std::string& planner_name, PlanTrace* trace = nullptr);

PlanResult rl_rrt_euclidean(const OccupancyGrid& grid, const RobotState& root,
                            const GoalSpec& goal, const LocalPlannerPolicy& policy,
                            const PlannerConfig& cfg, Rng& rng, PlanTrace* trace = nullptr);

// RRT with a DWA steering controller (clearance on: RRT-DW; off: RRT-S).
// Differential drive only.
PlanResult rrt_steer_plan(const OccupancyGrid& grid, const RobotState& root,
                          const GoalSpec& goal, bool enable_clearance,
                          const LidarConfig& lidar, const PlannerConfig& cfg, Rng& rng,
                          PlanTrace* trace = nullptr);

struct PlanCheck {
  bool ok = false;
  double max_state_error = 0.0;
  bool collision_free = false;
  bool replays = false;
};

// Replays the action log through propagate from the root and checks every
// intermediate state (dt_policy resolution) for collisions.
PlanCheck verify_plan(const MotionPlan& plan, const OccupancyGrid& grid,
                      const PlannerConfig& cfg);

// Tree dump for rendering and JSON export.
struct TreeDump {
  std::string name;
  struct Edge {
    Vec2 a, b;
  };
  std::vector<Edge> edges;
};

TreeDump dump_tree(const Tree& tree, const std::string& name);
TreeDump dump_tree_nodes(const std::vector<Node>& nodes, const std::string& name);

std::string plan_to_json(const PlanResult& result, const std::string& config_echo);
void write_plan_json(const PlanResult& result, const std::string& config_echo,
                     const std::string& path);
void write_tree_json(const TreeDump& dump, const std::string& path);
TreeDump read_tree_json(const std::string& path);

}  // namespace kinoplan
