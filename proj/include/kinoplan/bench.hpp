#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kinoplan/ddpg.hpp"
#include "kinoplan/planner.hpp"
#include "kinoplan/sst.hpp"

namespace kinoplan {

enum class BudgetMode { WallTime, Iterations };

struct ExperimentConfig {
  std::string map_path;
  RobotKind kind = RobotKind::DiffDrive;
  std::vector<std::string> planners;  // rl-rrt | rl-rrt-e | sst | rrt-dw | rrt-s
  int trials = 50;
  std::vector<double> budgets;        // seconds (WallTime) or iterations, ascending
  BudgetMode budget_mode = BudgetMode::WallTime;
  uint64_t seed_base = 1;

  // Either one fixed start/goal pair or per-trial sampled pairs with a
  // minimum separation. Sampled pairs are identical across planners.
  bool sample_pairs = false;
  double min_pair_distance = 10.0;
  RobotState start;
  Vec2 goal;

  PlannerConfig planner;
  SstConfig sst;
  LidarConfig lidar;  // for the DWA-based planners

  std::string policy_spec = "dwa";  // "dwa" | "dwa_no_clearance" | checkpoint prefix
  std::string estimator_path;       // checkpoint prefix, required by rl-rrt
};

struct TrialRecord {
  std::string planner;
  uint64_t seed = 0;
  bool success = false;
  std::optional<double> wall_time_to_first_solution;
  long iters_to_first_solution = -1;
  std::optional<double> finish_time;
  long tree_size = 0;
  long samples_drawn = 0;
  long pruned_count = 0;

  bool operator==(const TrialRecord&) const = default;
};

// Runs every planner for every trial (seed = seed_base + trial) at the
// largest configured budget. Deterministic records in Iterations mode.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg,
                                        const OccupancyGrid& grid,
                                        const LocalPlannerPolicy* policy,
                                        const ReachabilityEstimator* estimator);

std::string records_to_csv(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> records_from_csv(const std::string& csv);

// Fraction of trials per planner solved within each budget; non-decreasing.
std::map<std::string, std::vector<double>> success_curve(
    const std::vector<TrialRecord>& records, const std::vector<double>& budgets,
    BudgetMode mode);

struct DistanceBin {
  double lo = 0.0, hi = 0.0;
  long trials = 0;
  long successes = 0;
  double rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

// Rollout success rate binned by straight-line start/goal distance.
std::vector<DistanceBin> p2p_success_by_distance(const LocalPlannerPolicy& policy,
                                                 const OccupancyGrid& grid,
                                                 const std::vector<double>& bin_edges,
                                                 int trials, const EpisodeConfig& cfg,
                                                 Rng& rng);

struct ContourField {
  double step = 0.5;
  double t_horizon = 20.0;
  std::vector<Vec2> points;          // free cell centers on the step lattice
  std::vector<double> value;         // TTR, seconds
  std::vector<uint8_t> unreachable;  // value beyond the horizon
};

// Predicted TTR over free positions (zero velocity, orientation 0).
ContourField ttr_contour_predicted(const ReachabilityEstimator& est,
                                   const OccupancyGrid& grid, const GoalSpec& goal,
                                   double step, Rng& rng);

// Ground truth by policy rollout from each position.
ContourField ttr_contour_oracle(const LocalPlannerPolicy& policy, const OccupancyGrid& grid,
                                const GoalSpec& goal, double step, const TTRConfig& cfg,
                                Rng& rng);

void write_contour_csv(const ContourField& field, const std::string& path);

// Paired (predicted TTR, -V from the policy critic) per trajectory step.
std::vector<std::vector<std::pair<double, double>>> critic_vs_ttr_report(
    const LearnedPolicy& policy, const ReachabilityEstimator& est,
    const std::vector<RolloutResult>& trajectories);

}  // namespace kinoplan
