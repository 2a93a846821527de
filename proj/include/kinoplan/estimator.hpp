#pragma once

#include <string>
#include <vector>

#include "kinoplan/policy.hpp"

namespace kinoplan {

struct TTRConfig {
  double dt = 0.1;                  // per-step TTR cost
  double T_horizon = 20.0;          // reachability horizon (40 for Car)
  int n_episodes = 1000;
  double goal_sample_radius = 20.0;
  double ttr_threshold = 20.0;      // == T_horizon
  double goal_radius = 0.5;         // d_G
  double robot_radius = kRobotRadius;
};

TTRConfig default_ttr_config(RobotKind kind);

// Per-step TTR cost. A normal step costs dt; a collision or hitting the time
// horizon costs dt + T_horizon and ends the episode; reaching the goal costs
// dt and ends the episode.
std::pair<double, bool> ttr_step_cost(double elapsed, bool collided, bool reached,
                                      const TTRConfig& cfg);

// Suffix sums: out[i] = sum_{j >= i} cost[j].
std::vector<double> cumulative_future_cost(const std::vector<double>& cost_history);

struct TtrDataset {
  RobotKind kind = RobotKind::DiffDrive;
  int n_beams = 0;
  double max_range = 0.0;
  double dt = 0.1;
  double T_horizon = 20.0;
  double goal_sample_radius = 20.0;
  int n_episodes = 0;

  struct Row {
    uint32_t episode = 0;
    uint32_t step = 0;
    std::vector<double> observation;
    double label = 0.0;  // cumulative future TTR cost, seconds
  };
  std::vector<Row> rows;

  int observation_dim() const { return 3 * n_beams + 5; }
};

// Rolls the policy for n_episodes with random start/goal pairs (goals within
// goal_sample_radius) and labels every observation with its cumulative future
// TTR cost.
TtrDataset collect_training_data(const LocalPlannerPolicy& policy,
                                 const OccupancyGrid& grid, const TTRConfig& cfg,
                                 Rng& rng);

void save_dataset(const TtrDataset& ds, const std::string& path);
TtrDataset load_dataset(const std::string& path);

// Keeps only episodes whose every label is within the horizon (the episodes
// that reached the goal).
TtrDataset filter_success_episodes(const TtrDataset& ds);

struct ClassificationMetrics {
  long tp = 0, fp = 0, fn = 0, tn = 0;  // positive class = reachable
  double precision() const { return tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0; }
  double recall() const { return tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0; }
  double accuracy() const {
    const long n = tp + fp + fn + tn;
    return n > 0 ? static_cast<double>(tp + tn) / n : 0.0;
  }
  long total() const { return tp + fp + fn + tn; }
};

// "Table" view: confusion entries as percentages of the held-out set.
std::string format_metrics_table(const ClassificationMetrics& m);

struct EstimatorTrainConfig {
  TrainConfig base{1e-3, 64, 50, 1, 1e-5};
  std::vector<int> hidden{500, 200, 100};
  double dropout_p = 0.5;
  double holdout_fraction = 0.1;  // split by episode
};

struct EstimatorReport {
  ClassificationMetrics heldout;
  std::vector<double> loss_curve;
  double heldout_mse = 0.0;
  // Mean of (prediction - label) over held-out samples from goal-reaching
  // episodes; positive values mean the regressor overestimates TTR.
  double mean_signed_error_success = 0.0;
  long heldout_samples = 0;
};

struct ReachabilityEstimator {
  RobotKind kind = RobotKind::DiffDrive;
  NeuralNet net;
  NormalizationConfig norm;
  LidarConfig lidar;
  double ttr_threshold = 20.0;
  double label_scale = 20.0;  // labels are trained divided by this
  uint64_t training_seed = 0;
};

ReachabilityEstimator train_estimator(const TtrDataset& ds, const EstimatorTrainConfig& cfg,
                                      EstimatorReport* report = nullptr);

// Same training restricted to goal-reaching episodes (no unreachable penalty
// labels); throws when the filter leaves nothing.
ReachabilityEstimator train_ttr_only_estimator(const TtrDataset& ds,
                                               const EstimatorTrainConfig& cfg,
                                               EstimatorReport* report = nullptr);

// Dropout-free deterministic regression of the TTR for one observation.
double predict_ttr(const ReachabilityEstimator& est, const Observation& o);

// Mean predicted TTR from `from_state` toward n_samples target positions
// uniform in the half_width hypercube around to_state (velocities and
// orientation copied from to_state).
double avg_ttr(const ReachabilityEstimator& est, const RobotState& from_state,
               const RobotState& to_state, const OccupancyGrid& grid, Rng& rng,
               int n_samples = 10, double half_width = 0.3);

// Ground-truth TTR by rolling the policy out; returns dt + T_horizon beyond
// the horizon when the goal is not reached (mirrors the training labels).
double rollout_ttr(const LocalPlannerPolicy& policy, const OccupancyGrid& grid,
                   const RobotState& from_state, const Vec2& goal_position,
                   const TTRConfig& cfg, Rng& rng);

// Checkpoint: "<prefix>.wts" + "<prefix>.json" metadata.
void save_estimator(const ReachabilityEstimator& est, const std::string& prefix);
ReachabilityEstimator load_estimator(const std::string& prefix);

}  // namespace kinoplan
