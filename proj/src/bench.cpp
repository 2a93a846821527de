#include "kinoplan/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kinoplan {

namespace {

std::pair<RobotState, Vec2> trial_pair(const ExperimentConfig& cfg,
                                       const OccupancyGrid& grid, uint64_t seed) {
  if (!cfg.sample_pairs) return {cfg.start, cfg.goal};
  // Pair stream independent of the planner Rng so all planners see the same
  // start/goal at a given trial index.
  Rng rng(derive_seed(seed, 777));
  for (int tries = 0; tries < 10000; ++tries) {
    RobotState start = sample_free_state(grid, cfg.kind, rng, GoalSpec{}, 0.0,
                                         cfg.planner.robot_radius);
    start.vel = {0.0, 0.0};
    const Vec2 goal = sample_free_position(grid, rng, cfg.planner.robot_radius);
    if (distance(start.position(), goal) >= cfg.min_pair_distance) return {start, goal};
  }
  throw std::runtime_error("run_experiment: cannot sample a start/goal pair at the "
                           "configured separation");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg,
                                        const OccupancyGrid& grid,
                                        const LocalPlannerPolicy* policy,
                                        const ReachabilityEstimator* estimator) {
  if (cfg.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
  if (cfg.budgets.empty()) throw std::invalid_argument("run_experiment: no budgets given");
  if (!std::is_sorted(cfg.budgets.begin(), cfg.budgets.end()))
    throw std::invalid_argument("run_experiment: budgets must be ascending");
  for (const auto& name : cfg.planners) {
    if (name == "rl-rrt" && estimator == nullptr)
      throw std::invalid_argument("run_experiment: rl-rrt requires an estimator");
    if ((name == "rl-rrt" || name == "rl-rrt-e") && policy == nullptr)
      throw std::invalid_argument("run_experiment: " + name + " requires a policy");
  }

  const double max_budget = cfg.budgets.back();
  std::vector<TrialRecord> records;
  records.reserve(cfg.planners.size() * static_cast<size_t>(cfg.trials));

  for (const auto& name : cfg.planners) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const uint64_t seed = cfg.seed_base + static_cast<uint64_t>(trial);
      const auto [start, goal_pos] = trial_pair(cfg, grid, seed);
      const GoalSpec goal{goal_pos, cfg.planner.goal_radius};
      Rng rng(seed);

      PlannerConfig pc = cfg.planner;
      SstConfig sc = cfg.sst;
      if (cfg.budget_mode == BudgetMode::WallTime) {
        pc.time_budget = max_budget;
        pc.max_iterations = 0;
        sc.time_budget = max_budget;
        sc.max_iterations = 0;
      } else {
        pc.time_budget = 0.0;
        pc.max_iterations = static_cast<long>(max_budget);
        sc.time_budget = 0.0;
        sc.max_iterations = static_cast<long>(max_budget);
      }

      PlanResult res;
      if (name == "rl-rrt") {
        res = rl_rrt(grid, start, goal, *policy, *estimator, pc, rng);
      } else if (name == "rl-rrt-e") {
        res = rl_rrt_euclidean(grid, start, goal, *policy, pc, rng);
      } else if (name == "sst") {
        res = sst_plan(grid, start, goal, sc, rng);
      } else if (name == "rrt-dw") {
        res = rrt_steer_plan(grid, start, goal, true, cfg.lidar, pc, rng);
      } else if (name == "rrt-s") {
        res = rrt_steer_plan(grid, start, goal, false, cfg.lidar, pc, rng);
      } else {
        throw std::invalid_argument("run_experiment: unknown planner " + name);
      }

      TrialRecord rec;
      rec.planner = name;
      rec.seed = seed;
      rec.success = res.success;
      if (res.stats.first_solution_iteration >= 0) {
        rec.iters_to_first_solution = res.stats.first_solution_iteration;
        if (cfg.budget_mode == BudgetMode::WallTime)
          rec.wall_time_to_first_solution = res.stats.first_solution_walltime;
      }
      if (res.success) rec.finish_time = res.plan.finish_time;
      rec.tree_size = res.stats.tree_size;
      rec.samples_drawn = res.stats.samples_drawn;
      rec.pruned_count = res.stats.pruned_count;
      records.push_back(std::move(rec));
    }
  }
  return records;
}

std::string records_to_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream out;
  out << "planner,seed,success,wall_time_to_first_solution,iters_to_first_solution,"
         "finish_time,tree_size,samples_drawn,pruned_count\n";
  for (const auto& r : records) {
    out << r.planner << "," << r.seed << "," << (r.success ? 1 : 0) << ",";
    if (r.wall_time_to_first_solution) out << fmt_double(*r.wall_time_to_first_solution);
    out << "," << r.iters_to_first_solution << ",";
    if (r.finish_time) out << fmt_double(*r.finish_time);
    out << "," << r.tree_size << "," << r.samples_drawn << "," << r.pruned_count << "\n";
  }
  return out.str();
}

std::vector<TrialRecord> records_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("records_from_csv: empty input");
  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(cur);
    if (f.size() != 9) throw std::runtime_error("records_from_csv: bad row: " + line);
    TrialRecord r;
    r.planner = f[0];
    r.seed = std::stoull(f[1]);
    r.success = f[2] == "1";
    if (!f[3].empty()) r.wall_time_to_first_solution = std::stod(f[3]);
    r.iters_to_first_solution = std::stol(f[4]);
    if (!f[5].empty()) r.finish_time = std::stod(f[5]);
    r.tree_size = std::stol(f[6]);
    r.samples_drawn = std::stol(f[7]);
    r.pruned_count = std::stol(f[8]);
    records.push_back(std::move(r));
  }
  return records;
}

std::map<std::string, std::vector<double>> success_curve(
    const std::vector<TrialRecord>& records, const std::vector<double>& budgets,
    BudgetMode mode) {
  if (records.empty()) throw std::invalid_argument("success_curve: no records");
  std::map<std::string, std::vector<double>> out;
  std::map<std::string, long> counts;
  for (const auto& r : records) ++counts[r.planner];
  for (const auto& [name, n] : counts) out[name].assign(budgets.size(), 0.0);

  for (const auto& r : records) {
    if (!r.success) continue;
    for (size_t b = 0; b < budgets.size(); ++b) {
      const bool within =
          mode == BudgetMode::WallTime
              ? (r.wall_time_to_first_solution &&
                 *r.wall_time_to_first_solution <= budgets[b])
              : (r.iters_to_first_solution >= 0 &&
                 static_cast<double>(r.iters_to_first_solution) <= budgets[b]);
      if (within) out[r.planner][b] += 1.0;
    }
  }
  for (auto& [name, curve] : out)
    for (double& v : curve) v /= static_cast<double>(counts[name]);
  return out;
}

std::vector<DistanceBin> p2p_success_by_distance(const LocalPlannerPolicy& policy,
                                                 const OccupancyGrid& grid,
                                                 const std::vector<double>& bin_edges,
                                                 int trials, const EpisodeConfig& cfg,
                                                 Rng& rng) {
  if (bin_edges.size() < 2)
    throw std::invalid_argument("p2p_success_by_distance: need at least two bin edges");
  std::vector<DistanceBin> bins;
  for (size_t i = 0; i + 1 < bin_edges.size(); ++i)
    bins.push_back({bin_edges[i], bin_edges[i + 1], 0, 0});

  for (int t = 0; t < trials; ++t) {
    const RobotState start = sample_free_state(grid, policy.robot_kind(), rng, GoalSpec{},
                                               0.0, cfg.robot_radius);
    const Vec2 goal_pos = sample_free_position(grid, rng, cfg.robot_radius);
    const double d = distance(start.position(), goal_pos);
    DistanceBin* bin = nullptr;
    for (auto& b : bins)
      if (d >= b.lo && d < b.hi) bin = &b;
    if (bin == nullptr) continue;  // outside the binned range
    ++bin->trials;
    const GoalSpec goal{goal_pos, cfg.goal_radius};
    if (rollout(policy, grid, start, goal, cfg, rng).outcome == RolloutOutcome::Reached)
      ++bin->successes;
  }
  return bins;
}

namespace {

ContourField make_lattice(const OccupancyGrid& grid, const GoalSpec& goal, double step,
                          double robot_radius, double t_horizon) {
  if (!point_free(grid, goal.position, robot_radius))
    throw std::invalid_argument("ttr_contour: goal position is not in free space");
  ContourField field;
  field.step = step;
  field.t_horizon = t_horizon;
  for (double y = step / 2; y < grid.height_m(); y += step)
    for (double x = step / 2; x < grid.width_m(); x += step)
      if (point_free(grid, {x, y}, robot_radius)) field.points.push_back({x, y});
  return field;
}

RobotState lattice_state(RobotKind kind, const Vec2& p) {
  // Zero linear speed and zero orientation at every lattice point.
  RobotState s;
  s.kind = kind;
  s.x = p.x;
  s.y = p.y;
  return s;
}

}  // namespace

ContourField ttr_contour_predicted(const ReachabilityEstimator& est,
                                   const OccupancyGrid& grid, const GoalSpec& goal,
                                   double step, Rng& rng) {
  ContourField field = make_lattice(grid, goal, step, kRobotRadius, est.ttr_threshold);
  FrameStack stack;
  for (const Vec2& p : field.points) {
    const RobotState s = lattice_state(est.kind, p);
    stack.clear();
    stack.push(lidar_scan(grid, p, s.theta, est.lidar, rng));
    const double ttr = predict_ttr(est, make_observation(s, goal, stack));
    field.value.push_back(ttr);
    field.unreachable.push_back(ttr > est.ttr_threshold ? 1 : 0);
  }
  return field;
}

ContourField ttr_contour_oracle(const LocalPlannerPolicy& policy, const OccupancyGrid& grid,
                                const GoalSpec& goal, double step, const TTRConfig& cfg,
                                Rng& rng) {
  ContourField field = make_lattice(grid, goal, step, cfg.robot_radius, cfg.T_horizon);
  for (const Vec2& p : field.points) {
    const RobotState s = lattice_state(policy.robot_kind(), p);
    const double ttr = rollout_ttr(policy, grid, s, goal.position, cfg, rng);
    field.value.push_back(ttr);
    field.unreachable.push_back(ttr > cfg.T_horizon ? 1 : 0);
  }
  return field;
}

void write_contour_csv(const ContourField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "x,y,ttr,unreachable\n";
  for (size_t i = 0; i < field.points.size(); ++i)
    out << fmt_double(field.points[i].x) << "," << fmt_double(field.points[i].y) << ","
        << fmt_double(field.value[i]) << "," << int(field.unreachable[i]) << "\n";
}

std::vector<std::vector<std::pair<double, double>>> critic_vs_ttr_report(
    const LearnedPolicy& policy, const ReachabilityEstimator& est,
    const std::vector<RolloutResult>& trajectories) {
  if (policy.critic() == nullptr)
    throw std::invalid_argument("critic_vs_ttr_report: policy has no critic net");
  std::vector<std::vector<std::pair<double, double>>> out;
  for (const auto& traj : trajectories) {
    std::vector<std::pair<double, double>> series;
    series.reserve(traj.steps.size());
    for (const auto& step : traj.steps)
      series.push_back(
          {predict_ttr(est, step.observation), -policy.critic_value(step.observation)});
    out.push_back(std::move(series));
  }
  return out;
}

}  // namespace kinoplan
