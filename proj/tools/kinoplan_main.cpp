#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kinoplan/bench.hpp"
#include "kinoplan/ddpg.hpp"
#include "kinoplan/svg.hpp"

using namespace kinoplan;
using nlohmann::json;

namespace {

RobotState parse_state(RobotKind kind, const std::string& text) {
  RobotState s;
  s.kind = kind;
  std::istringstream in(text);
  char comma;
  if (!(in >> s.x >> comma >> s.y)) throw CLI::ValidationError("expected 'x,y[,theta]'");
  if (in >> comma >> s.theta) {
  }
  return s;
}

Vec2 parse_point(const std::string& text) {
  Vec2 p;
  std::istringstream in(text);
  char comma;
  if (!(in >> p.x >> comma >> p.y)) throw CLI::ValidationError("expected 'x,y'");
  return p;
}

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) dims.push_back(std::stoi(tok));
  return dims;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

// "dwa", "dwa-no-clearance" or a learned-policy checkpoint prefix.
std::unique_ptr<LocalPlannerPolicy> resolve_policy(const std::string& spec,
                                                   const LidarConfig& lidar) {
  if (spec == "dwa") return std::make_unique<DwaPolicy>(lidar, DwaConfig{}, true);
  if (spec == "dwa-no-clearance" || spec == "dwa_no_clearance")
    return std::make_unique<DwaPolicy>(lidar, DwaConfig{}, false);
  return std::make_unique<LearnedPolicy>(load_policy(spec));
}

MotionPlan read_plan_states(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open plan file");
  json j = json::parse(in);
  MotionPlan plan;
  if (!j.contains("states")) return plan;
  for (const auto& s : j.at("states")) {
    RobotState st;
    st.x = s.at("x").get<double>();
    st.y = s.at("y").get<double>();
    plan.states.push_back(st);
  }
  plan.finish_time = j.value("finish_time", 0.0);
  return plan;
}

void add_lidar_options(CLI::App* cmd, LidarConfig& lidar) {
  cmd->add_option("--beams", lidar.n_beams, "lidar beam count");
  cmd->add_option("--max-range", lidar.max_range, "lidar max range, m");
  cmd->add_option("--noise-sigma", lidar.noise_sigma, "lidar range noise stddev, m");
}

int run_train_policy(const std::string& map_path, const std::string& robot,
                     const std::string& out_prefix, LidarConfig lidar, int episodes,
                     uint64_t seed, double goal_sample_radius, int eval_trials) {
  const OccupancyGrid grid = load_map(map_path);
  const RobotKind kind = robot_kind_from_name(robot);

  TrainPolicyConfig cfg;
  cfg.lidar = lidar;
  cfg.normalization = {lidar.max_range, goal_sample_radius};
  cfg.episode.goal_sample_radius = goal_sample_radius;
  cfg.episodes = episodes;
  cfg.update_every = 2;
  cfg.warmup_steps = 800;
  cfg.seed = seed;

  const RewardWeights weights = make_default_reward_weights(kind);
  TrainingLog log;
  std::cout << "training " << robot << " policy on " << map_path << " (" << episodes
            << " episodes, seed " << seed << ")\n";
  const LearnedPolicy policy = train_actor_critic(kind, grid, weights, cfg, &log);

  save_policy(policy, out_prefix);
  write_training_log_csv(log, out_prefix + ".train.csv");

  const double trained =
      evaluate_policy_success(policy, grid, eval_trials, 5.0, cfg.episode, seed + 1);
  const RandomPolicy random(kind, lidar, seed + 2);
  const double baseline =
      evaluate_policy_success(random, grid, eval_trials, 5.0, cfg.episode, seed + 1);
  std::cout << "P2P success within 5 m: trained " << trained << ", random baseline "
            << baseline << "\n";
  std::cout << "checkpoint: " << out_prefix << ".{actor.wts,critic.wts,json}\n";
  return trained > baseline ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinodynamic planning toolkit: learned local planners, reachability "
               "estimation, RL-RRT and baselines"};
  app.require_subcommand(1);

  // ---- train-policy ----
  auto* train_policy_cmd =
      app.add_subcommand("train-policy", "train the actor-critic P2P policy");
  std::string tp_map, tp_robot = "diff_drive", tp_out = "policy";
  LidarConfig tp_lidar;
  tp_lidar.n_beams = 8;
  int tp_episodes = 150, tp_eval_trials = 100;
  uint64_t tp_seed = 1;
  double tp_radius = 5.0;
  train_policy_cmd->add_option("--map", tp_map, "map file")->required();
  train_policy_cmd->add_option("--robot", tp_robot, "diff_drive|car|asteroid");
  train_policy_cmd->add_option("--out", tp_out, "checkpoint prefix");
  train_policy_cmd->add_option("--episodes", tp_episodes, "training episodes");
  train_policy_cmd->add_option("--seed", tp_seed, "rng seed");
  train_policy_cmd->add_option("--goal-sample-radius", tp_radius,
                               "training goal distance cap, m");
  train_policy_cmd->add_option("--eval-trials", tp_eval_trials, "post-training eval trials");
  add_lidar_options(train_policy_cmd, tp_lidar);

  // ---- collect-ttr ----
  auto* collect_cmd =
      app.add_subcommand("collect-ttr", "roll the policy out and label TTR costs");
  std::string ct_map, ct_policy = "dwa", ct_out = "ttr_data.bin";
  LidarConfig ct_lidar;
  ct_lidar.n_beams = 16;
  int ct_episodes = 200;
  uint64_t ct_seed = 1;
  double ct_dt = 0.1, ct_horizon = 0.0, ct_radius = 20.0;
  collect_cmd->add_option("--map", ct_map, "map file")->required();
  collect_cmd->add_option("--policy", ct_policy,
                          "dwa | dwa-no-clearance | learned checkpoint prefix");
  collect_cmd->add_option("--out", ct_out, "dataset output path");
  collect_cmd->add_option("--episodes", ct_episodes, "episode count");
  collect_cmd->add_option("--seed", ct_seed, "rng seed");
  collect_cmd->add_option("--dt", ct_dt, "policy step, s");
  collect_cmd->add_option("--horizon", ct_horizon, "T_horizon, s (0 = per-robot default)");
  collect_cmd->add_option("--goal-sample-radius", ct_radius, "goal sampling radius, m");
  add_lidar_options(collect_cmd, ct_lidar);

  // ---- train-estimator ----
  auto* train_est_cmd =
      app.add_subcommand("train-estimator", "fit the reachability regressor");
  std::string te_data, te_out = "estimator", te_hidden = "500,200,100";
  double te_lr = 1e-3, te_dropout = 0.5, te_holdout = 0.1, te_l2 = 1e-5;
  int te_epochs = 50, te_batch = 64;
  uint64_t te_seed = 1;
  bool te_success_only = false;
  train_est_cmd->add_option("--data", te_data, "TTR dataset path")->required();
  train_est_cmd->add_option("--out", te_out, "checkpoint prefix");
  train_est_cmd->add_option("--hidden", te_hidden, "hidden layer dims, comma separated");
  train_est_cmd->add_option("--epochs", te_epochs, "training epochs");
  train_est_cmd->add_option("--batch", te_batch, "minibatch size");
  train_est_cmd->add_option("--lr", te_lr, "learning rate");
  train_est_cmd->add_option("--l2", te_l2, "l2 weight decay");
  train_est_cmd->add_option("--dropout", te_dropout, "hidden dropout probability");
  train_est_cmd->add_option("--holdout", te_holdout, "held-out episode fraction");
  train_est_cmd->add_option("--seed", te_seed, "rng seed");
  train_est_cmd->add_flag("--success-only", te_success_only,
                          "train only on goal-reaching episodes");

  // ---- plan ----
  auto* plan_cmd = app.add_subcommand("plan", "run one planning query");
  std::string pl_map, pl_planner = "rl-rrt", pl_policy = "dwa", pl_estimator, pl_start,
              pl_goal, pl_out, pl_tree_out, pl_robot = "diff_drive";
  LidarConfig pl_lidar;
  pl_lidar.n_beams = 16;
  PlannerConfig pl_cfg;
  SstConfig pl_sst;
  uint64_t pl_seed = 1;
  plan_cmd->add_option("--map", pl_map, "map file")->required();
  plan_cmd->add_option("--planner", pl_planner, "rl-rrt|rl-rrt-e|sst|rrt-dw|rrt-s");
  plan_cmd->add_option("--robot", pl_robot, "robot kind");
  plan_cmd->add_option("--policy", pl_policy, "policy spec for rl-rrt / rl-rrt-e");
  plan_cmd->add_option("--estimator", pl_estimator, "estimator checkpoint for rl-rrt");
  plan_cmd->add_option("--start", pl_start, "start pose 'x,y[,theta]'")->required();
  plan_cmd->add_option("--goal", pl_goal, "goal position 'x,y'")->required();
  plan_cmd->add_option("--budget", pl_cfg.time_budget, "wall-clock budget, s");
  plan_cmd->add_option("--iterations", pl_cfg.max_iterations,
                       "iteration budget (0 = unlimited)");
  plan_cmd->add_option("--goal-radius", pl_cfg.goal_radius, "goal radius d_G, m");
  plan_cmd->add_option("--k-c", pl_cfg.k_c, "Euclidean candidate count");
  plan_cmd->add_option("--p-prune", pl_cfg.p_prune, "pruning probability");
  plan_cmd->add_option("--p-goal-bias", pl_cfg.p_goal_bias, "goal bias");
  plan_cmd->add_option("--ttr-threshold", pl_cfg.ttr_threshold, "reachability threshold, s");
  plan_cmd->add_option("--t-max-extend", pl_cfg.t_max_extend, "max extension time, s");
  plan_cmd->add_option("--dt-tree", pl_cfg.dt_tree, "node insertion period, s");
  plan_cmd->add_option("--seed", pl_seed, "rng seed");
  plan_cmd->add_option("--out", pl_out, "plan JSON output");
  plan_cmd->add_option("--tree-out", pl_tree_out, "tree JSON output");
  add_lidar_options(plan_cmd, pl_lidar);

  // ---- bench ----
  auto* bench_cmd = app.add_subcommand("bench", "run the experiment harness");
  bench_cmd->set_config("--config", "", "key=value config file");
  std::string be_map, be_planners = "rl-rrt,sst", be_policy = "dwa", be_estimator,
              be_out = "records.csv", be_robot = "diff_drive", be_budgets = "1,2,4",
              be_mode = "walltime", be_start, be_goal;
  int be_trials = 50;
  uint64_t be_seed = 1;
  bool be_sample_pairs = false;
  double be_min_pair = 10.0;
  LidarConfig be_lidar;
  be_lidar.n_beams = 16;
  PlannerConfig be_planner_cfg;
  SstConfig be_sst_cfg;
  bench_cmd->add_option("--map", be_map, "map file")->required();
  bench_cmd->add_option("--planners", be_planners, "comma-separated planner list");
  bench_cmd->add_option("--robot", be_robot, "robot kind");
  bench_cmd->add_option("--policy", be_policy, "policy spec");
  bench_cmd->add_option("--estimator", be_estimator, "estimator checkpoint prefix");
  bench_cmd->add_option("--trials", be_trials, "trials per planner");
  bench_cmd->add_option("--budgets", be_budgets, "ascending budgets, comma separated");
  bench_cmd->add_option("--budget-mode", be_mode, "walltime | iterations");
  bench_cmd->add_option("--start", be_start, "fixed start 'x,y[,theta]'");
  bench_cmd->add_option("--goal", be_goal, "fixed goal 'x,y'");
  bench_cmd->add_flag("--sample-pairs", be_sample_pairs, "sample start/goal per trial");
  bench_cmd->add_option("--min-pair-distance", be_min_pair, "sampled pair separation, m");
  bench_cmd->add_option("--seed", be_seed, "seed base (trial i uses seed+i)");
  bench_cmd->add_option("--out", be_out, "records CSV path");
  bench_cmd->add_option("--k-c", be_planner_cfg.k_c, "Euclidean candidate count");
  bench_cmd->add_option("--p-prune", be_planner_cfg.p_prune, "pruning probability");
  bench_cmd->add_option("--ttr-threshold", be_planner_cfg.ttr_threshold,
                        "reachability threshold, s");
  bench_cmd->add_option("--t-max-extend", be_planner_cfg.t_max_extend,
                        "max extension time, s");
  bench_cmd->add_option("--dt-tree", be_planner_cfg.dt_tree, "node insertion period, s");
  bench_cmd->add_option("--p-goal-bias", be_planner_cfg.p_goal_bias, "goal bias");
  add_lidar_options(bench_cmd, be_lidar);

  // ---- contour ----
  auto* contour_cmd =
      app.add_subcommand("contour", "TTR field over free space (predicted or oracle)");
  std::string co_map, co_goal, co_estimator, co_oracle_policy, co_out = "contour.csv";
  double co_step = 0.5, co_horizon = 0.0;
  uint64_t co_seed = 1;
  LidarConfig co_lidar;
  co_lidar.n_beams = 16;
  contour_cmd->add_option("--map", co_map, "map file")->required();
  contour_cmd->add_option("--goal", co_goal, "goal position 'x,y'")->required();
  contour_cmd->add_option("--estimator", co_estimator, "estimator checkpoint prefix");
  contour_cmd->add_option("--oracle-policy", co_oracle_policy,
                          "policy spec for ground-truth rollouts");
  contour_cmd->add_option("--step", co_step, "lattice step, m");
  contour_cmd->add_option("--horizon", co_horizon, "T_horizon, s (0 = per-robot default)");
  contour_cmd->add_option("--seed", co_seed, "rng seed");
  contour_cmd->add_option("--out", co_out, "CSV output path");
  add_lidar_options(contour_cmd, co_lidar);

  // ---- render ----
  auto* render_cmd = app.add_subcommand("render", "render map, trees and plans to SVG");
  std::string re_map, re_out = "render.svg", re_start, re_goal;
  std::vector<std::string> re_trees, re_plans;
  render_cmd->add_option("--map", re_map, "map file")->required();
  render_cmd->add_option("--tree", re_trees, "tree JSON file (repeatable)");
  render_cmd->add_option("--plan", re_plans, "plan JSON file (repeatable)");
  render_cmd->add_option("--start", re_start, "start marker 'x,y'");
  render_cmd->add_option("--goal", re_goal, "goal marker 'x,y'");
  render_cmd->add_option("--out", re_out, "SVG output path");

  // ---- p2p-eval ----
  auto* p2p_cmd =
      app.add_subcommand("p2p-eval", "policy success rate binned by goal distance");
  std::string pe_map, pe_policy = "dwa", pe_out = "p2p.csv", pe_bins = "0,2,4,6,8,10";
  int pe_trials = 200;
  uint64_t pe_seed = 1;
  LidarConfig pe_lidar;
  pe_lidar.n_beams = 16;
  p2p_cmd->add_option("--map", pe_map, "map file")->required();
  p2p_cmd->add_option("--policy", pe_policy, "policy spec");
  p2p_cmd->add_option("--bins", pe_bins, "bin edges, m, comma separated");
  p2p_cmd->add_option("--trials", pe_trials, "sampled start/goal pairs");
  p2p_cmd->add_option("--seed", pe_seed, "rng seed");
  p2p_cmd->add_option("--out", pe_out, "CSV output path");
  add_lidar_options(p2p_cmd, pe_lidar);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_policy_cmd) {
      return run_train_policy(tp_map, tp_robot, tp_out, tp_lidar, tp_episodes, tp_seed,
                              tp_radius, tp_eval_trials);
    }

    if (*collect_cmd) {
      const OccupancyGrid grid = load_map(ct_map);
      const auto policy = resolve_policy(ct_policy, ct_lidar);
      TTRConfig cfg = default_ttr_config(policy->robot_kind());
      cfg.dt = ct_dt;
      if (ct_horizon > 0.0) {
        cfg.T_horizon = ct_horizon;
        cfg.ttr_threshold = ct_horizon;
      }
      cfg.n_episodes = ct_episodes;
      cfg.goal_sample_radius = ct_radius;
      Rng rng(ct_seed);
      const TtrDataset ds = collect_training_data(*policy, grid, cfg, rng);
      save_dataset(ds, ct_out);
      std::set<uint32_t> eps, failed;
      for (const auto& row : ds.rows) {
        eps.insert(row.episode);
        if (row.label > ds.T_horizon) failed.insert(row.episode);
      }
      std::cout << "wrote " << ds.rows.size() << " samples over " << eps.size()
                << " episodes (" << eps.size() - failed.size()
                << " reached the goal) to " << ct_out << "\n";
      return 0;
    }

    if (*train_est_cmd) {
      const TtrDataset ds = load_dataset(te_data);
      EstimatorTrainConfig cfg;
      cfg.base = {te_lr, te_batch, te_epochs, te_seed, te_l2};
      cfg.hidden = parse_dims(te_hidden);
      cfg.dropout_p = te_dropout;
      cfg.holdout_fraction = te_holdout;
      EstimatorReport report;
      const ReachabilityEstimator est = te_success_only
                                            ? train_ttr_only_estimator(ds, cfg, &report)
                                            : train_estimator(ds, cfg, &report);
      save_estimator(est, te_out);
      std::cout << format_metrics_table(report.heldout);
      std::cout << "held-out mse " << report.heldout_mse << ", mean signed error on "
                << "reachable samples " << report.mean_signed_error_success << "\n";
      std::cout << "checkpoint: " << te_out << ".{wts,json}\n";
      return 0;
    }

    if (*plan_cmd) {
      const OccupancyGrid grid = load_map(pl_map);
      const RobotKind kind = robot_kind_from_name(pl_robot);
      const RobotState start = parse_state(kind, pl_start);
      const GoalSpec goal{parse_point(pl_goal), pl_cfg.goal_radius};
      Rng rng(pl_seed);

      PlanResult result;
      PlanTrace trace;
      if (pl_planner == "sst") {
        pl_sst.time_budget = pl_cfg.time_budget;
        pl_sst.max_iterations = pl_cfg.max_iterations;
        pl_sst.goal_radius = pl_cfg.goal_radius;
        pl_sst.p_goal_bias = pl_cfg.p_goal_bias;
        TreeDump dump;
        result = sst_plan(grid, start, goal, pl_sst, rng, &dump);
        if (!pl_tree_out.empty()) write_tree_json(dump, pl_tree_out);
      } else {
        std::unique_ptr<LocalPlannerPolicy> policy;
        if (pl_planner == "rrt-dw" || pl_planner == "rrt-s") {
          result = rrt_steer_plan(grid, start, goal, pl_planner == "rrt-dw", pl_lidar,
                                  pl_cfg, rng, &trace);
        } else if (pl_planner == "rl-rrt-e") {
          policy = resolve_policy(pl_policy, pl_lidar);
          result = rl_rrt_euclidean(grid, start, goal, *policy, pl_cfg, rng, &trace);
        } else if (pl_planner == "rl-rrt") {
          if (pl_estimator.empty())
            throw CLI::ValidationError("rl-rrt requires --estimator");
          policy = resolve_policy(pl_policy, pl_lidar);
          const ReachabilityEstimator est = load_estimator(pl_estimator);
          pl_cfg.ttr_threshold = est.ttr_threshold;
          result = rl_rrt(grid, start, goal, *policy, est, pl_cfg, rng, &trace);
        } else {
          throw CLI::ValidationError("unknown planner: " + pl_planner);
        }
        if (!pl_tree_out.empty())
          write_tree_json(dump_tree_nodes(trace.tree_nodes, pl_planner), pl_tree_out);
      }
      result.seed = pl_seed;

      std::ostringstream echo;
      echo << "planner=" << pl_planner << " seed=" << pl_seed
           << " budget=" << pl_cfg.time_budget << " iterations=" << pl_cfg.max_iterations;
      if (!pl_out.empty()) write_plan_json(result, echo.str(), pl_out);
      std::cout << (result.success ? "SUCCESS" : "FAILURE") << " planner=" << pl_planner
                << " tree=" << result.stats.tree_size
                << " samples=" << result.stats.samples_drawn
                << " pruned=" << result.stats.pruned_count
                << " wall=" << result.stats.wall_seconds << "s";
      if (result.success) std::cout << " finish_time=" << result.plan.finish_time << "s";
      std::cout << "\n";
      return result.success ? 0 : 2;
    }

    if (*bench_cmd) {
      const OccupancyGrid grid = load_map(be_map);
      ExperimentConfig cfg;
      cfg.map_path = be_map;
      cfg.kind = robot_kind_from_name(be_robot);
      std::istringstream planners(be_planners);
      std::string tok;
      while (std::getline(planners, tok, ',')) cfg.planners.push_back(tok);
      cfg.trials = be_trials;
      cfg.budgets = parse_doubles(be_budgets);
      cfg.budget_mode =
          be_mode == "iterations" ? BudgetMode::Iterations : BudgetMode::WallTime;
      cfg.seed_base = be_seed;
      cfg.lidar = be_lidar;
      cfg.planner = be_planner_cfg;
      cfg.sst = be_sst_cfg;
      if (!be_start.empty()) {
        cfg.start = parse_state(cfg.kind, be_start);
        cfg.goal = parse_point(be_goal);
      }
      cfg.sample_pairs = be_sample_pairs || be_start.empty();
      cfg.min_pair_distance = be_min_pair;

      std::unique_ptr<LocalPlannerPolicy> policy;
      bool needs_policy = false;
      for (const auto& name : cfg.planners)
        needs_policy |= name == "rl-rrt" || name == "rl-rrt-e";
      if (needs_policy) policy = resolve_policy(be_policy, be_lidar);
      ReachabilityEstimator est;
      const ReachabilityEstimator* est_ptr = nullptr;
      for (const auto& name : cfg.planners) {
        if (name == "rl-rrt") {
          if (be_estimator.empty())
            throw CLI::ValidationError("rl-rrt in --planners requires --estimator");
          est = load_estimator(be_estimator);
          cfg.planner.ttr_threshold = est.ttr_threshold;
          est_ptr = &est;
          break;
        }
      }

      const auto records = run_experiment(cfg, grid, policy.get(), est_ptr);
      std::ofstream out(be_out);
      out << records_to_csv(records);
      const auto curves = success_curve(records, cfg.budgets, cfg.budget_mode);
      const char* unit = cfg.budget_mode == BudgetMode::WallTime ? "s" : "it";
      for (const auto& [name, curve] : curves) {
        std::cout << name << ":";
        for (size_t b = 0; b < curve.size(); ++b)
          std::cout << "  " << cfg.budgets[b] << unit << " -> " << curve[b];
        std::cout << "\n";
      }
      std::cout << "records: " << be_out << "\n";
      return 0;
    }

    if (*contour_cmd) {
      const OccupancyGrid grid = load_map(co_map);
      const GoalSpec goal{parse_point(co_goal), 0.5};
      Rng rng(co_seed);
      ContourField field;
      if (!co_estimator.empty()) {
        const ReachabilityEstimator est = load_estimator(co_estimator);
        field = ttr_contour_predicted(est, grid, goal, co_step, rng);
      } else if (!co_oracle_policy.empty()) {
        const auto policy = resolve_policy(co_oracle_policy, co_lidar);
        TTRConfig cfg = default_ttr_config(policy->robot_kind());
        if (co_horizon > 0.0) {
          cfg.T_horizon = co_horizon;
          cfg.ttr_threshold = co_horizon;
        }
        field = ttr_contour_oracle(*policy, grid, goal, co_step, cfg, rng);
      } else {
        throw CLI::ValidationError("need --estimator or --oracle-policy");
      }
      write_contour_csv(field, co_out);
      long unreachable = 0;
      for (uint8_t u : field.unreachable) unreachable += u;
      std::cout << field.points.size() << " lattice points, " << unreachable
                << " beyond the horizon; wrote " << co_out << "\n";
      return 0;
    }

    if (*render_cmd) {
      const OccupancyGrid grid = load_map(re_map);
      std::vector<TreeDump> trees;
      for (const auto& path : re_trees) trees.push_back(read_tree_json(path));
      std::vector<MotionPlan> plans;
      for (const auto& path : re_plans) plans.push_back(read_plan_states(path));
      std::optional<Vec2> start;
      if (!re_start.empty()) start = parse_point(re_start);
      std::optional<GoalSpec> goal;
      if (!re_goal.empty()) goal = GoalSpec{parse_point(re_goal), 0.5};
      render_svg(grid, trees, plans, start, goal, re_out);
      std::cout << "wrote " << re_out << "\n";
      return 0;
    }

    if (*p2p_cmd) {
      const OccupancyGrid grid = load_map(pe_map);
      const auto policy = resolve_policy(pe_policy, pe_lidar);
      EpisodeConfig cfg;
      Rng rng(pe_seed);
      const auto bins = p2p_success_by_distance(*policy, grid, parse_doubles(pe_bins),
                                                pe_trials, cfg, rng);
      std::ofstream out(pe_out);
      out << "bin_lo,bin_hi,trials,successes,rate\n";
      for (const auto& b : bins) {
        out << b.lo << "," << b.hi << "," << b.trials << "," << b.successes << ","
            << b.rate() << "\n";
        std::cout << "[" << b.lo << ", " << b.hi << ") m: " << b.successes << "/"
                  << b.trials << " = " << b.rate() << "\n";
      }
      std::cout << "wrote " << pe_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
