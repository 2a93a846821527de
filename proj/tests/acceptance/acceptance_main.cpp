// Acceptance suite: runs every acceptance criterion at its pinned tolerance
// and prints one PASS/FAIL line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kinoplan/bench.hpp"
#include "kinoplan/svg.hpp"

using namespace kinoplan;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail,
            double seconds) {
  std::printf("[%2d] %s  %-34s %s  (%.1f s)\n", id, pass ? "PASS" : "FAIL", name.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

LidarConfig accept_lidar() {
  LidarConfig lidar;
  lidar.n_beams = 16;  // desk scale; full scale uses 64 beams
  lidar.noise_sigma = 0.1;
  return lidar;
}

// ---------------------------------------------------------------- criterion 1
void criterion_dynamics() {
  Timer t;
  bool pass = true;
  std::string detail;

  RobotState coasting;
  coasting.kind = RobotKind::Asteroid;
  coasting.vel = {1.0, 0.0};
  const RobotAction coast{RobotKind::Asteroid, {0.0, 0.0}};
  double worst = 0.0;
  for (double tt : {0.5, 1.0, 2.0}) {
    const RobotState out = propagate(coasting, coast, tt);
    worst = std::max(worst, std::abs(out.vel[0] - std::exp(-tt)));
  }
  pass &= worst < 1e-3;

  RobotState rest;
  rest.kind = RobotKind::Asteroid;
  const RobotState at7 = propagate(rest, {RobotKind::Asteroid, {1.0, 0.0}}, 7.0);
  const double terminal = std::hypot(at7.vel[0], at7.vel[1]);
  pass &= terminal >= 0.99 && terminal <= 1.0 + 1e-12;

  detail = fmt("drag err %.2e (<1e-3), speed(7s) %.4f (>=0.99)", worst, terminal);
  report(1, pass, "dynamics closed forms", detail, t.seconds());
}

// ---------------------------------------------------------------- criterion 2
double batch_loss(const NeuralNet& net, const std::vector<Sample>& batch) {
  double loss = 0.0;
  for (const auto& [x, tgt] : batch) {
    const auto y = net.forward(x);
    for (size_t k = 0; k < tgt.size(); ++k) loss += (y[k] - tgt[k]) * (y[k] - tgt[k]);
  }
  return loss / static_cast<double>(batch.size());
}

void criterion_gradients() {
  Timer t;
  double worst = 0.0;
  int checked = 0;
  Rng rng(20240001);
  while (checked < 10) {
    std::vector<int> dims{static_cast<int>(2 + rng() % 3)};
    const int hidden = static_cast<int>(1 + rng() % 2);
    for (int i = 0; i < hidden; ++i) dims.push_back(static_cast<int>(2 + rng() % 4));
    dims.push_back(static_cast<int>(1 + rng() % 2));
    NeuralNet net(dims, OutputActivation::Identity, 0.0, rng());

    std::vector<Sample> batch;
    for (int i = 0; i < 4; ++i) {
      std::vector<double> x(static_cast<size_t>(dims.front()));
      for (double& v : x) v = uniform(rng, -1.0, 1.0);
      std::vector<double> y(static_cast<size_t>(dims.back()));
      for (double& v : y) v = uniform(rng, -1.0, 1.0);
      batch.push_back({std::move(x), std::move(y)});
    }

    // Keep the finite-difference oracle away from ReLU kinks.
    bool smooth = true;
    for (const auto& [x, tgt] : batch) {
      (void)tgt;
      std::vector<double> act = x;
      for (size_t l = 0; l + 1 < dims.size() && smooth; ++l) {
        std::vector<double> next(static_cast<size_t>(dims[l + 1]));
        for (int o = 0; o < dims[l + 1]; ++o) {
          double acc = net.biases(l)[static_cast<size_t>(o)];
          for (int i = 0; i < dims[l]; ++i)
            acc += net.weights(l)[static_cast<size_t>(o) * dims[l] + i] *
                   act[static_cast<size_t>(i)];
          next[static_cast<size_t>(o)] = acc;
          if (l + 2 < dims.size() && std::abs(acc) < 1e-3) smooth = false;
        }
        if (l + 2 < dims.size())
          for (double& v : next) v = std::max(0.0, v);
        act = std::move(next);
      }
    }
    if (!smooth) continue;
    ++checked;

    auto [loss, analytic] = l2_loss_grad(net, batch);
    (void)loss;
    const double h = 1e-5;
    for (size_t l = 0; l < net.n_layers(); ++l) {
      auto check_param = [&](double& p, double analytic_g) {
        const double orig = p;
        p = orig + h;
        const double up = batch_loss(net, batch);
        p = orig - h;
        const double down = batch_loss(net, batch);
        p = orig;
        const double fd = (up - down) / (2 * h);
        const double denom = std::max({std::abs(analytic_g), std::abs(fd), 1.0});
        worst = std::max(worst, std::abs(analytic_g - fd) / denom);
      };
      for (size_t i = 0; i < net.weights(l).size(); ++i)
        check_param(net.weights(l)[i], analytic.w[l][i]);
      for (size_t i = 0; i < net.biases(l).size(); ++i)
        check_param(net.biases(l)[i], analytic.b[l][i]);
    }
  }
  report(2, worst < 1e-4, "gradient correctness",
         fmt("max rel err %.2e over 10 nets (<1e-4)", worst), t.seconds());
}

// ---------------------------------------------------------------- criterion 3
void criterion_labeling() {
  Timer t;
  // Dyadic step so every cost and suffix sum is exact in double precision.
  TTRConfig cfg;
  cfg.dt = 0.125;
  cfg.T_horizon = 20.0;
  cfg.ttr_threshold = 20.0;
  const long horizon_steps = std::lround(cfg.T_horizon / cfg.dt);

  Rng rng(20240003);
  bool pass = true;
  int successes = 0, failures = 0;
  for (int ep = 0; ep < 100; ++ep) {
    const int outcome = static_cast<int>(rng() % 3);  // reach / collide / timeout
    long steps;
    bool collided = false, reached = false;
    if (outcome == 0) {
      steps = 1 + static_cast<long>(rng() % (horizon_steps - 1));
      reached = true;
      ++successes;
    } else if (outcome == 1) {
      steps = 1 + static_cast<long>(rng() % horizon_steps);
      collided = true;
      ++failures;
    } else {
      steps = horizon_steps;
      ++failures;
    }

    std::vector<double> costs;
    for (long i = 1; i <= steps; ++i) {
      const bool last = i == steps;
      const auto [cost, done] =
          ttr_step_cost(static_cast<double>(i) * cfg.dt, last && collided,
                        last && reached, cfg);
      costs.push_back(cost);
      if (last) pass &= done;
    }
    const std::vector<double> labels = cumulative_future_cost(costs);

    if (reached) {
      for (size_t i = 0; i < labels.size(); ++i) {
        pass &= labels[i] <= cfg.T_horizon;
        if (i + 1 < labels.size()) pass &= labels[i] - labels[i + 1] == cfg.dt;  // exact
      }
      pass &= labels.back() == cfg.dt;
    } else {
      for (double l : labels) pass &= l > cfg.T_horizon;
    }
  }
  report(3, pass, "labeling dichotomy",
         fmt("100 episodes (%d reach, %d fail), exact at dt=0.125", successes, failures),
         t.seconds());
}

// Shared artifacts built once and reused by criteria 4-8.
struct Artifacts {
  OccupancyGrid training;
  OccupancyGrid office;
  OccupancyGrid corridors;
  TtrDataset dataset;       // 90% training split
  std::vector<TtrDataset::Row> eval_rows_success;  // success rows, held-out episodes
  ReachabilityEstimator estimator;
  double full_signed_error = 0.0;
};

Artifacts build_artifacts() {
  Artifacts a{load_map("maps/training.map"), load_map("maps/office.map"),
              load_map("maps/corridors.map"), {}, {}, {}, 0.0};

  DwaPolicy policy(accept_lidar(), DwaConfig{}, true);
  TTRConfig cfg = default_ttr_config(RobotKind::DiffDrive);
  cfg.n_episodes = 800;
  Rng rng(3);
  TtrDataset full = collect_training_data(policy, a.training, cfg, rng);

  // Explicit episode split: 10% of episodes form the shared evaluation set so
  // the full and success-only models are compared on identical rows.
  std::set<uint32_t> episodes;
  for (const auto& row : full.rows) episodes.insert(row.episode);
  std::vector<uint32_t> ids(episodes.begin(), episodes.end());
  Rng split_rng(41);
  std::shuffle(ids.begin(), ids.end(), split_rng);
  const size_t n_eval = ids.size() / 10;
  std::set<uint32_t> eval_ids(ids.begin(), ids.begin() + static_cast<long>(n_eval));

  a.dataset = full;
  a.dataset.rows.clear();
  std::set<uint32_t> eval_success_episodes;
  for (const auto& row : full.rows)
    if (row.label <= full.T_horizon && eval_ids.count(row.episode))
      eval_success_episodes.insert(row.episode);
  for (const auto& row : full.rows) {
    if (eval_ids.count(row.episode)) {
      if (eval_success_episodes.count(row.episode)) a.eval_rows_success.push_back(row);
    } else {
      a.dataset.rows.push_back(row);
    }
  }
  return a;
}

EstimatorTrainConfig accept_estimator_config() {
  EstimatorTrainConfig cfg;
  cfg.base = {1e-3, 64, 40, 5, 1e-5};
  cfg.hidden = {128, 64, 32};  // desk scale; the full-scale default is 500/200/100
  cfg.dropout_p = 0.2;
  cfg.holdout_fraction = 0.1;
  return cfg;
}

// ---------------------------------------------------------------- criterion 4
void criterion_estimator_quality(Artifacts& a) {
  Timer t;
  EstimatorReport report_full;
  a.estimator = train_estimator(a.dataset, accept_estimator_config(), &report_full);

  // Accuracy on the internal held-out split plus the shared eval rows.
  ClassificationMetrics m;
  double signed_err = 0.0;
  long n_success = 0;
  for (const auto& row : a.eval_rows_success) {
    Observation o;
    o.kind = a.dataset.kind;
    o.n_beams = a.dataset.n_beams;
    o.values = row.observation;
    const double pred = predict_ttr(a.estimator, o);
    signed_err += pred - row.label;
    ++n_success;
  }
  if (n_success > 0) signed_err /= static_cast<double>(n_success);
  a.full_signed_error = signed_err;
  m = report_full.heldout;

  const bool pass = m.accuracy() >= 0.70;
  report(4, pass, "estimator accuracy",
         fmt("held-out acc %.3f (>=0.70), precision %.3f, recall %.3f, %ld samples",
             m.accuracy(), m.precision(), m.recall(), m.total()),
         t.seconds());
}

// ---------------------------------------------------------------- criterion 5
void criterion_overestimation(const Artifacts& a) {
  Timer t;
  ReachabilityEstimator ttr_only =
      train_ttr_only_estimator(a.dataset, accept_estimator_config());

  double signed_err = 0.0;
  long n = 0;
  for (const auto& row : a.eval_rows_success) {
    Observation o;
    o.kind = a.dataset.kind;
    o.n_beams = a.dataset.n_beams;
    o.values = row.observation;
    signed_err += predict_ttr(ttr_only, o) - row.label;
    ++n;
  }
  if (n > 0) signed_err /= static_cast<double>(n);

  const bool pass = signed_err <= a.full_signed_error;
  report(5, pass, "overestimation diagnostic",
         fmt("success-only %.3f s <= full %.3f s (on %ld shared rows)", signed_err,
             a.full_signed_error, n),
         t.seconds());
}

PlannerConfig corridor_planner_config() {
  PlannerConfig cfg;
  cfg.k_c = 10;         // deep enough that candidate pools span nearby walls
  cfg.p_prune = 0.9;
  cfg.dt_tree = 0.5;
  cfg.t_max_extend = 12.0;
  return cfg;
}

// ---------------------------------------------------------------- criterion 6
void criterion_feasibility(const Artifacts& a) {
  Timer t;
  DwaPolicy policy(accept_lidar(), DwaConfig{}, true);
  long plans_checked = 0;
  double worst_err = 0.0;
  bool pass = true;

  struct Fixture {
    const OccupancyGrid* grid;
    RobotState start;
    Vec2 goal;
  };
  RobotState office_start;
  office_start.kind = RobotKind::DiffDrive;
  office_start.x = 4.0;
  office_start.y = 4.0;
  RobotState corridor_start = office_start;
  corridor_start.x = 2.0;
  corridor_start.y = 2.0;
  const std::vector<Fixture> fixtures{{&a.office, office_start, {28.0, 20.0}},
                                      {&a.corridors, corridor_start, {38.0, 27.9}}};

  for (const auto& fixture : fixtures) {
    PlannerConfig pc = corridor_planner_config();
    pc.ttr_threshold = a.estimator.ttr_threshold;
    pc.time_budget = 3.0;
    SstConfig sc;
    sc.time_budget = 1.5;
    for (int trial = 0; trial < 50; ++trial) {
      const uint64_t seed = 500 + static_cast<uint64_t>(trial);
      Rng rng1(seed);
      const PlanResult r1 = rl_rrt(*fixture.grid, fixture.start,
                                   {fixture.goal, pc.goal_radius}, policy, a.estimator,
                                   pc, rng1);
      Rng rng2(seed);
      const PlanResult r2 =
          sst_plan(*fixture.grid, fixture.start, {fixture.goal, sc.goal_radius}, sc, rng2);
      for (const PlanResult* r : {&r1, &r2}) {
        if (!r->success) continue;
        const PlanCheck check = verify_plan(r->plan, *fixture.grid, pc);
        pass &= check.replays && check.collision_free;
        worst_err = std::max(worst_err, check.max_state_error);
        ++plans_checked;
      }
    }
  }
  report(6, pass, "plan feasibility",
         fmt("%ld plans replayed, max state err %.2e (<=1e-9), all collision-free",
             plans_checked, worst_err),
         t.seconds());
}

// ---------------------------------------------------------------- criterion 7
void criterion_qualitative_ordering(const Artifacts& a) {
  Timer t;
  DwaPolicy policy(accept_lidar(), DwaConfig{}, true);

  ExperimentConfig cfg;
  cfg.kind = RobotKind::DiffDrive;
  cfg.planners = {"rl-rrt", "sst"};
  cfg.trials = 50;
  cfg.budgets = {12.0};
  cfg.budget_mode = BudgetMode::WallTime;
  cfg.seed_base = 700;
  cfg.start.kind = RobotKind::DiffDrive;
  cfg.start.x = 2.0;
  cfg.start.y = 2.0;
  cfg.goal = {38.0, 27.9};
  cfg.lidar = accept_lidar();
  cfg.planner = corridor_planner_config();
  cfg.planner.ttr_threshold = a.estimator.ttr_threshold;

  const auto records = run_experiment(cfg, a.corridors, &policy, &a.estimator);

  auto stats = [&records](const std::string& name) {
    std::vector<double> finishes;
    long successes = 0, total = 0;
    for (const auto& r : records) {
      if (r.planner != name) continue;
      ++total;
      if (r.success) {
        ++successes;
        finishes.push_back(*r.finish_time);
      }
    }
    std::sort(finishes.begin(), finishes.end());
    const double median =
        finishes.empty() ? -1.0 : finishes[finishes.size() / 2];
    return std::tuple<long, long, double>{successes, total, median};
  };
  const auto [rl_succ, rl_total, rl_median] = stats("rl-rrt");
  const auto [sst_succ, sst_total, sst_median] = stats("sst");

  // With no successful SST run the finish-time clause is vacuous.
  const bool finish_ok = sst_succ == 0 || (rl_succ > 0 && rl_median < sst_median);
  const bool pass = rl_succ >= sst_succ && finish_ok;
  report(7, pass, "corridor ordering vs SST",
         fmt("success %ld/%ld vs %ld/%ld; median finish %.1f vs %.1f s @12 s budget",
             rl_succ, rl_total, sst_succ, sst_total, rl_median, sst_median),
         t.seconds());
}

// ---------------------------------------------------------------- criterion 8
void criterion_ablation(const Artifacts& a) {
  Timer t;
  DwaPolicy policy(accept_lidar(), DwaConfig{}, true);

  ExperimentConfig cfg;
  cfg.kind = RobotKind::DiffDrive;
  cfg.planners = {"rl-rrt", "rl-rrt-e"};
  cfg.trials = 50;
  cfg.budgets = {100, 200, 400, 800};
  cfg.budget_mode = BudgetMode::Iterations;
  cfg.seed_base = 800;
  cfg.start.kind = RobotKind::DiffDrive;
  cfg.start.x = 4.0;
  cfg.start.y = 4.0;
  cfg.goal = {28.0, 20.0};
  cfg.lidar = accept_lidar();
  cfg.planner = corridor_planner_config();
  cfg.planner.ttr_threshold = a.estimator.ttr_threshold;

  const auto records = run_experiment(cfg, a.office, &policy, &a.estimator);
  const auto curves = success_curve(records, cfg.budgets, cfg.budget_mode);
  const auto& rl = curves.at("rl-rrt");
  const auto& eu = curves.at("rl-rrt-e");

  bool dominates = true, strict = false;
  std::string curve_text;
  for (size_t b = 0; b < cfg.budgets.size(); ++b) {
    dominates &= rl[b] >= eu[b];
    strict |= rl[b] > eu[b];
    curve_text += fmt("%g:%0.2f/%0.2f ", cfg.budgets[b], rl[b], eu[b]);
  }
  report(8, dominates && strict, "ablation dominance (vs Euclidean)",
         fmt("success at iters {rl-rrt/rl-rrt-e} %s", curve_text.c_str()), t.seconds());
}

// ---------------------------------------------------------------- criterion 9
void criterion_oracle_pruning(const Artifacts& a) {
  Timer t;
  DwaPolicy policy(accept_lidar(), DwaConfig{}, true);
  TTRConfig tcfg = default_ttr_config(RobotKind::DiffDrive);

  // Ground-truth rollout TTR substituted for the estimator.
  const AvgTtrFn oracle = [&](const RobotState& from, const RobotState& to, Rng& rng) {
    return rollout_ttr(policy, a.training, from, to.position(), tcfg, rng);
  };

  PlannerConfig cfg;
  cfg.k_c = 3;
  cfg.p_prune = 1.0;
  cfg.ttr_threshold = tcfg.T_horizon;
  cfg.dt_tree = 1.0;
  cfg.t_max_extend = 10.0;
  cfg.time_budget = 0.0;
  cfg.max_iterations = 25;
  cfg.max_samples_per_iteration = 40;

  long extended = 0, unreachable_extended = 0, pruned = 0;
  for (int run = 0; run < 20; ++run) {
    Rng pair_rng(900 + static_cast<uint64_t>(run));
    const RobotState start =
        sample_free_state(a.training, RobotKind::DiffDrive, pair_rng, GoalSpec{}, 0.0);
    const Vec2 goal = sample_free_position(a.training, pair_rng);

    PlanTrace trace;
    Rng rng(910 + static_cast<uint64_t>(run));
    rl_rrt_with_distance(a.training, start, {goal, cfg.goal_radius}, policy, &oracle, cfg,
                         rng, "rl-rrt-oracle", &trace);
    for (const auto& s : trace.samples) {
      if (s.pruned) {
        ++pruned;
        continue;
      }
      ++extended;
      if (s.avg_ttr >= cfg.ttr_threshold) ++unreachable_extended;
    }
  }
  report(9, unreachable_extended == 0, "oracle pruning soundness",
         fmt("%ld extended, %ld pruned, %ld unreachable extended (==0)", extended, pruned,
             unreachable_extended),
         t.seconds());
}

// --------------------------------------------------------------- criterion 10
void criterion_selection_equivalence() {
  Timer t;
  Rng rng(20240010);
  bool pass = true;
  // Deterministic synthetic distance with non-Euclidean structure.
  const AvgTtrFn synth = [](const RobotState& from, const RobotState& to, Rng&) {
    const double d = state_distance_euclidean(from, to);
    return d + 3.0 * std::sin(1.7 * from.x + 0.9 * to.y) + 2.0 * std::cos(from.y - to.x);
  };

  for (int trial = 0; trial < 1000 && pass; ++trial) {
    Tree tree(20.0, 20.0);
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      Node node;
      node.state.kind = RobotKind::DiffDrive;
      node.state.x = uniform(rng, 0, 20);
      node.state.y = uniform(rng, 0, 20);
      node.parent = i == 0 ? -1 : static_cast<int>(rng() % i);
      node.arrival_time = i == 0 ? 0.0 : tree.node(node.parent).arrival_time + 1.0;
      tree.add(std::move(node));
    }
    RobotState target;
    target.kind = RobotKind::DiffDrive;
    target.x = uniform(rng, 0, 20);
    target.y = uniform(rng, 0, 20);

    Rng r1(1);
    const auto [chosen, chosen_ttr] =
        select_nearest_hierarchical(tree, target, synth, tree.size() + 5, r1);
    int best = -1;
    double best_ttr = 0.0;
    Rng r2(1);
    for (int i = 0; i < tree.size(); ++i) {
      const double v = synth(tree.node(i).state, target, r2);
      if (best < 0 || v < best_ttr) {
        best = i;
        best_ttr = v;
      }
    }
    pass &= chosen == best && chosen_ttr == best_ttr;
  }
  report(10, pass, "hierarchical selection equivalence", "1000 random trees vs argmin",
         t.seconds());
}

}  // namespace

int main() {
  std::printf("acceptance suite (desk scale)\n");
  Timer total;

  criterion_dynamics();
  criterion_gradients();
  criterion_labeling();

  std::printf("building shared artifacts (dataset + maps)...\n");
  Artifacts artifacts = build_artifacts();

  criterion_estimator_quality(artifacts);
  criterion_overestimation(artifacts);
  criterion_feasibility(artifacts);
  criterion_qualitative_ordering(artifacts);
  criterion_ablation(artifacts);
  criterion_oracle_pruning(artifacts);
  criterion_selection_equivalence();

  std::printf("%d/10 criteria passed (total %.0f s)\n", 10 - g_failures, total.seconds());
  return g_failures == 0 ? 0 : 1;
}
