#include "kinoplan/estimator.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "kinoplan/sampling.hpp"

namespace kinoplan {

using nlohmann::json;

TTRConfig default_ttr_config(RobotKind kind) {
  TTRConfig cfg;
  cfg.T_horizon = kind == RobotKind::Car ? 40.0 : 20.0;
  cfg.ttr_threshold = cfg.T_horizon;
  return cfg;
}

std::pair<double, bool> ttr_step_cost(double elapsed, bool collided, bool reached,
                                      const TTRConfig& cfg) {
  if (collided || elapsed >= cfg.T_horizon - 1e-9) return {cfg.dt + cfg.T_horizon, true};
  if (reached) return {cfg.dt, true};
  return {cfg.dt, false};
}

std::vector<double> cumulative_future_cost(const std::vector<double>& cost_history) {
  if (cost_history.empty())
    throw std::invalid_argument("cumulative_future_cost: empty cost history");
  std::vector<double> out(cost_history.size());
  double acc = 0.0;
  for (size_t i = cost_history.size(); i-- > 0;) {
    acc += cost_history[i];
    out[i] = acc;
  }
  return out;
}

TtrDataset collect_training_data(const LocalPlannerPolicy& policy,
                                 const OccupancyGrid& grid, const TTRConfig& cfg,
                                 Rng& rng) {
  TtrDataset ds;
  ds.kind = policy.robot_kind();
  ds.n_beams = policy.lidar_config().n_beams;
  ds.max_range = policy.lidar_config().max_range;
  ds.dt = cfg.dt;
  ds.T_horizon = cfg.T_horizon;
  ds.goal_sample_radius = cfg.goal_sample_radius;
  ds.n_episodes = cfg.n_episodes;

  EpisodeConfig ep_cfg;
  ep_cfg.dt_policy = cfg.dt;
  ep_cfg.max_episode_time = cfg.T_horizon;
  ep_cfg.goal_radius = cfg.goal_radius;
  ep_cfg.robot_radius = cfg.robot_radius;

  for (int ep = 0; ep < cfg.n_episodes; ++ep) {
    const RobotState start =
        sample_free_state(grid, ds.kind, rng, GoalSpec{}, 0.0, cfg.robot_radius);
    GoalSpec goal;
    goal.radius = cfg.goal_radius;
    // Goal distance drawn uniformly (not area-uniformly) so near and far
    // targets are equally represented in the labels.
    for (int tries = 0;; ++tries) {
      const double d = uniform(rng, 2.0 * goal.radius, cfg.goal_sample_radius);
      const double ang = uniform(rng, -M_PI, M_PI);
      const Vec2 g{start.x + d * std::cos(ang), start.y + d * std::sin(ang)};
      if (point_free(grid, g, cfg.robot_radius)) {
        goal.position = g;
        break;
      }
      if (tries > 10000)
        throw std::runtime_error("collect_training_data: cannot sample goal near start");
    }

    const RolloutResult r = rollout(policy, grid, start, goal, ep_cfg, rng);
    if (r.steps.empty()) continue;  // started inside the goal radius

    std::vector<double> costs;
    costs.reserve(r.steps.size());
    for (size_t i = 0; i < r.steps.size(); ++i) {
      const bool last = i + 1 == r.steps.size();
      const double elapsed = static_cast<double>(i + 1) * cfg.dt;
      const bool collided = last && r.outcome == RolloutOutcome::Collided;
      const bool reached = last && r.outcome == RolloutOutcome::Reached;
      costs.push_back(ttr_step_cost(elapsed, collided, reached, cfg).first);
    }
    const std::vector<double> labels = cumulative_future_cost(costs);
    for (size_t i = 0; i < r.steps.size(); ++i)
      ds.rows.push_back({static_cast<uint32_t>(ep), static_cast<uint32_t>(i),
                         r.steps[i].observation.values, labels[i]});
  }
  return ds;
}

namespace {
constexpr char kDatasetMagic[8] = {'K', 'P', 'T', 'T', 'R', '0', '0', '1'};

template <typename T>
void write_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("dataset file truncated");
  return v;
}
}  // namespace

void save_dataset(const TtrDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out.write(kDatasetMagic, sizeof(kDatasetMagic));
  write_raw<uint32_t>(out, static_cast<uint32_t>(ds.kind));
  write_raw<uint32_t>(out, static_cast<uint32_t>(ds.n_beams));
  write_raw<double>(out, ds.max_range);
  write_raw<double>(out, ds.dt);
  write_raw<double>(out, ds.T_horizon);
  write_raw<double>(out, ds.goal_sample_radius);
  write_raw<uint32_t>(out, static_cast<uint32_t>(ds.n_episodes));
  write_raw<uint64_t>(out, ds.rows.size());
  for (const auto& row : ds.rows) {
    write_raw<uint32_t>(out, row.episode);
    write_raw<uint32_t>(out, row.step);
    out.write(reinterpret_cast<const char*>(row.observation.data()),
              static_cast<std::streamsize>(row.observation.size() * sizeof(double)));
    write_raw<double>(out, row.label);
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

TtrDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open dataset");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kDatasetMagic, sizeof(kDatasetMagic)) != 0)
    throw std::runtime_error(path + ": not a TTR dataset");
  TtrDataset ds;
  ds.kind = static_cast<RobotKind>(read_raw<uint32_t>(in));
  ds.n_beams = static_cast<int>(read_raw<uint32_t>(in));
  ds.max_range = read_raw<double>(in);
  ds.dt = read_raw<double>(in);
  ds.T_horizon = read_raw<double>(in);
  ds.goal_sample_radius = read_raw<double>(in);
  ds.n_episodes = static_cast<int>(read_raw<uint32_t>(in));
  const uint64_t n_rows = read_raw<uint64_t>(in);
  const auto dim = static_cast<size_t>(ds.observation_dim());
  ds.rows.resize(n_rows);
  for (auto& row : ds.rows) {
    row.episode = read_raw<uint32_t>(in);
    row.step = read_raw<uint32_t>(in);
    row.observation.resize(dim);
    in.read(reinterpret_cast<char*>(row.observation.data()),
            static_cast<std::streamsize>(dim * sizeof(double)));
    row.label = read_raw<double>(in);
    if (!in) throw std::runtime_error(path + ": dataset truncated");
  }
  return ds;
}

TtrDataset filter_success_episodes(const TtrDataset& ds) {
  std::set<uint32_t> failed;
  for (const auto& row : ds.rows)
    if (row.label > ds.T_horizon) failed.insert(row.episode);
  TtrDataset out = ds;
  out.rows.clear();
  std::set<uint32_t> kept;
  for (const auto& row : ds.rows) {
    if (failed.count(row.episode)) continue;
    out.rows.push_back(row);
    kept.insert(row.episode);
  }
  out.n_episodes = static_cast<int>(kept.size());
  return out;
}

std::string format_metrics_table(const ClassificationMetrics& m) {
  const double n = std::max<long>(m.total(), 1);
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "confusion (%% of %ld held-out samples)\n", m.total());
  os << buf;
  std::snprintf(buf, sizeof(buf), "  pred reachable   | %5.1f | %5.1f |\n", 100.0 * m.tp / n,
                100.0 * m.fp / n);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  pred unreachable | %5.1f | %5.1f |\n", 100.0 * m.fn / n,
                100.0 * m.tn / n);
  os << buf;
  std::snprintf(buf, sizeof(buf), "precision %.1f%%  recall %.1f%%  accuracy %.1f%%\n",
                100.0 * m.precision(), 100.0 * m.recall(), 100.0 * m.accuracy());
  os << buf;
  return os.str();
}

namespace {

ReachabilityEstimator train_on_rows(const TtrDataset& ds, const EstimatorTrainConfig& cfg,
                                    EstimatorReport* report) {
  if (ds.rows.empty()) throw std::invalid_argument("train_estimator: empty dataset");

  ReachabilityEstimator est;
  est.kind = ds.kind;
  est.norm = {ds.max_range, ds.goal_sample_radius};
  est.lidar.n_beams = ds.n_beams;
  est.lidar.max_range = ds.max_range;
  est.ttr_threshold = ds.T_horizon;
  est.label_scale = ds.T_horizon;
  est.training_seed = cfg.base.seed;

  // Split by episode so trajectory neighbors never straddle the split.
  std::vector<uint32_t> episodes;
  for (const auto& row : ds.rows)
    if (episodes.empty() || episodes.back() != row.episode) episodes.push_back(row.episode);
  std::sort(episodes.begin(), episodes.end());
  episodes.erase(std::unique(episodes.begin(), episodes.end()), episodes.end());
  Rng split_rng(derive_seed(cfg.base.seed, 100));
  std::shuffle(episodes.begin(), episodes.end(), split_rng);
  size_t n_holdout = 0;
  if (episodes.size() >= 2)
    n_holdout = std::max<size_t>(1, static_cast<size_t>(std::llround(
                                        cfg.holdout_fraction * episodes.size())));
  std::set<uint32_t> holdout(episodes.begin(), episodes.begin() + n_holdout);

  const int dim = ds.observation_dim();
  NormalizationConfig norm = est.norm;
  auto normalize_row = [&](const TtrDataset::Row& row) {
    Observation o;
    o.kind = ds.kind;
    o.n_beams = ds.n_beams;
    o.values = row.observation;
    return normalize_observation(o, norm);
  };

  std::vector<Sample> train_set;
  std::vector<const TtrDataset::Row*> heldout_rows;
  for (const auto& row : ds.rows) {
    if (static_cast<int>(row.observation.size()) != dim)
      throw std::invalid_argument("train_estimator: observation dim mismatch");
    if (holdout.count(row.episode)) {
      heldout_rows.push_back(&row);
    } else {
      train_set.push_back({normalize_row(row), {row.label / est.label_scale}});
    }
  }
  if (train_set.empty()) throw std::invalid_argument("train_estimator: empty training split");

  std::vector<int> dims;
  dims.push_back(dim);
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(1);
  est.net = NeuralNet(dims, OutputActivation::Identity, cfg.dropout_p,
                      derive_seed(cfg.base.seed, 101));
  const std::vector<double> curve = train(est.net, train_set, cfg.base);

  if (report != nullptr) {
    report->loss_curve = curve;
    report->heldout = {};
    report->heldout_mse = 0.0;
    report->mean_signed_error_success = 0.0;
    report->heldout_samples = static_cast<long>(heldout_rows.size());
    long n_success = 0;
    for (const auto* row : heldout_rows) {
      Observation o;
      o.kind = ds.kind;
      o.n_beams = ds.n_beams;
      o.values = row->observation;
      const double pred = predict_ttr(est, o);
      const bool true_reachable = row->label < est.ttr_threshold;
      const bool pred_reachable = pred < est.ttr_threshold;
      if (pred_reachable && true_reachable) ++report->heldout.tp;
      if (pred_reachable && !true_reachable) ++report->heldout.fp;
      if (!pred_reachable && true_reachable) ++report->heldout.fn;
      if (!pred_reachable && !true_reachable) ++report->heldout.tn;
      report->heldout_mse += (pred - row->label) * (pred - row->label);
      if (true_reachable) {
        report->mean_signed_error_success += pred - row->label;
        ++n_success;
      }
    }
    if (!heldout_rows.empty()) report->heldout_mse /= static_cast<double>(heldout_rows.size());
    if (n_success > 0) report->mean_signed_error_success /= static_cast<double>(n_success);
  }
  return est;
}

}  // namespace

ReachabilityEstimator train_estimator(const TtrDataset& ds, const EstimatorTrainConfig& cfg,
                                      EstimatorReport* report) {
  return train_on_rows(ds, cfg, report);
}

ReachabilityEstimator train_ttr_only_estimator(const TtrDataset& ds,
                                               const EstimatorTrainConfig& cfg,
                                               EstimatorReport* report) {
  const TtrDataset filtered = filter_success_episodes(ds);
  if (filtered.rows.empty())
    throw std::invalid_argument("train_ttr_only_estimator: no goal-reaching episodes");
  return train_on_rows(filtered, cfg, report);
}

double predict_ttr(const ReachabilityEstimator& est, const Observation& o) {
  if (o.size() != est.net.input_dim())
    throw std::invalid_argument("predict_ttr: observation dim " + std::to_string(o.size()) +
                                " != estimator input dim " +
                                std::to_string(est.net.input_dim()));
  return est.net.forward(normalize_observation(o, est.norm))[0] * est.label_scale;
}

double avg_ttr(const ReachabilityEstimator& est, const RobotState& from_state,
               const RobotState& to_state, const OccupancyGrid& grid, Rng& rng,
               int n_samples, double half_width) {
  if (from_state.kind != to_state.kind)
    throw std::invalid_argument("avg_ttr: robot kinds differ");
  FrameStack stack;
  stack.push(lidar_scan(grid, from_state.position(), from_state.theta, est.lidar, rng));
  std::vector<std::vector<double>> batch;
  batch.reserve(static_cast<size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    GoalSpec target;
    target.position = {to_state.x + uniform(rng, -half_width, half_width),
                       to_state.y + uniform(rng, -half_width, half_width)};
    batch.push_back(
        normalize_observation(make_observation(from_state, target, stack), est.norm));
  }
  double sum = 0.0;
  for (const auto& out : est.net.forward_batch(batch)) sum += out[0] * est.label_scale;
  return sum / std::max(1, n_samples);
}

double rollout_ttr(const LocalPlannerPolicy& policy, const OccupancyGrid& grid,
                   const RobotState& from_state, const Vec2& goal_position,
                   const TTRConfig& cfg, Rng& rng) {
  EpisodeConfig ep_cfg;
  ep_cfg.dt_policy = cfg.dt;
  ep_cfg.max_episode_time = cfg.T_horizon;
  ep_cfg.goal_radius = cfg.goal_radius;
  ep_cfg.robot_radius = cfg.robot_radius;
  GoalSpec goal{goal_position, cfg.goal_radius};
  const RolloutResult r = rollout(policy, grid, from_state, goal, ep_cfg, rng);
  if (r.outcome == RolloutOutcome::Reached) return r.total_time;
  return cfg.dt + cfg.T_horizon;
}

void save_estimator(const ReachabilityEstimator& est, const std::string& prefix) {
  save_weights(est.net, prefix + ".wts");
  json meta{
      {"robot_kind", robot_kind_name(est.kind)},
      {"ttr_threshold", est.ttr_threshold},
      {"label_scale", est.label_scale},
      {"training_seed", est.training_seed},
      {"lidar",
       {{"n_beams", est.lidar.n_beams},
        {"max_range", est.lidar.max_range},
        {"noise_sigma", est.lidar.noise_sigma},
        {"field_of_view", est.lidar.field_of_view}}},
      {"normalization",
       {{"max_range", est.norm.max_range}, {"position_scale", est.norm.position_scale}}},
  };
  std::ofstream out(prefix + ".json");
  if (!out) throw std::runtime_error(prefix + ".json: cannot open for writing");
  out << meta.dump(2) << "\n";
}

ReachabilityEstimator load_estimator(const std::string& prefix) {
  std::ifstream in(prefix + ".json");
  if (!in) throw std::runtime_error(prefix + ".json: cannot open estimator metadata");
  json meta = json::parse(in);
  ReachabilityEstimator est;
  est.kind = robot_kind_from_name(meta.at("robot_kind").get<std::string>());
  est.ttr_threshold = meta.at("ttr_threshold").get<double>();
  est.label_scale = meta.at("label_scale").get<double>();
  est.training_seed = meta.value("training_seed", uint64_t{0});
  est.lidar.n_beams = meta.at("lidar").at("n_beams").get<int>();
  est.lidar.max_range = meta.at("lidar").at("max_range").get<double>();
  est.lidar.noise_sigma = meta.at("lidar").at("noise_sigma").get<double>();
  est.lidar.field_of_view = meta.at("lidar").at("field_of_view").get<double>();
  est.norm.max_range = meta.at("normalization").at("max_range").get<double>();
  est.norm.position_scale = meta.at("normalization").at("position_scale").get<double>();
  est.net = load_weights(prefix + ".wts");
  return est;
}

}  // namespace kinoplan
