#include "kinoplan/observation.hpp"

#include <stdexcept>

namespace kinoplan {

void FrameStack::push(std::vector<double> scan) {
  frames_[static_cast<size_t>(count_ % 3)] = std::move(scan);
  ++count_;
}

const std::vector<double>& FrameStack::frame(int age) const {
  if (count_ == 0) throw std::runtime_error("FrameStack: no scans pushed");
  int idx = count_ - 1 - age;
  if (idx < 0) idx = std::max(count_ - 3, 0);  // pad with the earliest available
  return frames_[static_cast<size_t>(idx % 3)];
}

Observation make_observation(const RobotState& state, const GoalSpec& goal,
                             const FrameStack& stack) {
  if (stack.empty()) throw std::runtime_error("make_observation: empty frame stack");
  const auto n_beams = static_cast<int>(stack.frame(0).size());

  Observation o;
  o.kind = state.kind;
  o.n_beams = n_beams;
  o.values.reserve(static_cast<size_t>(3 * n_beams + 5));
  for (int age = 2; age >= 0; --age) {  // oldest first, newest last
    const auto& f = stack.frame(age);
    if (static_cast<int>(f.size()) != n_beams)
      throw std::runtime_error("make_observation: inconsistent scan sizes");
    o.values.insert(o.values.end(), f.begin(), f.end());
  }

  const double c = std::cos(state.theta);
  const double s = std::sin(state.theta);
  const double dx = goal.position.x - state.x;
  const double dy = goal.position.y - state.y;
  o.values.push_back(c * dx + s * dy);   // rel goal, body frame
  o.values.push_back(-s * dx + c * dy);

  if (state.kind == RobotKind::Asteroid) {
    o.values.push_back(c * state.vel[0] + s * state.vel[1]);
    o.values.push_back(-s * state.vel[0] + c * state.vel[1]);
  } else {
    o.values.push_back(state.vel[0]);
    o.values.push_back(state.vel[1]);
  }
  o.values.push_back(wrap_angle(state.theta));
  return o;
}

std::vector<double> normalize_observation(const Observation& o,
                                          const NormalizationConfig& cfg) {
  std::vector<double> v = o.values;
  const auto lidar_len = static_cast<size_t>(3 * o.n_beams);
  for (size_t i = 0; i < lidar_len; ++i) v[i] /= cfg.max_range;
  v[lidar_len] /= cfg.position_scale;
  v[lidar_len + 1] /= cfg.position_scale;
  return v;
}

std::vector<double> denormalize_observation(const std::vector<double>& values,
                                            int n_beams, const NormalizationConfig& cfg) {
  std::vector<double> v = values;
  const auto lidar_len = static_cast<size_t>(3 * n_beams);
  for (size_t i = 0; i < lidar_len; ++i) v[i] *= cfg.max_range;
  v[lidar_len] *= cfg.position_scale;
  v[lidar_len + 1] *= cfg.position_scale;
  return v;
}

}  // namespace kinoplan
