#include "kinoplan/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace kinoplan {

std::string robot_kind_name(RobotKind kind) {
  switch (kind) {
    case RobotKind::DiffDrive: return "diff_drive";
    case RobotKind::Car: return "car";
    case RobotKind::Asteroid: return "asteroid";
  }
  return "unknown";
}

RobotKind robot_kind_from_name(const std::string& name) {
  if (name == "diff_drive" || name == "dd" || name == "fetch") return RobotKind::DiffDrive;
  if (name == "car") return RobotKind::Car;
  if (name == "asteroid") return RobotKind::Asteroid;
  throw std::invalid_argument("unknown robot kind: " + name);
}

ActionBounds action_bounds(RobotKind kind) {
  switch (kind) {
    case RobotKind::DiffDrive:
      return {{-kDiffDriveMaxSpeed, -kDiffDriveMaxTurnRate},
              {kDiffDriveMaxSpeed, kDiffDriveMaxTurnRate}};
    case RobotKind::Car:
      return {{-1.0, -kCarMaxSteerRate}, {1.0, kCarMaxSteerRate}};
    case RobotKind::Asteroid:
      return {{-0.5, -0.5}, {1.0, 0.5}};
  }
  throw std::invalid_argument("unknown robot kind");
}

RobotAction clamp_action(const RobotAction& raw) {
  const ActionBounds b = action_bounds(raw.kind);
  RobotAction a = raw;
  a.u[0] = clamp(raw.u[0], b.lo[0], b.hi[0]);
  a.u[1] = clamp(raw.u[1], b.lo[1], b.hi[1]);
  return a;
}

namespace {

void step_diff_drive(RobotState& s, const RobotAction& a, double dt) {
  // Commanded velocities are reached instantaneously (kinematic platform).
  s.vel[0] = clamp(a.u[0], -kDiffDriveMaxSpeed, kDiffDriveMaxSpeed);
  s.vel[1] = clamp(a.u[1], -kDiffDriveMaxTurnRate, kDiffDriveMaxTurnRate);
  s.theta = wrap_angle(s.theta + s.vel[1] * dt);
  s.x += s.vel[0] * std::cos(s.theta) * dt;
  s.y += s.vel[0] * std::sin(s.theta) * dt;
}

void step_car(RobotState& s, const RobotAction& a, double dt, double wheelbase) {
  s.vel[0] = clamp(s.vel[0] + a.u[0] * dt, 0.0, kCarMaxSpeed);
  s.vel[1] = clamp(s.vel[1] + a.u[1] * dt, -kCarMaxSteer, kCarMaxSteer);
  s.theta = wrap_angle(s.theta + (s.vel[0] / wheelbase) * std::tan(s.vel[1]) * dt);
  s.x += s.vel[0] * std::cos(s.theta) * dt;
  s.y += s.vel[0] * std::sin(s.theta) * dt;
}

void step_asteroid(RobotState& s, const RobotAction& a, double dt, double kappa,
                   double decay) {
  s.theta = wrap_angle(s.theta + a.u[1] * dt);
  // vdot = thrust - kappa * v is linear; integrate it exactly over the step.
  const double gain = (1.0 - decay) / kappa;
  s.vel[0] = s.vel[0] * decay + a.u[0] * std::cos(s.theta) * gain;
  s.vel[1] = s.vel[1] * decay + a.u[0] * std::sin(s.theta) * gain;
  const double speed = std::hypot(s.vel[0], s.vel[1]);
  if (speed > kAsteroidMaxSpeed) {
    const double scale = kAsteroidMaxSpeed / speed;
    s.vel[0] *= scale;
    s.vel[1] *= scale;
  }
  s.x += s.vel[0] * dt;
  s.y += s.vel[1] * dt;
}

}  // namespace

RobotState propagate(const RobotState& state, const RobotAction& action,
                     double duration, const DynamicsParams& params) {
  if (!(duration > 0.0)) throw std::invalid_argument("propagate: duration must be positive");
  if (action.kind != state.kind)
    throw std::invalid_argument("propagate: action kind does not match state kind");
  const double dt = params.dt_integrate;
  if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt_integrate must be positive");
  const long long n = std::llround(duration / dt);
  if (n < 1 || std::abs(n * dt - duration) > 1e-9)
    throw std::invalid_argument("propagate: duration must be a multiple of dt_integrate");

  const RobotAction a = clamp_action(action);
  RobotState s = state;
  switch (state.kind) {
    case RobotKind::DiffDrive:
      for (long long i = 0; i < n; ++i) step_diff_drive(s, a, dt);
      break;
    case RobotKind::Car:
      for (long long i = 0; i < n; ++i) step_car(s, a, dt, params.wheelbase);
      break;
    case RobotKind::Asteroid: {
      const double decay = std::exp(-params.kappa * dt);
      for (long long i = 0; i < n; ++i) step_asteroid(s, a, dt, params.kappa, decay);
      break;
    }
  }
  return s;
}

double state_distance_euclidean(const RobotState& a, const RobotState& b) {
  if (a.kind != b.kind)
    throw std::invalid_argument("state_distance_euclidean: robot kinds differ");
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace kinoplan
