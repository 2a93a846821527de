#pragma once

#include <array>
#include <string>

#include "kinoplan/common.hpp"

namespace kinoplan {

enum class RobotKind { DiffDrive, Car, Asteroid };

std::string robot_kind_name(RobotKind kind);
RobotKind robot_kind_from_name(const std::string& name);

// The two velocity slots are kind-specific:
//   DiffDrive: vel[0] = linear speed v, vel[1] = turn rate omega.
//   Car:       vel[0] = forward speed v, vel[1] = steering angle.
//   Asteroid:  vel[0] = world-frame xdot, vel[1] = world-frame ydot.
struct RobotState {
  RobotKind kind = RobotKind::DiffDrive;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  std::array<double, 2> vel{0.0, 0.0};

  Vec2 position() const { return {x, y}; }
};

// Control inputs, also two slots per kind:
//   DiffDrive: u[0] = commanded speed, u[1] = commanded turn rate.
//   Car:       u[0] = acceleration,    u[1] = steering rate.
//   Asteroid:  u[0] = thrust,          u[1] = turn rate.
struct RobotAction {
  RobotKind kind = RobotKind::DiffDrive;
  std::array<double, 2> u{0.0, 0.0};
};

struct ActionBounds {
  std::array<double, 2> lo;
  std::array<double, 2> hi;
};

ActionBounds action_bounds(RobotKind kind);

struct DynamicsParams {
  double kappa = 1.0;        // Asteroid first-order drag, 1/s
  double wheelbase = 0.8;    // Car, meters
  double dt_integrate = 0.01;  // seconds
};

// Robot speed caps and limits shared across modules.
inline constexpr double kDiffDriveMaxSpeed = 1.0;   // m/s
inline constexpr double kDiffDriveMaxTurnRate = 2.0;  // rad/s
inline constexpr double kCarMaxSpeed = 1.0;         // m/s
inline constexpr double kCarMaxSteer = M_PI / 6.0;  // 30 degrees
inline constexpr double kCarMaxSteerRate = 1.0;     // rad/s
inline constexpr double kAsteroidMaxSpeed = 1.0;    // m/s
inline constexpr double kRobotRadius = 0.3;         // collision disc, meters

RobotAction clamp_action(const RobotAction& raw);

// Advances the state by integrating the robot ODEs for `duration` seconds.
// Duration must be a positive multiple of params.dt_integrate. Deterministic.
RobotState propagate(const RobotState& state, const RobotAction& action,
                     double duration, const DynamicsParams& params = {});

// Planar (x, y) distance; the robot kinds must match.
double state_distance_euclidean(const RobotState& a, const RobotState& b);

}  // namespace kinoplan
