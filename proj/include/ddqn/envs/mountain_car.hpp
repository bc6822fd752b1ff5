#pragma once

// MountainCar-v0 dynamics.

#include <algorithm>
#include <array>
#include <cmath>

namespace ddqn::envs::mountain_car {

inline constexpr double kMinPosition = -1.2;
inline constexpr double kMaxPosition = 0.6;
inline constexpr double kMaxSpeed = 0.07;
inline constexpr double kGoalPosition = 0.5;
inline constexpr double kGoalVelocity = 0.0;
inline constexpr double kForce = 0.001;
inline constexpr double kGravity = 0.0025;
inline constexpr int kActions = 3;
inline constexpr int kStepLimit = 200;
inline constexpr double kResetLow = -0.6;
inline constexpr double kResetHigh = -0.4;
// The action that applies no force.
inline constexpr int kNoPush = 1;

struct Physics {
    double position = 0.0;
    double velocity = 0.0;
};

inline Physics advance(Physics s, int action) {
    double velocity = s.velocity + ((action - 1) * kForce + std::cos(3 * s.position) * (-kGravity));
    velocity = std::clamp(velocity, -kMaxSpeed, kMaxSpeed);
    double position = std::clamp(s.position + velocity, kMinPosition, kMaxPosition);
    if (position == kMinPosition && velocity < 0) velocity = 0.0;
    return {position, velocity};
}

inline bool at_goal(double position, double velocity) {
    return position >= kGoalPosition && velocity >= kGoalVelocity;
}

}  // namespace ddqn::envs::mountain_car
