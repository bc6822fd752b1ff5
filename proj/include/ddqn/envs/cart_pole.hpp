#pragma once

// CartPole-v0 dynamics (explicit Euler, tau = 0.02 s).

#include <array>
#include <cmath>
#include <numbers>

namespace ddqn::envs::cart_pole {

inline constexpr double kGravity = 9.8;
inline constexpr double kMassCart = 1.0;
inline constexpr double kMassPole = 0.1;
inline constexpr double kTotalMass = kMassPole + kMassCart;
inline constexpr double kLength = 0.5;  // half the pole length
inline constexpr double kPoleMassLength = kMassPole * kLength;
inline constexpr double kForceMag = 10.0;
inline constexpr double kTau = 0.02;
inline constexpr double kThetaThreshold = 12 * 2 * std::numbers::pi / 360;
inline constexpr double kXThreshold = 2.4;
inline constexpr int kActions = 2;
inline constexpr int kStepLimit = 200;
inline constexpr double kResetBound = 0.05;

// (x, x_dot, theta, theta_dot)
using Physics = std::array<double, 4>;

inline Physics advance(const Physics& s, int action) {
    const auto [x, x_dot, theta, theta_dot] = s;
    const double force = action == 1 ? kForceMag : -kForceMag;
    const double costheta = std::cos(theta);
    const double sintheta = std::sin(theta);
    const double temp = (force + kPoleMassLength * (theta_dot * theta_dot) * sintheta) / kTotalMass;
    const double thetaacc = (kGravity * sintheta - costheta * temp) /
                            (kLength * (4.0 / 3.0 - kMassPole * (costheta * costheta) / kTotalMass));
    const double xacc = temp - kPoleMassLength * thetaacc * costheta / kTotalMass;
    return {x + kTau * x_dot, x_dot + kTau * xacc, theta + kTau * theta_dot, theta_dot + kTau * thetaacc};
}

inline bool failed(const Physics& s) {
    return s[0] < -kXThreshold || s[0] > kXThreshold || s[2] < -kThetaThreshold || s[2] > kThetaThreshold;
}

}  // namespace ddqn::envs::cart_pole
