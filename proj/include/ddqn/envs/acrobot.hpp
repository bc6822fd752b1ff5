#pragma once

// Acrobot-v1 dynamics: two-link underactuated pendulum, torque on the second
// joint, one RK4 step of dt = 0.2 s per action ("book" equations of motion).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace ddqn::envs::acrobot {

inline constexpr double kDt = 0.2;
inline constexpr double kLinkLength1 = 1.0;
inline constexpr double kLinkMass1 = 1.0;
inline constexpr double kLinkMass2 = 1.0;
inline constexpr double kLinkComPos1 = 0.5;
inline constexpr double kLinkComPos2 = 0.5;
inline constexpr double kLinkMoi = 1.0;
inline constexpr double kGravity = 9.8;
inline constexpr double kMaxVel1 = 4 * std::numbers::pi;
inline constexpr double kMaxVel2 = 9 * std::numbers::pi;
inline constexpr std::array<double, 3> kTorques = {-1.0, 0.0, 1.0};
inline constexpr int kActions = 3;
inline constexpr int kStepLimit = 500;
inline constexpr double kResetBound = 0.1;

// (theta1, theta2, dtheta1, dtheta2)
using Physics = std::array<double, 4>;

inline Physics derivatives(const Physics& s, double torque) {
    constexpr double pi = std::numbers::pi;
    constexpr double m1 = kLinkMass1, m2 = kLinkMass2, l1 = kLinkLength1;
    constexpr double lc1 = kLinkComPos1, lc2 = kLinkComPos2, I1 = kLinkMoi, I2 = kLinkMoi, g = kGravity;
    const auto [theta1, theta2, dtheta1, dtheta2] = s;
    // Operation order mirrors the reference implementation so traces agree to
    // the last bit wherever libm does.
    const double d1 = m1 * (lc1 * lc1) + m2 * ((l1 * l1) + (lc2 * lc2) + 2 * l1 * lc2 * std::cos(theta2)) + I1 + I2;
    const double d2 = m2 * ((lc2 * lc2) + l1 * lc2 * std::cos(theta2)) + I2;
    const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - pi / 2.0);
    const double phi1 = -m2 * l1 * lc2 * (dtheta2 * dtheta2) * std::sin(theta2) -
                        2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
                        (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - pi / 2) + phi2;
    const double ddtheta2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * (dtheta1 * dtheta1) * std::sin(theta2) - phi2) /
                            (m2 * (lc2 * lc2) + I2 - (d2 * d2) / d1);
    const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    return {dtheta1, dtheta2, ddtheta1, ddtheta2};
}

// Shifts x into [lo, hi] by whole periods.
inline double wrap(double x, double lo, double hi) {
    const double span = hi - lo;
    while (x > hi) x -= span;
    while (x < lo) x += span;
    return x;
}

inline Physics advance(const Physics& s, int action) {
    const double torque = kTorques[static_cast<std::size_t>(action)];
    const double dt = kDt, dt2 = kDt / 2.0;
    auto axpy = [](const Physics& y, double a, const Physics& k) {
        Physics out;
        for (std::size_t i = 0; i < 4; ++i) out[i] = y[i] + a * k[i];
        return out;
    };
    const Physics k1 = derivatives(s, torque);
    const Physics k2 = derivatives(axpy(s, dt2, k1), torque);
    const Physics k3 = derivatives(axpy(s, dt2, k2), torque);
    const Physics k4 = derivatives(axpy(s, dt, k3), torque);
    Physics ns;
    for (std::size_t i = 0; i < 4; ++i) ns[i] = s[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    ns[0] = wrap(ns[0], -std::numbers::pi, std::numbers::pi);
    ns[1] = wrap(ns[1], -std::numbers::pi, std::numbers::pi);
    ns[2] = std::clamp(ns[2], -kMaxVel1, kMaxVel1);
    ns[3] = std::clamp(ns[3], -kMaxVel2, kMaxVel2);
    return ns;
}

// Tip of the second link above the bar (one link length above the pivot).
inline bool tip_above_bar(const Physics& s) {
    return -std::cos(s[0]) - std::cos(s[1] + s[0]) > 1.0;
}

inline std::array<double, 6> observe(const Physics& s) {
    return {std::cos(s[0]), std::sin(s[0]), std::cos(s[1]), std::sin(s[1]), s[2], s[3]};
}

}  // namespace ddqn::envs::acrobot
