#pragma once

#include "rve/core/interfaces.hpp"

namespace rve::envs {

struct CartpoleState {
    double theta = 0.0;  // from upright
    double theta_dot = 0.0;
    double x = 0.0;
    double x_dot = 0.0;
    double time = 0.0;
};

struct CartpoleParams {
    double cart_mass = 1.0;
    double pole_mass = 0.1;
    double pole_length = 1.0;
    double gravity = 9.8;
    double rail_limit = 5.0;
    double time_limit = 10.0;
};

struct CartpoleAccel {
    double tau = 0.0;
    double theta_ddot = 0.0;
    double x_ddot = 0.0;
};

struct CartpoleStep {
    double reward = 0.0;
    CartpoleState next;
    bool terminal = false;
};

inline constexpr double kCartpoleForces[3] = {-10.0, 0.0, 10.0};

CartpoleAccel cartpole_accelerations(const CartpoleState& s, double force, const CartpoleParams& p = {});
double cartpole_reward(const CartpoleState& s, double force);

// One semi-implicit Euler step; force must be one of kCartpoleForces.
CartpoleStep cartpole_step(const CartpoleState& s, double force, double dt = 0.01, const CartpoleParams& p = {});

// State handle: t = step count, x = -1, values = (theta wrapped to (-pi, pi], theta_dot, x, x_dot).
class Cartpole : public core::Environment {
public:
    explicit Cartpole(double dt = 0.01, CartpoleParams p = {}) : dt_(dt), params_(p) {}

    core::State reset(core::Rng& rng) override;
    core::StepResult step(int action, core::Rng& rng) override;
    int num_actions() const override { return 3; }

    const CartpoleState& physical() const { return s_; }

private:
    core::State handle() const;

    double dt_;
    CartpoleParams params_;
    CartpoleState s_;
    int steps_ = 0;
    bool done_ = true;
};

double wrap_angle(double theta);

}  // namespace rve::envs
