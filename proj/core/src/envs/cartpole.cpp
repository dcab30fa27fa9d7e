#include "rve/envs/cartpole.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rve::envs {

CartpoleAccel cartpole_accelerations(const CartpoleState& s, double force, const CartpoleParams& p) {
    const double half_l = 0.5 * p.pole_length;
    const double total = p.pole_mass + p.cart_mass;
    const double sin_t = std::sin(s.theta), cos_t = std::cos(s.theta);
    CartpoleAccel a;
    a.tau = (force + half_l * s.theta_dot * s.theta_dot * sin_t) / total;
    a.theta_ddot = (p.gravity * sin_t - cos_t * a.tau) / (half_l * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total));
    a.x_ddot = a.tau - p.pole_mass * half_l * a.theta_ddot * cos_t / total;
    return a;
}

double cartpole_reward(const CartpoleState& s, double force) {
    bool up = std::cos(s.theta) > 0.95 && std::abs(s.theta_dot) <= 1.0 && std::abs(s.x) <= 1.0 &&
              std::abs(s.x_dot) <= 1.0;
    return -std::abs(force) / 1000.0 + (up ? 1.0 : 0.0);
}

CartpoleStep cartpole_step(const CartpoleState& s, double force, double dt, const CartpoleParams& p) {
    if (force != -10.0 && force != 0.0 && force != 10.0) throw std::invalid_argument("cartpole force must be -10, 0 or 10");
    auto acc = cartpole_accelerations(s, force, p);
    CartpoleStep out;
    CartpoleState& n = out.next;
    n.theta_dot = s.theta_dot + dt * acc.theta_ddot;
    n.x_dot = s.x_dot + dt * acc.x_ddot;
    n.theta = s.theta + dt * n.theta_dot;
    n.x = s.x + dt * n.x_dot;
    if (n.x > p.rail_limit || n.x < -p.rail_limit) {
        n.x = n.x > 0 ? p.rail_limit : -p.rail_limit;
        n.x_dot = 0.0;
    }
    n.time = s.time + dt;
    out.reward = cartpole_reward(n, force);
    out.terminal = n.time > p.time_limit;
    return out;
}

double wrap_angle(double theta) {
    const double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(theta, two_pi);
    if (w <= -std::numbers::pi) w += two_pi;
    if (w > std::numbers::pi) w -= two_pi;
    return w;
}

core::State Cartpole::handle() const {
    return core::State{steps_, -1, {wrap_angle(s_.theta), s_.theta_dot, s_.x, s_.x_dot}};
}

core::State Cartpole::reset(core::Rng& rng) {
    auto w = [&] { return -0.05 + 0.1 * core::uniform01(rng); };
    s_ = CartpoleState{};
    s_.theta = std::numbers::pi + w();
    s_.theta_dot = w();
    s_.x = w();
    s_.x_dot = w();
    steps_ = 0;
    done_ = false;
    return handle();
}

core::StepResult Cartpole::step(int action, core::Rng&) {
    if (done_) throw std::logic_error("step called on a finished episode");
    if (action < 0 || action > 2) throw std::out_of_range("cartpole action must be 0, 1 or 2");
    // integer step count keeps the time limit free of accumulated rounding
    CartpoleState cur = s_;
    cur.time = steps_ * dt_;
    auto r = cartpole_step(cur, kCartpoleForces[action], dt_, params_);
    s_ = r.next;
    ++steps_;
    s_.time = steps_ * dt_;
    core::StepResult out;
    out.reward = r.reward;
    if (s_.time > params_.time_limit) {
        done_ = true;
    } else {
        out.next = handle();
    }
    return out;
}

}  // namespace rve::envs
