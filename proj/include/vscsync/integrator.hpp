#pragma once

namespace vscsync {

/// Classical fourth-order Runge-Kutta step for x' = f(t, x). State must
/// support vector addition and scalar multiplication.
template <class State, class Deriv>
State rk4_step(Deriv&& f, double t, const State& x, double h)
{
    const State k1 = f(t, x);
    const State k2 = f(t + 0.5 * h, State(x + (0.5 * h) * k1));
    const State k3 = f(t + 0.5 * h, State(x + (0.5 * h) * k2));
    const State k4 = f(t + h, State(x + h * k3));
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace vscsync
