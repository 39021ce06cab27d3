#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "katlas/error.hpp"

namespace katlas::detail {

template <std::size_t D>
using State = std::array<double, D>;

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-20;
  double h_max = 0.02;
  double h_init = 1e-4;
};

/// Advances x from t towards t_end with an adaptive Cash-Karp 5(4)
/// stepper, calling observe(t, x) after every accepted step. The observer
/// may rescale x in place (the stepper keeps no derivative cache between
/// steps). Stops early when observe returns false. Returns the final abscissa.
template <std::size_t D, class System, class Observer>
double drive(const System& sys, State<D>& x, double t, double t_end, const StepControl& ctl,
             Observer&& observe) {
  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_controlled(ctl.atol, ctl.rtol, odeint::runge_kutta_cash_karp54<State<D>>());
  double dt = ctl.h_init;
  while (t < t_end) {
    dt = std::min({dt, ctl.h_max, t_end - t});
    const odeint::controlled_step_result res = stepper.try_step(sys, x, t, dt);
    if (res == odeint::fail) {
      if (dt < 1e-14 * std::max(1.0, std::fabs(t))) {
        throw Error(ErrorKind::IntegratorFailure, "step size underflow");
      }
      continue;
    }
    for (double c : x) {
      if (!std::isfinite(c)) {
        throw Error(ErrorKind::IntegratorFailure, "non-finite state");
      }
    }
    if (!observe(t, x)) {
      return t;
    }
  }
  return t;
}

}  // namespace katlas::detail
