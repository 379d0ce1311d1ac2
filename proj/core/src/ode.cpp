#include "hltp/ode.hpp"

#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "hltp/errors.hpp"

namespace hltp {

namespace odeint = boost::numeric::odeint;

std::vector<Eigen::VectorXcd> integrate(const OdeRhs& rhs, const Eigen::VectorXcd& x0,
                                        const std::vector<double>& times,
                                        const OdeOptions& opts, OdeStats* stats) {
  if (times.empty()) return {};
  const Eigen::Index n = x0.size();
  using State = std::vector<double>;

  State state(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    state[2 * i] = x0(i).real();
    state[2 * i + 1] = x0(i).imag();
  }

  Eigen::VectorXcd xc(n), dxc(n);
  double last_t = times.front();
  std::size_t evaluations = 0;
  auto system = [&](const State& s, State& ds, double t) {
    for (Eigen::Index i = 0; i < n; ++i) xc(i) = {s[2 * i], s[2 * i + 1]};
    rhs(t, xc, dxc);
    for (Eigen::Index i = 0; i < n; ++i) {
      ds[2 * i] = dxc(i).real();
      ds[2 * i + 1] = dxc(i).imag();
    }
    last_t = t;
    ++evaluations;
  };

  std::vector<Eigen::VectorXcd> out;
  out.reserve(times.size());
  auto observer = [&](const State& s, double) {
    Eigen::VectorXcd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = {s[2 * i], s[2 * i + 1]};
    out.push_back(std::move(x));
  };

  double span = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    span = std::max(span, std::abs(times[i] - times[i - 1]));
  }
  const double direction = times.back() >= times.front() ? 1.0 : -1.0;
  // A small first step: the controller grows it quickly, while an overflowing
  // trial step yields a NaN error estimate that odeint would accept.
  double dt = opts.initial_step > 0.0 ? opts.initial_step : std::max(span, 1e-3) * 1e-4;
  dt *= direction;

  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol,
                                         odeint::runge_kutta_fehlberg78<State>());
  try {
    if (times.size() == 1) {
      observer(state, times.front());
    } else {
      odeint::integrate_times(stepper, system, state, times.begin(), times.end(), dt, observer,
                              odeint::max_step_checker(opts.max_steps_per_interval));
    }
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << "integrator failed near t = " << last_t << ": " << e.what();
    throw ConvergenceError(os.str());
  }
  for (const auto& x : out) {
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "integrator produced a non-finite state near t = " << last_t;
      throw ConvergenceError(os.str());
    }
  }
  if (stats) {
    stats->rhs_evaluations += evaluations;
    stats->output_points += out.size();
  }
  return out;
}

}  // namespace hltp
