#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace hltp {

// Right-hand side dx = f(t, x) of a complex linear or nonlinear ODE.
using OdeRhs = std::function<void(double t, const Eigen::VectorXcd& x, Eigen::VectorXcd& dx)>;

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0 picks 1e-4 of the longest output interval
  std::size_t max_steps_per_interval = 200000;
};

struct OdeStats {
  std::size_t rhs_evaluations = 0;
  std::size_t output_points = 0;
};

// Integrates from times.front() through every entry of times (monotone,
// either increasing or decreasing) with an adaptive embedded Runge-Kutta
// 7(8) pair and returns the state at each time. Throws ConvergenceError
// carrying the time reached when the step size controller gives up.
std::vector<Eigen::VectorXcd> integrate(const OdeRhs& rhs, const Eigen::VectorXcd& x0,
                                        const std::vector<double>& times,
                                        const OdeOptions& opts = {}, OdeStats* stats = nullptr);

}  // namespace hltp
