#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace bcrelay {

/// Tolerance knobs shared by the scalar kernels.
struct Tolerance {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_iter = 200;

  void validate() const;
};

/// Thrown when a kernel cannot meet its tolerance. Carries the best
/// estimate and an error bound so callers can decide to proceed anyway.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best, double bound)
      : std::runtime_error(what), best_estimate(best), error_bound(bound) {}

  double best_estimate;
  double error_bound;
};

using RealFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod quadrature of f over [a, b].
/// Result error <= max(abs_tol, rel_tol * |result|) or ConvergenceError.
double integrate(const RealFn& f, double a, double b, const Tolerance& tol = {});

/// Integral of f over [a, inf), mapped through x = a + t/(1-t). Intended
/// for integrands with at least exponential decay.
double integrate_upper_infinite(const RealFn& f, double a, const Tolerance& tol = {});

/// Brent root finding on a bracketing interval. Requires f(lo)*f(hi) <= 0.
double find_root(const RealFn& f, double lo, double hi, const Tolerance& tol = {});

/// Principal branch of the Lambert W function on [-1/e, inf).
double lambert_w0(double x);

/// Centered finite differences, mostly used by verification code.
double fd_derivative(const RealFn& f, double x, double h);
double fd_second_derivative(const RealFn& f, double x, double h);

}  // namespace bcrelay
