// Test-side oracles, independent of the library's evaluation paths.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracles {

// Exponential integral E1(x) for x > 0 via the alternating series for small
// arguments and the continued fraction otherwise.
inline double expint_e1(double x) {
  if (!(x > 0.0)) throw std::domain_error("expint_e1: x must be positive");
  constexpr double euler_gamma = 0.5772156649015329;
  if (x <= 1.0) {
    double sum = 0.0, term = 1.0;
    for (int k = 1; k < 60; ++k) {
      term *= -x / k;
      sum += term / k;
      if (std::abs(term / k) < 1e-18) break;
    }
    return -euler_gamma - std::log(x) - sum;
  }
  // Lentz continued fraction for E1
  double b = x + 1.0, c = 1e308, d = 1.0 / b, h = d;
  for (int i = 1; i <= 200; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x);
}

// Fixed-grid composite Simpson rule; deliberately not adaptive so it shares
// no machinery with the library quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2 != 0) ++n;
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

}  // namespace oracles
