#include "bcrelay/relay_policy.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

namespace bcrelay {

double RelayPolicy::h(double rate) const {
  if (rate < 0.0) throw std::domain_error("RelayPolicy::h: negative rate");
  if (rate >= rate_saturation) return h_saturation;
  return h_table(rate);
}

std::pair<double, double> RelayPolicy::h_derivatives(double rate) const {
  if (rate < 0.0) throw std::domain_error("RelayPolicy::h_derivatives: negative rate");
  if (rate > rate_saturation) return {0.0, 0.0};
  return {h_table.derivative(rate), h_table.second_derivative(rate)};
}

RelayPolicy build_relay_policy(const FadingModel& fading2, double relay_power,
                               int n_grid) {
  if (n_grid < 16) throw std::invalid_argument("build_relay_policy: n_grid must be >= 16");
  if (relay_power < 0.0) throw std::domain_error("build_relay_policy: negative power");

  RelayPolicy policy;
  policy.relay_power = relay_power;
  policy.fading2 = fading2;

  PowerProfile unconstrained = solve_unconstrained(fading2, relay_power);
  policy.rate_saturation = unconstrained.transmit_rate();

  // Chebyshev-Lobatto points cluster where h* curves hardest: near 0 and
  // near saturation.
  const double r_sat = policy.rate_saturation;
  policy.grid_rates.resize(n_grid);
  for (int j = 0; j < n_grid; ++j) {
    policy.grid_rates(j) = 0.5 * r_sat * (1.0 - std::cos(M_PI * j / (n_grid - 1)));
  }
  policy.grid_rates(0) = 0.0;
  policy.grid_rates(n_grid - 1) = r_sat;

  policy.profiles.resize(n_grid);
  Eigen::ArrayXd h_vals(n_grid), l0s(n_grid), l1s(n_grid), lambdas(n_grid);

  auto solve_point = [&](int j) {
    try {
      RateLimitedSolution sol = solve_rate_limited(fading2, relay_power, policy.grid_rates(j));
      h_vals(j) = average_rate(sol.profile, fading2);
      l0s(j) = sol.l0;
      l1s(j) = sol.l1;
      lambdas(j) = sol.lambda;
      policy.profiles[j] = std::move(sol);
    } catch (const std::exception& e) {
      throw std::runtime_error("build_relay_policy: grid rate " +
                               std::to_string(policy.grid_rates(j)) + ": " + e.what());
    }
  };

  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<void>> futures;
  std::atomic<int> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&] {
      for (int j = next.fetch_add(1); j < n_grid; j = next.fetch_add(1)) solve_point(j);
    }));
  }
  for (auto& f : futures) f.get();

  if (r_sat <= 0.0) {
    // degenerate relay: no power, no rate
    Eigen::ArrayXd xs(2), zero(2);
    xs << 0.0, 1.0;
    zero << 0.0, 0.0;
    policy.h_table = TabulatedFunction(xs, zero, InterpOrder::linear, true);
    policy.level0_table = policy.level1_table = policy.lambda_table = policy.h_table;
    policy.h_saturation = 0.0;
    return policy;
  }

  h_vals(0) = 0.0;  // zero input rate carries nothing
  policy.h_saturation = h_vals(n_grid - 1);
  policy.h_table = TabulatedFunction(policy.grid_rates, h_vals, InterpOrder::cubic_monotone);
  policy.level0_table =
      TabulatedFunction(policy.grid_rates, l0s, InterpOrder::cubic_monotone, true);
  policy.level1_table =
      TabulatedFunction(policy.grid_rates, l1s, InterpOrder::cubic_monotone, true);
  policy.lambda_table =
      TabulatedFunction(policy.grid_rates, lambdas, InterpOrder::cubic_monotone, true);
  return policy;
}

}  // namespace bcrelay
