#pragma once

#include <utility>
#include <vector>

#include "bcrelay/single_hop.hpp"

namespace bcrelay {

/// Tabulation of the relay's best response: h*(R) is the maximum expected
/// destination rate when the relay decodes input rate R and spends power
/// relay_power on its own multilevel code. Saturates at rate_saturation, the
/// feeding rate of the unconstrained second-hop optimum. Immutable and
/// shareable once built.
struct RelayPolicy {
  double relay_power = 0.0;
  FadingModel fading2;
  double rate_saturation = 0.0;  // R_sat
  double h_saturation = 0.0;     // h*(R_sat)

  Eigen::ArrayXd grid_rates;
  TabulatedFunction h_table;       // R -> h*
  TabulatedFunction level0_table;  // R -> l0 of the conditional profile
  TabulatedFunction level1_table;  // R -> l1
  TabulatedFunction lambda_table;  // R -> multiplier magnitude
  std::vector<RateLimitedSolution> profiles;

  double h(double rate) const;
  /// (h*', h*'') of the tabulated curve; exactly (0, 0) past saturation.
  std::pair<double, double> h_derivatives(double rate) const;
};

/// Solves the rate-limited broadcast problem on a Chebyshev-spaced rate grid
/// over [0, R_sat]. Grid points are independent problems and are solved
/// concurrently.
RelayPolicy build_relay_policy(const FadingModel& fading2, double relay_power,
                               int n_grid = 128);

}  // namespace bcrelay
