#pragma once

#include "bcrelay/relay_policy.hpp"
#include "bcrelay/single_hop.hpp"

namespace bcrelay {

/// Source-side power profile maximizing the expected destination rate
/// E[h*(R_r(gamma))] for a fixed relay policy.
struct SourceSolution {
  enum class Method { euler, direct_oracle };

  PowerProfile profile;
  double expected_rate = 0.0;
  /// max |zeta| over interior grid nodes (stationarity violation, with the
  /// bound/saturation conditions folded in at clamped nodes)
  double residual_norm = 0.0;
  Method method = Method::euler;
};

/// Thrown when the Euler iteration stalls; carries the best iterate so the
/// caller can fall back to the direct oracle.
class SourceSolveError : public std::runtime_error {
 public:
  SourceSolveError(const std::string& what, SourceSolution best)
      : std::runtime_error(what), best_iterate(std::move(best)) {}
  SourceSolution best_iterate;
};

/// Rate decoded by the relay at first-hop fading power gamma (nats).
double relay_input_rate(const PowerProfile& source_profile, double gamma);

/// Stationarity residual zeta(l) of the expected-rate functional at level l,
/// assembled from h*' and h*'' of the policy and the profile's layer rates.
/// Zero (with the right sign structure at clamped levels) characterizes the
/// optimum source profile.
double euler_residual(double l, const PowerProfile& source_profile,
                      const RelayPolicy& policy);

/// Damped-Newton solve of the discretized system zeta(m) = 0 with endpoints
/// pinned at P_s and 0 and monotonicity enforced by isotonic projection.
SourceSolution solve_source_profile(const FadingModel& fading1, const RelayPolicy& policy,
                                    double source_power, int n_levels = 200);

/// Independent check: projected-gradient ascent on the discretized objective
/// over per-level power masses (uniform start, deterministic step schedule).
SourceSolution direct_oracle(const FadingModel& fading1, const RelayPolicy& policy,
                             double source_power, int n_levels = 200);

/// Discretized objective both solvers report: expected destination rate of a
/// sampled source profile under the given policy.
double expected_destination_rate(const Eigen::ArrayXd& grid, const Eigen::ArrayXd& interference,
                                 const FadingModel& fading1, const RelayPolicy& policy);

}  // namespace bcrelay
