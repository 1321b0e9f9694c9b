#pragma once

#include <map>
#include <string>

#include "bcrelay/source_solver.hpp"

namespace bcrelay {

struct NetworkConfig {
  double source_power = 0.0;  // P_s, linear SNR
  double relay_power = 0.0;   // P_r, linear SNR
  FadingModel fading1;        // source -> relay
  FadingModel fading2;        // relay -> destination

  void validate() const;
};

enum class Scheme { df_opt, af, df_1bs, cutset };

const char* scheme_name(Scheme s);

struct SchemeResult {
  Scheme scheme = Scheme::df_opt;
  double rate = 0.0;  // nats
  std::map<std::string, double> diagnostics;
};

/// Optimal two-hop decode-and-forward rate: relay policy plus source-profile
/// solve, with the direct oracle as fallback when the Euler iteration stalls
/// (recorded under diagnostics["fallback"]).
SchemeResult df_expected_rate(const NetworkConfig& cfg, int n_levels = 200);
SchemeResult df_expected_rate(const NetworkConfig& cfg, const RelayPolicy& policy,
                              int n_levels = 200);

/// Source solve used by df_expected_rate: Euler first, direct oracle on a
/// stalled iteration. used_fallback may be null.
SourceSolution solve_source_with_fallback(const NetworkConfig& cfg, const RelayPolicy& policy,
                                          int n_levels, bool* used_fallback);

/// Amplify-and-forward rate through the equivalent end-to-end channel.
/// Requires Rayleigh fading on both hops.
SchemeResult af_expected_rate(const NetworkConfig& cfg);

/// One-level (outage) code at the source, broadcast code at the relay.
SchemeResult df_1bs_expected_rate(const NetworkConfig& cfg);
SchemeResult df_1bs_expected_rate(const NetworkConfig& cfg, const RelayPolicy& policy);

/// min of the two per-hop receiver-CSI expected rates.
SchemeResult cutset_bound(const NetworkConfig& cfg);

/// Equivalent end-to-end fading model seen through an amplifying relay;
/// useful for cross-checking af_expected_rate against the broadcast solver.
FadingModel make_af_equivalent_fading(double source_power, double relay_power);

}  // namespace bcrelay
