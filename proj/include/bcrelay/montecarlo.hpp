#pragma once

#include <cstdint>

#include "bcrelay/schemes.hpp"

namespace bcrelay {

/// Counter-based uniform stream. Draw k of block b reads the splitmix64
/// output at counter 2b + k + 1, offset by the run seed, so streams are
/// reproducible for any block/thread partition.
std::uint64_t splitmix64(std::uint64_t x);
double uniform01(std::uint64_t seed, std::int64_t block, int draw);

/// Inverse-CDF sample of a fading model (analytic for Rayleigh, bisection on
/// the CDF otherwise, which also covers step/point-mass distributions).
double sample_fading(const FadingModel& fading, double u);

struct SimReport {
  std::int64_t n_blocks = 0;
  double mean_rate = 0.0;  // nats
  double std_error = 0.0;
  std::uint64_t seed = 0;
  double zero_relay_fraction = 0.0;   // blocks where the relay decodes nothing
  double saturated_fraction = 0.0;    // blocks where R_r exceeds R_sat
  double max_rate_violation = 0.0;    // max over blocks of R_d - min(R_r, R_sat)
};

/// Block-level simulation of the two-phase scheme: draw the first-hop gain,
/// decode R_r from the source profile, re-encode with the relay's conditional
/// profile for min(R_r, R_sat), draw the second-hop gain and decode.
/// Deterministic for a fixed seed.
SimReport simulate_df(const NetworkConfig& cfg, const SourceSolution& source,
                      const RelayPolicy& policy, std::int64_t n_blocks,
                      std::uint64_t seed);

}  // namespace bcrelay
