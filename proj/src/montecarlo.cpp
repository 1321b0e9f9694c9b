#include "bcrelay/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bcrelay {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::int64_t block, int draw) {
  const std::uint64_t counter =
      2ULL * static_cast<std::uint64_t>(block) + static_cast<std::uint64_t>(draw) + 1ULL;
  const std::uint64_t z = splitmix64(seed + 0x9E3779B97F4A7C15ULL * counter);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double sample_fading(const FadingModel& fading, double u) {
  if (u < 0.0 || u >= 1.0) throw std::domain_error("sample_fading: u must be in [0, 1)");
  if (fading.is_rayleigh()) {
    return -std::log1p(-u);
  }
  double lo = fading.support_min;
  double hi = std::isfinite(fading.support_max) ? fading.support_max : 1.0;
  if (!std::isfinite(fading.support_max)) {
    while (fading.cdf(hi) < u && hi < 1e12) hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-13 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (fading.cdf(mid) >= u) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

SimReport simulate_df(const NetworkConfig& cfg, const SourceSolution& source,
                      const RelayPolicy& policy, std::int64_t n_blocks,
                      std::uint64_t seed) {
  if (n_blocks < 1) throw std::invalid_argument("simulate_df: need at least one block");
  cfg.validate();

  SimReport rep;
  rep.n_blocks = n_blocks;
  rep.seed = seed;

  const double r_sat = policy.rate_saturation;
  double mean = 0.0, m2 = 0.0;
  std::int64_t zero_relay = 0, saturated = 0;
  double worst_violation = -std::numeric_limits<double>::infinity();

  for (std::int64_t b = 0; b < n_blocks; ++b) {
    const double gamma = sample_fading(cfg.fading1, uniform01(seed, b, 0));
    const double r_in = relay_input_rate(source.profile, gamma);
    if (r_in <= 0.0) ++zero_relay;
    if (r_in >= r_sat) ++saturated;
    const double r_eff = std::min(r_in, r_sat);

    double r_d = 0.0;
    const double upsilon = sample_fading(cfg.fading2, uniform01(seed, b, 1));
    if (r_eff > 0.0 && r_sat > 0.0) {
      const double l0r = policy.level0_table(std::clamp(r_eff, 0.0, r_sat));
      const double l1r = policy.level1_table(std::clamp(r_eff, 0.0, r_sat));
      if (upsilon > l0r && l1r > l0r) {
        // decode through the relay's conditional code, which was designed
        // against the policy's fading model
        const double up = std::min(upsilon, l1r);
        if (policy.fading2.is_rayleigh()) {
          r_d = 2.0 * std::log(up / l0r) - (up - l0r);
        } else {
          r_d = 2.0 * std::log(up / l0r) +
                std::log(policy.fading2.pdf(up)) - std::log(policy.fading2.pdf(l0r));
        }
        r_d = std::max(r_d, 0.0);
      }
    }
    worst_violation = std::max(worst_violation, r_d - r_eff);

    const double delta = r_d - mean;
    mean += delta / static_cast<double>(b + 1);
    m2 += delta * (r_d - mean);
  }

  rep.mean_rate = mean;
  rep.std_error = n_blocks > 1
                      ? std::sqrt(m2 / (static_cast<double>(n_blocks) *
                                        static_cast<double>(n_blocks - 1)))
                      : 0.0;
  rep.zero_relay_fraction = static_cast<double>(zero_relay) / static_cast<double>(n_blocks);
  rep.saturated_fraction = static_cast<double>(saturated) / static_cast<double>(n_blocks);
  rep.max_rate_violation = worst_violation;
  return rep;
}

}  // namespace bcrelay
