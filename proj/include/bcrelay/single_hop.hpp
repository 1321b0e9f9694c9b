#pragma once

#include <memory>

#include <Eigen/Core>

#include "bcrelay/fading.hpp"
#include "bcrelay/numerics.hpp"
#include "bcrelay/tabulated.hpp"

namespace bcrelay {

/// Residual-power (interference) function of a multilevel code. I(l) is the
/// total power in layers above level l, non-increasing from total_power down
/// to zero; the layer power density is rho(l) = -dI/dl.
///
/// Profiles produced by the solvers are "analytic": I follows the closed-form
/// optimum of the broadcast problem and rates integrate exactly. Profiles
/// built from raw samples (solver iterates, CSV imports) interpolate instead.
class PowerProfile {
 public:
  PowerProfile() = default;

  Eigen::ArrayXd grid;
  Eigen::ArrayXd interference;
  double l0 = 0.0;
  double l1 = 0.0;
  double total_power = 0.0;
  /// Rate-limit multiplier in the sign convention of the closed-form optimum
  /// I = (1 - F + multiplier - l f) / (f l^2); zero when no rate limit binds.
  double multiplier = 0.0;
  FadingModel fading;
  bool analytic = false;
  bool l0_clamped = false;  // diagnostic: formula never reached total_power

  double interference_at(double l) const;
  double rho_at(double l) const;
  /// Cumulative decoded rate through level l (zero below l0, flat above l1).
  double rate_to(double l) const;
  double transmit_rate() const;
  bool degenerate() const { return total_power <= 0.0 || !(l1 > l0); }

  /// Tabulated profile over explicit samples; used by the two-hop source
  /// solver and by import paths.
  static PowerProfile from_samples(const Eigen::ArrayXd& grid,
                                   const Eigen::ArrayXd& interference,
                                   double total_power, FadingModel fading);

 private:
  std::shared_ptr<const TabulatedFunction> interp_interference_;
  std::shared_ptr<const TabulatedFunction> interp_rate_;
};

struct RateLimitedSolution {
  PowerProfile profile;
  double lambda = 0.0;        // multiplier magnitude; 0 iff the limit is inactive
  double transmit_rate = 0.0;
  double l0 = 0.0;
  double l1 = 0.0;
};

/// Level at which the optimum profile's residual power reaches zero: the root
/// of 1 - F(l) + lambda_signed - l f(l). lambda_signed uses the closed-form
/// sign convention (solver-internal multipliers are negative when a rate
/// limit binds; positive values select the root above the unconstrained one).
double broadcast_upper_level(const FadingModel& fading, double lambda_signed,
                             const Tolerance& tol = {});

/// Unconstrained broadcast optimum for total power P (linear SNR).
PowerProfile solve_unconstrained(const FadingModel& fading, double power,
                                 int grid_points = 2048);

/// Broadcast optimum under the transmit-rate cap rate_in (nats). The realized
/// transmit rate equals min(rate_in, R_F) within 1e-8.
RateLimitedSolution solve_rate_limited(const FadingModel& fading, double power,
                                       double rate_in, int grid_points = 2048);

/// Decoded rate at fading power l (nats).
double received_rate(const PowerProfile& profile, double l);

/// Expected decoded rate over the fading distribution. Evaluates both the
/// direct form E[R(l)] and its integration-by-parts form and insists they
/// agree before returning.
double average_rate(const PowerProfile& profile, const FadingModel& fading);

}  // namespace bcrelay
