#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bcrelay/numerics.hpp"
#include "bcrelay/tabulated.hpp"

namespace bcrelay {

enum class FadingKind { rayleigh_unit_mean, tabulated };

/// Fading-power distribution of one hop. Immutable after construction and
/// safe to share across concurrent solver runs.
struct FadingModel {
  FadingKind kind = FadingKind::rayleigh_unit_mean;
  RealFn pdf;
  RealFn cdf;
  RealFn pdf_derivative;
  RealFn survival;  // 1 - cdf, kept separate to avoid cancellation
  double support_min = 0.0;
  double support_max = std::numeric_limits<double>::infinity();
  // false when pdf_derivative comes from differentiating an interpolant
  bool derivative_exact = true;

  bool is_rayleigh() const { return kind == FadingKind::rayleigh_unit_mean; }
};

/// Unit-mean exponential fading power: F(l) = 1 - exp(-l).
FadingModel make_rayleigh();

/// Build a model from CDF samples (l, F(l)). The density is the derivative
/// of a monotone cubic interpolant; F is renormalized so F(l_max) = 1.
FadingModel make_tabulated(const std::vector<double>& levels,
                           const std::vector<double>& cdf_values);

/// Load a tabulated model from a two-column CSV "l,F" with a header row.
FadingModel load_fading_csv(const std::string& path);

}  // namespace bcrelay
