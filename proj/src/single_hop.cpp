#include "bcrelay/single_hop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcrelay {
namespace {

double formula_interference(const FadingModel& fading, double lambda_signed, double l) {
  const double f = fading.pdf(l);
  const double num = fading.survival(l) + lambda_signed - l * f;
  return num / (f * l * l);
}

// level where the closed-form interference drops to the power budget
struct Level0 {
  double value;
  bool clamped;
};

Level0 find_level0(const FadingModel& fading, double lambda_signed, double power,
                   double upper) {
  auto g = [&](double l) { return formula_interference(fading, lambda_signed, l) - power; };
  const double floor_l = std::max(fading.support_min, 0.0) + 1e-300;
  double lo = 0.5 * upper;
  bool bracketed = false;
  for (int i = 0; i < 2000 && lo > floor_l; ++i) {
    if (g(lo) > 0.0) {
      bracketed = true;
      break;
    }
    lo *= 0.5;
  }
  if (!bracketed) {
    const double edge = std::max(fading.support_min, lo);
    if (g(edge) <= 0.0) return {edge, true};
    lo = edge;
  }
  Tolerance rt;
  rt.abs_tol = 1e-13;
  return {find_root(g, lo, upper, rt), false};
}

Eigen::ArrayXd log_spaced(double lo, double hi, int n) {
  Eigen::ArrayXd out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) {
    out(i) = std::exp(a + (b - a) * i / (n - 1));
  }
  out(0) = lo;
  out(n - 1) = hi;
  return out;
}

double log_pdf_ratio(const FadingModel& fading, double hi, double lo) {
  return std::log(fading.pdf(hi)) - std::log(fading.pdf(lo));
}

// Closed-form transmit rate of an optimum-family profile between levels
// a < b: the layer-rate density along the closed form is 2/l + f'(l)/f(l),
// whose antiderivative is 2 log l + log f(l).
double formula_rate_between(const FadingModel& fading, double a, double b) {
  if (!(b > a)) return 0.0;
  if (fading.is_rayleigh()) {
    return 2.0 * std::log(b / a) - (b - a);
  }
  return 2.0 * std::log(b / a) + log_pdf_ratio(fading, b, a);
}

}  // namespace

double PowerProfile::interference_at(double l) const {
  if (degenerate()) return l <= l0 ? total_power : 0.0;
  if (analytic) {
    if (l <= l0) return total_power;
    if (l >= l1) return 0.0;
    const double v = formula_interference(fading, multiplier, l);
    return std::clamp(v, 0.0, total_power);
  }
  return std::clamp((*interp_interference_)(l), 0.0, total_power);
}

double PowerProfile::rho_at(double l) const {
  if (degenerate()) return 0.0;
  if (analytic) {
    // boundary points take the interior limit, so quadrature over [l0, l1]
    // sees the right endpoint values
    if (l < l0 || l > l1) return 0.0;
    const double f = fading.pdf(l);
    const double fp = fading.pdf_derivative(l);
    const double s = fading.survival(l) + multiplier;
    return s * (l * fp + 2.0 * f) / (f * f * l * l * l);
  }
  return std::max(-interp_interference_->derivative(l), 0.0);
}

double PowerProfile::rate_to(double l) const {
  if (l < 0.0) throw std::domain_error("rate_to: negative fading power");
  if (degenerate()) return 0.0;
  if (analytic) {
    const double x = std::clamp(l, l0, l1);
    return formula_rate_between(fading, l0, x);
  }
  if (l <= grid(0)) return 0.0;
  if (l >= grid(grid.size() - 1)) return interp_rate_->ys()(grid.size() - 1);
  return std::max(0.0, (*interp_rate_)(l));
}

double PowerProfile::transmit_rate() const {
  return degenerate() ? 0.0 : rate_to(l1);
}

PowerProfile PowerProfile::from_samples(const Eigen::ArrayXd& grid,
                                        const Eigen::ArrayXd& interference,
                                        double total_power, FadingModel fading) {
  if (grid.size() != interference.size() || grid.size() < 2) {
    throw std::invalid_argument("PowerProfile::from_samples: bad sample arrays");
  }
  PowerProfile p;
  p.grid = grid;
  p.interference = interference;
  p.total_power = total_power;
  p.fading = std::move(fading);
  p.analytic = false;

  // effective l0/l1 from where the samples leave the power plateau / reach 0
  const Eigen::Index n = grid.size();
  Eigen::Index i0 = 0;
  while (i0 + 1 < n && interference(i0 + 1) >= total_power * (1.0 - 1e-12)) ++i0;
  Eigen::Index i1 = n - 1;
  while (i1 > 0 && interference(i1 - 1) <= total_power * 1e-12) --i1;
  p.l0 = grid(i0);
  p.l1 = grid(i1);

  p.interp_interference_ = std::make_shared<TabulatedFunction>(
      grid, interference, InterpOrder::cubic_monotone, /*clamp=*/true);

  // cumulative decoded rate, midpoint product per cell so that the total is
  // exactly consistent with the sampled power decrements
  Eigen::ArrayXd rate(n);
  rate(0) = 0.0;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double abar = 0.5 * (grid(j) + grid(j + 1));
    const double ibar = 0.5 * (interference(j) + interference(j + 1));
    const double dI = std::max(interference(j) - interference(j + 1), 0.0);
    rate(j + 1) = rate(j) + dI * abar / (1.0 + abar * ibar);
  }
  p.interp_rate_ = std::make_shared<TabulatedFunction>(
      grid, rate, InterpOrder::cubic_monotone, /*clamp=*/true);
  return p;
}

double broadcast_upper_level(const FadingModel& fading, double lambda_signed,
                             const Tolerance& tol) {
  auto q = [&](double l) {
    return fading.survival(l) + lambda_signed - l * fading.pdf(l);
  };
  Tolerance rt = tol;
  rt.abs_tol = std::min(tol.abs_tol, 1e-12);

  const double start = std::max(fading.support_min, 0.0) + 1e-9;
  if (lambda_signed <= -1.0 || q(start) <= 0.0) {
    throw ConvergenceError("broadcast_upper_level: no feasible level for this multiplier",
                           start, 0.0);
  }
  double lo = start;
  double hi = std::max(2.0 * start, 1e-6);
  const double cap = std::isfinite(fading.support_max) ? fading.support_max : 1e6;
  for (int i = 0; i < 200; ++i) {
    hi = std::min(hi, cap);
    if (q(hi) <= 0.0) {
      return find_root(q, lo, hi, rt);
    }
    if (hi >= cap) break;
    lo = hi;
    hi *= 2.0;
  }
  if (q(cap) <= 0.0) return find_root(q, lo, cap, rt);
  throw ConvergenceError("broadcast_upper_level: zero-power level does not exist", cap, q(cap));
}

PowerProfile solve_unconstrained(const FadingModel& fading, double power, int grid_points) {
  if (power < 0.0) throw std::domain_error("solve_unconstrained: negative power");
  if (grid_points < 8) throw std::invalid_argument("solve_unconstrained: grid too small");

  PowerProfile p;
  p.fading = fading;
  p.total_power = power;
  p.multiplier = 0.0;
  p.analytic = true;
  p.l1 = broadcast_upper_level(fading, 0.0);

  if (power == 0.0) {
    p.l0 = p.l1;
    p.grid = log_spaced(std::max(p.l1 / 10.0, fading.support_min + 1e-12),
                        std::isfinite(fading.support_max)
                            ? std::min(10.0 * p.l1, fading.support_max)
                            : 10.0 * p.l1,
                        grid_points);
    p.interference = Eigen::ArrayXd::Zero(grid_points);
    return p;
  }

  const Level0 l0 = find_level0(fading, 0.0, power, p.l1);
  p.l0 = l0.value;
  p.l0_clamped = l0.clamped;

  const double lo = std::max(p.l0 / 10.0, fading.support_min + 1e-12);
  const double hi = std::isfinite(fading.support_max)
                        ? std::min(10.0 * p.l1, fading.support_max)
                        : 10.0 * p.l1;
  p.grid = log_spaced(lo, hi, grid_points);
  p.interference.resize(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    p.interference(i) = p.interference_at(p.grid(i));
  }
  return p;
}

RateLimitedSolution solve_rate_limited(const FadingModel& fading, double power,
                                       double rate_in, int grid_points) {
  if (rate_in < 0.0) throw std::domain_error("solve_rate_limited: negative rate limit");

  PowerProfile unc = solve_unconstrained(fading, power, grid_points);
  const double full_rate = unc.transmit_rate();
  if (rate_in >= full_rate - 1e-12 || unc.degenerate()) {
    return {unc, 0.0, full_rate, unc.l0, unc.l1};
  }

  const double target = std::max(rate_in, 1e-12);
  auto rate_at = [&](double lam_hat) {
    // multiplier enters the closed form with a negative sign when binding
    const double l1 = broadcast_upper_level(fading, -lam_hat);
    const double l0 = find_level0(fading, -lam_hat, power, l1).value;
    return formula_rate_between(fading, l0, l1);
  };
  auto gap = [&](double lam_hat) {
    try {
      return rate_at(lam_hat) - target;
    } catch (const ConvergenceError&) {
      return -target;  // window collapsed: treat as zero rate
    }
  };

  double hi = 1e-3;
  for (int i = 0; i < 80 && gap(hi) > 0.0; ++i) hi *= 2.0;
  if (gap(hi) > 0.0) {
    throw ConvergenceError("solve_rate_limited: could not bracket the multiplier", hi, gap(hi));
  }
  Tolerance rt;
  rt.abs_tol = 1e-14;
  const double lam_hat = find_root(gap, 0.0, hi, rt);

  RateLimitedSolution out;
  out.lambda = lam_hat;
  out.l1 = broadcast_upper_level(fading, -lam_hat);
  out.l0 = find_level0(fading, -lam_hat, power, out.l1).value;
  out.transmit_rate = formula_rate_between(fading, out.l0, out.l1);
  if (std::abs(out.transmit_rate - target) > 1e-8) {
    throw ConvergenceError("solve_rate_limited: transmit rate missed the target",
                           out.transmit_rate, std::abs(out.transmit_rate - target));
  }
  if (fading.is_rayleigh()) {
    // closed-form cross-check of the zero-power level
    const double lw = 1.0 - lambert_w0(-(-lam_hat) * std::exp(1.0));
    if (std::abs(lw - out.l1) > 1e-7) {
      throw ConvergenceError("solve_rate_limited: Lambert cross-check failed", out.l1,
                             std::abs(lw - out.l1));
    }
  }

  PowerProfile p;
  p.fading = fading;
  p.total_power = power;
  p.multiplier = -lam_hat;
  p.analytic = true;
  p.l0 = out.l0;
  p.l1 = out.l1;
  const double lo = std::max(p.l0 / 10.0, fading.support_min + 1e-12);
  const double hi_grid = std::isfinite(fading.support_max)
                             ? std::min(10.0 * p.l1, fading.support_max)
                             : 10.0 * p.l1;
  p.grid = log_spaced(lo, hi_grid, grid_points);
  p.interference.resize(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    p.interference(i) = p.interference_at(p.grid(i));
  }
  out.profile = std::move(p);
  return out;
}

double received_rate(const PowerProfile& profile, double l) {
  if (l < 0.0) throw std::domain_error("received_rate: negative fading power");
  return profile.rate_to(l);
}

double average_rate(const PowerProfile& profile, const FadingModel& fading) {
  if (profile.degenerate()) return 0.0;

  Tolerance qt;
  qt.abs_tol = 1e-11;
  qt.rel_tol = 1e-10;

  // integration-by-parts form: weight each layer by its survival probability
  double byparts;
  if (profile.analytic) {
    const FadingModel& pf = profile.fading;
    auto integrand = [&](double a) {
      const double density = pf.is_rayleigh()
                                 ? 2.0 / a - 1.0
                                 : 2.0 / a + pf.pdf_derivative(a) / pf.pdf(a);
      return fading.survival(a) * density;
    };
    byparts = integrate(integrand, profile.l0, profile.l1, qt);
  } else {
    auto integrand = [&](double a) {
      const double i = profile.interference_at(a);
      return fading.survival(a) * a * profile.rho_at(a) / (1.0 + a * i);
    };
    // piecewise-smooth between profile knots; integrate cell by cell
    byparts = 0.0;
    const Eigen::ArrayXd& g = profile.grid;
    Tolerance cell_tol;
    cell_tol.abs_tol = 1e-12;
    cell_tol.rel_tol = 1e-9;
    for (Eigen::Index j = 0; j + 1 < g.size(); ++j) {
      const double a = std::max(g(j), profile.l0);
      const double b = std::min(g(j + 1), profile.l1);
      if (b > a) byparts += integrate(integrand, a, b, cell_tol);
    }
  }

  // direct form: E[R(l)] with the flat tail beyond l1 folded in analytically
  auto direct_integrand = [&](double l) { return fading.pdf(l) * profile.rate_to(l); };
  const double tail = fading.survival(profile.l1) * profile.transmit_rate();
  double direct;
  if (profile.analytic) {
    direct = integrate(direct_integrand, profile.l0, profile.l1, qt) + tail;
  } else {
    direct = tail;
    const Eigen::ArrayXd& g = profile.grid;
    Tolerance cell_tol;
    cell_tol.abs_tol = 1e-12;
    cell_tol.rel_tol = 1e-9;
    for (Eigen::Index j = 0; j + 1 < g.size(); ++j) {
      const double a = std::max(g(j), profile.l0);
      const double b = std::min(g(j + 1), profile.l1);
      if (b > a) direct += integrate(direct_integrand, a, b, cell_tol);
    }
  }

  if (std::abs(direct - byparts) > 1e-6 * (1.0 + std::abs(byparts))) {
    throw ConvergenceError("average_rate: direct and by-parts forms disagree", byparts,
                           std::abs(direct - byparts));
  }
  return byparts;
}

}  // namespace bcrelay
