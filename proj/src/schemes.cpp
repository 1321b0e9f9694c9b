#include "bcrelay/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

namespace bcrelay {
namespace {

// End-to-end fading power of the amplify-and-forward chain, normalized so the
// destination SNR is s_b * P_s. All three statistics are quadratures over the
// second-hop gain; the integrand vanishes with an essential singularity at
// the lower limit, removed by the substitution l = c + t^2.
struct AfChannel {
  double ps, pr;

  double weighted_integral(double a, int weight_order) const {
    const double c = a * ps / pr;
    auto kernel = [&](double l) {
      const double denom = l * pr - a * ps;
      if (denom <= 0.0) return 0.0;
      const double g = a * (1.0 + pr * l) / denom;
      const double expo = -l - g;
      if (expo < -700.0) return 0.0;
      const double base = std::exp(expo);
      if (weight_order == 0) return base;
      const double phi = l * pr * (1.0 + pr * l) / (denom * denom);
      if (weight_order == 1) return phi * base;
      return (2.0 * ps * phi / denom - phi * phi) * base;
    };
    Tolerance qt;
    qt.abs_tol = 1e-12;
    qt.rel_tol = 1e-10;
    auto near = [&](double t) { return 2.0 * t * kernel(c + t * t); };
    const double split = 1.0;
    double total = integrate(near, 0.0, std::sqrt(split), qt);
    total += integrate_upper_infinite(kernel, c + split, qt);
    return total;
  }

  double survival(double a) const { return a <= 0.0 ? 1.0 : weighted_integral(a, 0); }
  double density(double a) const { return weighted_integral(a, 1); }
  double density_derivative(double a) const { return weighted_integral(a, 2); }
};

double golden_max(const RealFn& f, double lo, double hi, int iters = 120) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

double ergodic_rate(const FadingModel& fading, double power) {
  if (power <= 0.0) return 0.0;
  auto integrand = [&](double a) { return fading.pdf(a) * std::log1p(a * power); };
  Tolerance qt;
  qt.abs_tol = 1e-11;
  qt.rel_tol = 1e-9;
  if (std::isfinite(fading.support_max)) {
    return integrate(integrand, fading.support_min, fading.support_max, qt);
  }
  return integrate_upper_infinite(integrand, std::max(fading.support_min, 0.0), qt);
}

}  // namespace

void NetworkConfig::validate() const {
  if (source_power < 0.0 || relay_power < 0.0) {
    throw std::domain_error("NetworkConfig: powers must be non-negative");
  }
  if (!fading1.pdf || !fading2.pdf) {
    throw std::invalid_argument("NetworkConfig: fading models not set");
  }
}

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::df_opt: return "df_opt";
    case Scheme::af: return "af";
    case Scheme::df_1bs: return "df_1bs";
    case Scheme::cutset: return "cutset";
  }
  return "?";
}

SchemeResult df_expected_rate(const NetworkConfig& cfg, int n_levels) {
  cfg.validate();
  if (cfg.source_power <= 0.0 || cfg.relay_power <= 0.0) {
    SchemeResult r;
    r.scheme = Scheme::df_opt;
    r.diagnostics["degenerate"] = 1.0;
    return r;
  }
  RelayPolicy policy = build_relay_policy(cfg.fading2, cfg.relay_power);
  return df_expected_rate(cfg, policy, n_levels);
}

SourceSolution solve_source_with_fallback(const NetworkConfig& cfg, const RelayPolicy& policy,
                                          int n_levels, bool* used_fallback) {
  if (used_fallback) *used_fallback = false;
  try {
    return solve_source_profile(cfg.fading1, policy, cfg.source_power, n_levels);
  } catch (const SourceSolveError& e) {
    if (used_fallback) *used_fallback = true;
    SourceSolution oracle = direct_oracle(cfg.fading1, policy, cfg.source_power, n_levels);
    return e.best_iterate.expected_rate > oracle.expected_rate ? e.best_iterate : oracle;
  }
}

SchemeResult df_expected_rate(const NetworkConfig& cfg, const RelayPolicy& policy,
                              int n_levels) {
  cfg.validate();
  SchemeResult r;
  r.scheme = Scheme::df_opt;
  if (cfg.source_power <= 0.0 || cfg.relay_power <= 0.0) {
    r.diagnostics["degenerate"] = 1.0;
    return r;
  }

  bool fallback = false;
  SourceSolution sol = solve_source_with_fallback(cfg, policy, n_levels, &fallback);
  r.diagnostics["fallback"] = fallback ? 1.0 : 0.0;
  r.rate = sol.expected_rate;
  r.diagnostics["residual_norm"] = sol.residual_norm;
  r.diagnostics["method_euler"] = sol.method == SourceSolution::Method::euler ? 1.0 : 0.0;
  r.diagnostics["source_l0"] = sol.profile.l0;
  r.diagnostics["source_l1"] = sol.profile.l1;
  r.diagnostics["rate_saturation"] = policy.rate_saturation;
  return r;
}

FadingModel make_af_equivalent_fading(double source_power, double relay_power) {
  auto ch = std::make_shared<AfChannel>(AfChannel{source_power, relay_power});
  FadingModel m;
  m.kind = FadingKind::tabulated;  // not closed form; statistics via quadrature
  m.support_min = 0.0;
  m.support_max = std::numeric_limits<double>::infinity();
  m.derivative_exact = true;
  m.pdf = [ch](double a) { return ch->density(a); };
  m.survival = [ch](double a) { return ch->survival(a); };
  m.cdf = [ch](double a) { return 1.0 - ch->survival(a); };
  m.pdf_derivative = [ch](double a) { return ch->density_derivative(a); };
  return m;
}

SchemeResult af_expected_rate(const NetworkConfig& cfg) {
  cfg.validate();
  SchemeResult r;
  r.scheme = Scheme::af;
  if (!cfg.fading1.is_rayleigh() || !cfg.fading2.is_rayleigh()) {
    throw std::invalid_argument("af_expected_rate: closed form requires Rayleigh hops");
  }
  if (cfg.source_power <= 0.0 || cfg.relay_power <= 0.0) {
    r.diagnostics["degenerate"] = 1.0;
    return r;
  }

  const AfChannel ch{cfg.source_power, cfg.relay_power};

  // single-hop optimum applied to the equivalent channel
  auto numerator = [&](double a) { return ch.survival(a) - a * ch.density(a); };
  double lo = 1e-4, hi = 2e-4;
  while (numerator(hi) > 0.0 && hi < 1e4) {
    lo = hi;
    hi *= 2.0;
  }
  Tolerance rt;
  rt.abs_tol = 1e-12;
  const double l1 = find_root(numerator, lo, hi, rt);

  auto interference = [&](double a) {
    const double f = ch.density(a);
    return (ch.survival(a) - a * f) / (a * a * f) - cfg.source_power;
  };
  double l0_lo = 0.5 * l1;
  while (interference(l0_lo) < 0.0 && l0_lo > 1e-12) l0_lo *= 0.5;
  const double l0 = find_root(interference, l0_lo, l1, rt);

  auto rate_density = [&](double a) {
    const double s = ch.survival(a);
    const double f = ch.density(a);
    return 2.0 * s / a + s * ch.density_derivative(a) / f;
  };
  Tolerance qt;
  qt.abs_tol = 1e-9;
  qt.rel_tol = 1e-8;
  r.rate = integrate(rate_density, l0, l1, qt);
  r.diagnostics["l0"] = l0;
  r.diagnostics["l1"] = l1;
  return r;
}

SchemeResult df_1bs_expected_rate(const NetworkConfig& cfg) {
  cfg.validate();
  if (cfg.source_power <= 0.0 || cfg.relay_power <= 0.0) {
    SchemeResult r;
    r.scheme = Scheme::df_1bs;
    r.diagnostics["degenerate"] = 1.0;
    return r;
  }
  RelayPolicy policy = build_relay_policy(cfg.fading2, cfg.relay_power);
  return df_1bs_expected_rate(cfg, policy);
}

SchemeResult df_1bs_expected_rate(const NetworkConfig& cfg, const RelayPolicy& policy) {
  cfg.validate();
  SchemeResult r;
  r.scheme = Scheme::df_1bs;
  if (cfg.source_power <= 0.0 || policy.rate_saturation <= 0.0) {
    r.diagnostics["degenerate"] = 1.0;
    return r;
  }

  // Expected rate of a one-level source code decoded above gamma_s: the relay
  // hears log(1 + P_s gamma_s) with probability 1 - F(gamma_s) and replies
  // with its best broadcast code for that input rate.
  auto objective = [&](double gs) {
    const double in_rate = std::log1p(cfg.source_power * gs);
    return cfg.fading1.survival(gs) * policy.h(std::min(in_rate, policy.rate_saturation));
  };

  const double gamma_sat = std::expm1(policy.rate_saturation) / cfg.source_power;
  double g_hi = gamma_sat;
  if (std::isfinite(cfg.fading1.support_max)) g_hi = std::min(g_hi, cfg.fading1.support_max);
  const double g_lo = std::max(gamma_sat * 1e-4, cfg.fading1.support_min + 1e-12);

  const int scan = 256;
  double best_g = g_lo, best_v = -1.0;
  int best_k = 0;
  std::vector<double> gs(scan);
  for (int k = 0; k < scan; ++k) {
    gs[k] = g_lo * std::pow(g_hi / g_lo, static_cast<double>(k) / (scan - 1));
    const double v = objective(gs[k]);
    if (v > best_v) {
      best_v = v;
      best_g = gs[k];
      best_k = k;
    }
  }
  const double bracket_lo = gs[std::max(best_k - 1, 0)];
  const double bracket_hi = gs[std::min(best_k + 1, scan - 1)];
  const double g_star = golden_max(objective, bracket_lo, bracket_hi);
  const double refined = objective(g_star);

  if (refined >= best_v) {
    r.rate = refined;
    r.diagnostics["gamma_s"] = g_star;
  } else {
    r.rate = best_v;
    r.diagnostics["gamma_s"] = best_g;
  }
  return r;
}

SchemeResult cutset_bound(const NetworkConfig& cfg) {
  cfg.validate();
  SchemeResult r;
  r.scheme = Scheme::cutset;
  const double hop1 = ergodic_rate(cfg.fading1, cfg.source_power);
  const double hop2 = ergodic_rate(cfg.fading2, cfg.relay_power);
  r.rate = std::min(hop1, hop2);
  r.diagnostics["hop1"] = hop1;
  r.diagnostics["hop2"] = hop2;
  return r;
}

}  // namespace bcrelay
