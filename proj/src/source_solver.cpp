#include "bcrelay/source_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace bcrelay {
namespace {

// Shared discretization of the outer problem on a fixed level grid.
struct Mesh {
  Eigen::ArrayXd l;         // nodes
  Eigen::ArrayXd abar;      // cell midpoints
  Eigen::ArrayXd width;     // cell widths
  Eigen::ArrayXd pdf;       // f_Gamma at nodes
  Eigen::ArrayXd survival;  // 1 - F_Gamma at nodes
  double source_power = 0.0;
  const RelayPolicy* policy = nullptr;

  int n() const { return static_cast<int>(l.size()); }
};

Mesh make_mesh(const FadingModel& fading1, const RelayPolicy& policy, double power,
               int n_levels, double l_lo, double l_hi) {
  Mesh m;
  m.l.resize(n_levels);
  const double a = std::log(l_lo), b = std::log(l_hi);
  for (int i = 0; i < n_levels; ++i) {
    m.l(i) = std::exp(a + (b - a) * i / (n_levels - 1));
  }
  m.l(0) = l_lo;
  m.l(n_levels - 1) = l_hi;
  m.abar.resize(n_levels - 1);
  m.width.resize(n_levels - 1);
  for (int j = 0; j + 1 < n_levels; ++j) {
    m.abar(j) = 0.5 * (m.l(j) + m.l(j + 1));
    m.width(j) = m.l(j + 1) - m.l(j);
  }
  m.pdf.resize(n_levels);
  m.survival.resize(n_levels);
  for (int i = 0; i < n_levels; ++i) {
    m.pdf(i) = fading1.pdf(m.l(i));
    m.survival(i) = fading1.survival(m.l(i));
  }
  m.source_power = power;
  m.policy = &policy;
  return m;
}

struct Fields {
  Eigen::ArrayXd rate;   // R_r at nodes
  Eigen::ArrayXd hp;     // h*' at node rates
  Eigen::ArrayXd zeta;   // scaled stationarity residual at nodes
  double rate_total = 0.0;
};

// Layer rates by midpoint product per cell, then the marginal-value balance
//   zeta(l) = W(l) / (l f(l) (1 + l I(l))) - h*'(R_r(l)),
// with W(l) the expected downstream marginal value int_l^inf f h*'(R_r) dg.
// Positive zeta means level l wants more residual power above it.
Fields assemble(const Mesh& m, const Eigen::ArrayXd& I) {
  const int n = m.n();
  Fields f;
  f.rate.resize(n);
  f.hp.resize(n);
  f.zeta.resize(n);

  f.rate(0) = 0.0;
  for (int j = 0; j + 1 < n; ++j) {
    const double ibar = 0.5 * (I(j) + I(j + 1));
    const double d_i = I(j) - I(j + 1);
    f.rate(j + 1) = f.rate(j) + d_i * m.abar(j) / (1.0 + m.abar(j) * ibar);
  }
  f.rate_total = f.rate(n - 1);

  const RelayPolicy& pol = *m.policy;
  for (int i = 0; i < n; ++i) {
    const double r = std::max(f.rate(i), 0.0);
    f.hp(i) = r > pol.rate_saturation ? 0.0 : pol.h_derivatives(r).first;
  }

  Eigen::ArrayXd w(n);
  w(n - 1) = m.survival(n - 1) * f.hp(n - 1);
  for (int i = n - 2; i >= 0; --i) {
    w(i) = w(i + 1) +
           0.5 * (m.pdf(i) * f.hp(i) + m.pdf(i + 1) * f.hp(i + 1)) * m.width(i);
  }

  for (int i = 0; i < n; ++i) {
    const double denom = m.l(i) * m.pdf(i) * (1.0 + m.l(i) * I(i));
    f.zeta(i) = w(i) / denom - f.hp(i);
  }
  return f;
}

double evaluate_objective(const Mesh& m, const Eigen::ArrayXd& I) {
  const int n = m.n();
  double rate = 0.0;
  double e = 0.0;
  double prev = m.pdf(0) * m.policy->h(0.0);
  for (int j = 0; j + 1 < n; ++j) {
    const double ibar = 0.5 * (I(j) + I(j + 1));
    rate += (I(j) - I(j + 1)) * m.abar(j) / (1.0 + m.abar(j) * ibar);
    const double cur = m.pdf(j + 1) * m.policy->h(std::max(rate, 0.0));
    e += 0.5 * (prev + cur) * m.width(j);
    prev = cur;
  }
  e += m.survival(n - 1) * m.policy->h(std::max(rate, 0.0));
  return e;
}

// non-increasing isotonic projection (pool adjacent violators)
void project_monotone(Eigen::ArrayXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> value(n), weight(n);
  std::vector<int> count(n);
  int top = 0;
  for (int i = 0; i < n; ++i) {
    value[top] = v(i);
    weight[top] = 1.0;
    count[top] = 1;
    while (top > 0 && value[top - 1] < value[top]) {
      const double wsum = weight[top - 1] + weight[top];
      value[top - 1] = (weight[top - 1] * value[top - 1] + weight[top] * value[top]) / wsum;
      weight[top - 1] = wsum;
      count[top - 1] += count[top];
      --top;
    }
    ++top;
  }
  int idx = 0;
  for (int b = 0; b < top; ++b) {
    for (int k = 0; k < count[b]; ++k) v(idx++) = value[b];
  }
}

void project_feasible(const Mesh& m, Eigen::ArrayXd& I) {
  I(0) = m.source_power;
  I(m.n() - 1) = 0.0;
  project_monotone(I);
  I = I.cwiseMax(0.0).cwiseMin(m.source_power);
  I(0) = m.source_power;
  I(m.n() - 1) = 0.0;
}

enum class NodeClass { free_node, at_upper, at_lower, saturated };

std::vector<NodeClass> classify(const Mesh& m, const Eigen::ArrayXd& I, const Fields& f) {
  const int n = m.n();
  const double p = m.source_power;
  const double bound_eps = 1e-11 * std::max(p, 1.0);
  std::vector<NodeClass> cls(n, NodeClass::free_node);
  for (int i = 0; i < n; ++i) {
    const bool beyond_sat = f.rate(i) > m.policy->rate_saturation * (1.0 + 1e-12) &&
                            f.hp(i) <= 0.0;
    if (beyond_sat) {
      cls[i] = NodeClass::saturated;
    } else if (I(i) >= p - bound_eps && f.zeta(i) >= -1e-10) {
      cls[i] = NodeClass::at_upper;
    } else if (I(i) <= bound_eps && f.zeta(i) <= 1e-10) {
      cls[i] = NodeClass::at_lower;
    }
  }
  return cls;
}

Eigen::VectorXd class_residual(const Mesh& m, const Eigen::ArrayXd& I,
                               const std::vector<NodeClass>& cls) {
  const Fields f = assemble(m, I);
  const int n = m.n();
  const double s = std::max(m.source_power, 1.0);
  Eigen::VectorXd r(n - 2);
  for (int i = 1; i + 1 < n; ++i) {
    switch (cls[i]) {
      case NodeClass::free_node: r(i - 1) = f.zeta(i); break;
      case NodeClass::at_upper: r(i - 1) = (I(i) - m.source_power) / s; break;
      case NodeClass::at_lower:
      case NodeClass::saturated: r(i - 1) = I(i) / s; break;
    }
  }
  return r;
}

// KKT violation: stationarity on free nodes, one-sided at clamped nodes.
double kkt_norm(const Mesh& m, const Eigen::ArrayXd& I) {
  const Fields f = assemble(m, I);
  const int n = m.n();
  const double p = m.source_power;
  const double bound_eps = 1e-11 * std::max(p, 1.0);
  double worst = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    const bool beyond_sat = f.rate(i) > m.policy->rate_saturation * (1.0 + 1e-12) &&
                            f.hp(i) <= 0.0;
    double v;
    if (beyond_sat) {
      v = I(i) / std::max(p, 1.0);  // minimum-power completion: no power here
    } else if (I(i) >= p - bound_eps) {
      v = std::max(-f.zeta(i), 0.0);
    } else if (I(i) <= bound_eps) {
      v = std::max(f.zeta(i), 0.0);
    } else {
      v = std::abs(f.zeta(i));
    }
    worst = std::max(worst, v);
  }
  return worst;
}

Eigen::ArrayXd single_hop_initial(const Mesh& m, const FadingModel& fading1) {
  const int n = m.n();
  Eigen::ArrayXd I(n);
  for (int i = 0; i < n; ++i) {
    const double l = m.l(i);
    const double f = fading1.pdf(l);
    const double num = fading1.survival(l) - l * f;
    I(i) = std::clamp(num / (f * l * l), 0.0, m.source_power);
  }
  I(0) = m.source_power;
  I(n - 1) = 0.0;
  project_monotone(I);
  return I;
}

SourceSolution package(const Mesh& m, const FadingModel& fading1, const Eigen::ArrayXd& I,
                       SourceSolution::Method method) {
  SourceSolution sol;
  sol.method = method;
  sol.profile = PowerProfile::from_samples(m.l, I, m.source_power, fading1);
  sol.expected_rate = evaluate_objective(m, I);
  sol.residual_norm = kkt_norm(m, I);
  return sol;
}

std::pair<double, double> solve_span(const FadingModel& fading1, double power,
                                     const RelayPolicy& policy) {
  PowerProfile sh = solve_unconstrained(fading1, power);
  double lo = sh.l0;
  // when the relay saturates below the source feeding rate, the optimum
  // concentrates power at lower levels than the plain single-hop solution;
  // the rate-limited profile at R_sat marks how far down it can reach
  if (policy.rate_saturation > 0.0 && policy.rate_saturation < sh.transmit_rate()) {
    lo = std::min(lo, solve_rate_limited(fading1, power, policy.rate_saturation).l0);
  }
  lo /= 4.0;
  double hi = 4.0 * sh.l1;
  lo = std::max(lo, fading1.support_min + 1e-12);
  if (std::isfinite(fading1.support_max)) hi = std::min(hi, fading1.support_max);
  return {lo, hi};
}

}  // namespace

double relay_input_rate(const PowerProfile& source_profile, double gamma) {
  if (gamma < 0.0) throw std::domain_error("relay_input_rate: negative fading power");
  return source_profile.rate_to(gamma);
}

double euler_residual(double l, const PowerProfile& source_profile,
                      const RelayPolicy& policy) {
  if (source_profile.grid.size() < 4) {
    throw std::invalid_argument("euler_residual: profile carries no usable grid");
  }
  const Eigen::ArrayXd& g = source_profile.grid;
  if (l < g(0) || l > g(g.size() - 1)) {
    throw std::invalid_argument("euler_residual: level outside the profile grid");
  }
  Mesh m = make_mesh(source_profile.fading, policy, source_profile.total_power,
                     static_cast<int>(g.size()), g(0), g(g.size() - 1));
  m.l = g;  // keep the profile's own nodes
  for (int j = 0; j + 1 < m.n(); ++j) {
    m.abar(j) = 0.5 * (g(j) + g(j + 1));
    m.width(j) = g(j + 1) - g(j);
  }
  for (int i = 0; i < m.n(); ++i) {
    m.pdf(i) = source_profile.fading.pdf(g(i));
    m.survival(i) = source_profile.fading.survival(g(i));
  }
  Eigen::ArrayXd I(m.n());
  for (int i = 0; i < m.n(); ++i) I(i) = source_profile.interference_at(g(i));
  const Fields f = assemble(m, I);

  // interpolate the nodal residual at the requested level
  const double* begin = g.data();
  Eigen::Index k = std::upper_bound(begin, begin + g.size(), l) - begin - 1;
  k = std::clamp<Eigen::Index>(k, 0, g.size() - 2);
  const double t = (l - g(k)) / (g(k + 1) - g(k));
  return (1.0 - t) * f.zeta(k) + t * f.zeta(k + 1);
}

SourceSolution solve_source_profile(const FadingModel& fading1, const RelayPolicy& policy,
                                    double source_power, int n_levels) {
  if (n_levels < 32) throw std::invalid_argument("solve_source_profile: n_levels must be >= 32");
  if (source_power < 0.0) throw std::domain_error("solve_source_profile: negative power");

  const auto [lo, hi] = solve_span(fading1, std::max(source_power, 1e-300), policy);
  Mesh m = make_mesh(fading1, policy, source_power, n_levels, lo, hi);

  if (source_power == 0.0 || policy.rate_saturation <= 0.0) {
    Eigen::ArrayXd I = Eigen::ArrayXd::Zero(n_levels);
    I(0) = source_power;
    return package(m, fading1, I, SourceSolution::Method::euler);
  }

  Eigen::ArrayXd I = single_hop_initial(m, fading1);
  const double s = std::max(source_power, 1.0);
  const double target = 1e-9;
  double best_kkt = kkt_norm(m, I);
  Eigen::ArrayXd best_I = I;

  for (int iter = 0; iter < 120; ++iter) {
    Fields f = assemble(m, I);
    const std::vector<NodeClass> cls = classify(m, I, f);
    Eigen::VectorXd r = class_residual(m, I, cls);
    const double rn = r.lpNorm<Eigen::Infinity>();
    const double kv = kkt_norm(m, I);
    if (kv < best_kkt) {
      best_kkt = kv;
      best_I = I;
    }
    if (kv <= target) break;

    // forward-difference Jacobian of the class-frozen residual
    const int mdim = m.n() - 2;
    Eigen::MatrixXd jac(mdim, mdim);
    const double h = std::max(1e-7 * s, 1e-10);
    for (int k = 0; k < mdim; ++k) {
      Eigen::ArrayXd probe = I;
      probe(k + 1) += probe(k + 1) + h > m.source_power ? -h : h;
      const double sign = probe(k + 1) > I(k + 1) ? 1.0 : -1.0;
      jac.col(k) = sign * (class_residual(m, probe, cls) - r) / h;
    }

    Eigen::VectorXd delta;
    bool solved = false;
    for (double mu = 0.0; mu <= 1e-2; mu = (mu == 0.0 ? 1e-10 : mu * 100.0)) {
      Eigen::MatrixXd jmu = jac;
      if (mu > 0.0) jmu.diagonal().array() += mu;
      delta = jmu.partialPivLu().solve(-r);
      if (delta.allFinite()) {
        solved = true;
        break;
      }
    }
    if (!solved) break;

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 35; ++ls) {
      Eigen::ArrayXd trial = I;
      for (int k = 0; k < mdim; ++k) trial(k + 1) += alpha * delta(k);
      project_feasible(m, trial);
      const double trn = class_residual(m, trial, cls).lpNorm<Eigen::Infinity>();
      if (trn < rn * (1.0 - 1e-4 * alpha) || trn < target) {
        I = trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // residual landscape changed under reclassification; restart from the
      // projected step once, then give up to the caller
      Eigen::ArrayXd trial = I;
      for (int k = 0; k < mdim; ++k) trial(k + 1) += 1e-3 * delta(k);
      project_feasible(m, trial);
      if (kkt_norm(m, trial) < kkt_norm(m, I)) {
        I = trial;
      } else {
        break;
      }
    }
  }

  const double final_kkt = kkt_norm(m, best_I);
  SourceSolution sol = package(m, fading1, best_I, SourceSolution::Method::euler);
  if (final_kkt > 1e-5) {
    throw SourceSolveError("solve_source_profile: stationarity residual stalled at " +
                               std::to_string(final_kkt),
                           std::move(sol));
  }
  return sol;
}

SourceSolution direct_oracle(const FadingModel& fading1, const RelayPolicy& policy,
                             double source_power, int n_levels) {
  if (n_levels < 32) throw std::invalid_argument("direct_oracle: n_levels must be >= 32");
  if (source_power < 0.0) throw std::domain_error("direct_oracle: negative power");

  const auto [lo, hi] = solve_span(fading1, std::max(source_power, 1e-300), policy);
  Mesh m = make_mesh(fading1, policy, source_power, n_levels, lo, hi);
  const int cells = n_levels - 1;

  auto interference_of = [&](const Eigen::ArrayXd& mass) {
    Eigen::ArrayXd I(n_levels);
    double acc = 0.0;
    I(n_levels - 1) = 0.0;
    for (int i = cells - 1; i >= 0; --i) {
      acc += mass(i);
      I(i) = acc;
    }
    return I;
  };
  auto objective = [&](const Eigen::ArrayXd& mass) {
    return evaluate_objective(m, interference_of(mass));
  };
  // Euclidean projection onto { mass >= 0, sum = source_power }
  auto project_simplex = [&](Eigen::ArrayXd v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double acc = 0.0, theta = 0.0;
    int rho = 0;
    for (int i = 0; i < static_cast<int>(u.size()); ++i) {
      acc += u[i];
      const double t = (acc - source_power) / (i + 1);
      if (u[i] - t > 0.0) {
        rho = i + 1;
        theta = t;
      }
    }
    if (rho == 0) {
      v.setConstant(source_power / v.size());
      return v;
    }
    return (v - theta).cwiseMax(0.0).eval();
  };

  Eigen::ArrayXd mass = Eigen::ArrayXd::Constant(cells, source_power / cells);
  if (source_power == 0.0 || policy.rate_saturation <= 0.0) {
    return package(m, fading1, interference_of(mass), SourceSolution::Method::direct_oracle);
  }

  double value = objective(mass);
  const double fd = std::max(1e-6 * source_power / cells, 1e-12);
  auto gradient = [&](const Eigen::ArrayXd& p, double base) {
    Eigen::ArrayXd g(cells);
    for (int j = 0; j < cells; ++j) {
      Eigen::ArrayXd up = p;
      up(j) += fd;
      g(j) = (objective(up) - base) / fd;
    }
    return g;
  };
  // maximize f(mass + t d) over t in [0, 1] by golden section; the segment
  // stays inside the simplex because both endpoints do
  auto line_search = [&](const Eigen::ArrayXd& d) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = objective(mass + x1 * d), f2 = objective(mass + x2 * d);
    for (int i = 0; i < 40; ++i) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (b - a);
        f2 = objective(mass + x2 * d);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi * (b - a);
        f1 = objective(mass + x1 * d);
      }
    }
    return 0.5 * (a + b);
  };

  double eta = std::max(source_power, 1.0);
  int stall = 0;
  for (int iter = 0; iter < 2000 && stall < 25; ++iter) {
    const Eigen::ArrayXd grad = gradient(mass, value);
    Eigen::ArrayXd dir = project_simplex(mass + eta * grad) - mass;
    if (dir.abs().maxCoeff() < 1e-14 * std::max(source_power, 1.0)) {
      eta *= 4.0;
      ++stall;
      continue;
    }
    const double t = line_search(dir);
    const Eigen::ArrayXd trial = mass + t * dir;
    const double tv = objective(trial);
    if (tv > value + 1e-15) {
      mass = trial;
      value = tv;
      stall = 0;
      eta *= (t > 0.9 ? 2.0 : (t < 0.1 ? 0.25 : 1.0));
      eta = std::clamp(eta, 1e-9 * source_power, 1e6 * std::max(source_power, 1.0));
    } else {
      eta *= 0.25;
      ++stall;
    }
  }

  // deterministic pairwise-transfer polish: gradient ascent alone crawls in
  // the flat directions, shifting mass between cell pairs does not; the
  // transfer size anneals every round so corner cells get resolved finely
  double shift = source_power / 16.0;
  for (int round = 0; round < 110 && shift > 1e-12 * source_power; ++round) {
    bool any = true;
    for (int sweep = 0; sweep < 4 && any; ++sweep) {
      any = false;
      for (int gap : {64, 16, 4, 2, 1}) {
        if (gap >= cells) continue;
        for (int j = 0; j + gap < cells; ++j) {
          for (int dirn = 0; dirn < 2; ++dirn) {
            const int from = dirn == 0 ? j : j + gap;
            const int to = dirn == 0 ? j + gap : j;
            const double moved = std::min(shift, mass(from));
            if (moved <= 0.0) continue;
            Eigen::ArrayXd trial = mass;
            trial(from) -= moved;
            trial(to) += moved;
            const double tv = objective(trial);
            if (tv > value + 1e-15) {
              mass = trial;
              value = tv;
              any = true;
            }
          }
        }
      }
    }
    shift *= 0.65;
  }

  return package(m, fading1, interference_of(mass), SourceSolution::Method::direct_oracle);
}

double expected_destination_rate(const Eigen::ArrayXd& grid, const Eigen::ArrayXd& interference,
                                 const FadingModel& fading1, const RelayPolicy& policy) {
  if (grid.size() != interference.size() || grid.size() < 2) {
    throw std::invalid_argument("expected_destination_rate: bad samples");
  }
  Mesh m = make_mesh(fading1, policy, interference(0), static_cast<int>(grid.size()),
                     grid(0), grid(grid.size() - 1));
  m.l = grid;
  for (int j = 0; j + 1 < m.n(); ++j) {
    m.abar(j) = 0.5 * (grid(j) + grid(j + 1));
    m.width(j) = grid(j + 1) - grid(j);
  }
  for (int i = 0; i < m.n(); ++i) {
    m.pdf(i) = fading1.pdf(grid(i));
    m.survival(i) = fading1.survival(grid(i));
  }
  return evaluate_objective(m, interference);
}

}  // namespace bcrelay
