#include "bcrelay/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace bcrelay {
namespace {

// 15-point Kronrod nodes with the embedded 7-point Gauss rule.
constexpr int kKronrod = 8;  // nodes on [0, 1] side, node 7 is the midpoint
constexpr double kXgk[kKronrod] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
constexpr double kWgk[kKronrod] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Panel {
  double integral = 0.0;
  double error = 0.0;
};

Panel gauss_kronrod(const RealFn& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double fv[2 * kKronrod - 1];
  for (int i = 0; i < kKronrod - 1; ++i) {
    fv[i] = f(mid - half * kXgk[i]);
    fv[2 * kKronrod - 2 - i] = f(mid + half * kXgk[i]);
  }
  fv[kKronrod - 1] = f(mid);

  double kron = 0.0;
  for (int i = 0; i < kKronrod - 1; ++i) {
    kron += kWgk[i] * (fv[i] + fv[2 * kKronrod - 2 - i]);
  }
  kron += kWgk[kKronrod - 1] * fv[kKronrod - 1];

  double gauss = kWg[3] * fv[kKronrod - 1];
  for (int i = 0; i < 3; ++i) {
    gauss += kWg[i] * (fv[2 * i + 1] + fv[2 * kKronrod - 3 - 2 * i]);
  }

  Panel p;
  p.integral = half * kron;
  const double diff = half * std::abs(kron - gauss);
  // QUADPACK-style sharpening of the embedded-rule error estimate
  p.error = diff > 0.0 ? std::min(std::pow(200.0 * diff, 1.5), diff) : 0.0;
  return p;
}

struct Segment {
  double a, b;
  Panel panel;
};

}  // namespace

void Tolerance::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_iter < 1) {
    throw std::invalid_argument("Tolerance: abs_tol > 0, rel_tol > 0, max_iter >= 1 required");
  }
}

double integrate(const RealFn& f, double a, double b, const Tolerance& tol) {
  tol.validate();
  if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
  if (a == b) return 0.0;

  std::vector<Segment> segs;
  segs.push_back({a, b, gauss_kronrod(f, a, b)});

  const int max_segments = 2000;
  for (int iter = 0; iter < 4 * max_segments; ++iter) {
    double total = 0.0, err = 0.0;
    for (const auto& s : segs) {
      total += s.panel.integral;
      err += s.panel.error;
    }
    if (!std::isfinite(total)) {
      throw ConvergenceError("integrate: non-finite integrand encountered", total, err);
    }
    const double goal = std::max(tol.abs_tol, tol.rel_tol * std::abs(total));
    if (err <= goal) return total;
    if (static_cast<int>(segs.size()) >= max_segments) {
      throw ConvergenceError("integrate: refinement limit reached", total, err);
    }

    // split the worst segment
    std::size_t worst = 0;
    for (std::size_t i = 1; i < segs.size(); ++i) {
      if (segs[i].panel.error > segs[worst].panel.error) worst = i;
    }
    Segment s = segs[worst];
    const double m = 0.5 * (s.a + s.b);
    if (!(m > s.a && m < s.b)) {
      // interval no longer splittable in double precision
      return total;
    }
    segs[worst] = {s.a, m, gauss_kronrod(f, s.a, m)};
    segs.push_back({m, s.b, gauss_kronrod(f, m, s.b)});
  }
  double total = 0.0, err = 0.0;
  for (const auto& s : segs) {
    total += s.panel.integral;
    err += s.panel.error;
  }
  throw ConvergenceError("integrate: did not converge", total, err);
}

double integrate_upper_infinite(const RealFn& f, double a, const Tolerance& tol) {
  auto g = [&](double t) {
    const double u = 1.0 - t;
    if (u <= 1e-14) return 0.0;
    const double x = a + t / u;
    return f(x) / (u * u);
  };
  return integrate(g, 0.0, 1.0 - 1e-12, tol);
}

double find_root(const RealFn& f, double lo, double hi, const Tolerance& tol) {
  tol.validate();
  if (!(lo <= hi)) throw std::invalid_argument("find_root: requires lo <= hi");

  double fa = f(lo), fb = f(hi);
  if (std::isnan(fa) || std::isnan(fb)) {
    throw std::domain_error("find_root: NaN at bracket endpoint");
  }
  if (std::abs(fa) <= tol.abs_tol) return lo;
  if (std::abs(fb) <= tol.abs_tol) return hi;
  if (fa * fb > 0.0) {
    throw std::invalid_argument("find_root: no sign change on bracket");
  }

  // Brent's method
  double a = lo, b = hi, c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < std::max(tol.max_iter, 100); ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double eps = std::numeric_limits<double>::epsilon();
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol.abs_tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= tol.abs_tol) {
      return b;
    }
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
    if (std::isnan(fb)) throw std::domain_error("find_root: NaN from function");
    if (fb * fc > 0.0) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  throw ConvergenceError("find_root: iteration limit reached", b, std::abs(fb));
}

double lambert_w0(double x) {
  const double inv_e = std::exp(-1.0);
  if (x < -inv_e - 1e-12) {
    throw std::domain_error("lambert_w0: argument below -1/e");
  }
  if (x <= -inv_e) return -1.0;
  if (x == 0.0) return 0.0;

  double w;
  if (x < -0.25) {
    // series around the branch point, p = sqrt(2(1 + e x))
    const double p = std::sqrt(2.0 * (1.0 + std::exp(1.0) * x));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else if (x < 1.0) {
    w = x * (1.0 - x + 1.5 * x * x) / (1.0 + 0.5 * x);
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1 > 1.0 ? l1 : 1.0 + l1);
    w = l1 - l2 + l2 / std::max(l1, 1.0);
  }

  for (int i = 0; i < 60; ++i) {
    const double ew = std::exp(w);
    const double res = w * ew - x;
    if (std::abs(res) <= 1e-13 * std::max(1.0, std::abs(x))) break;
    // Halley step
    const double denom = ew * (w + 1.0) - (w + 2.0) * res / (2.0 * w + 2.0);
    double step = res / denom;
    double wn = w - step;
    if (wn < -1.0) wn = -1.0 + 0.5 * (w + 1.0);
    w = wn;
  }
  return w;
}

double fd_derivative(const RealFn& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double fd_second_derivative(const RealFn& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace bcrelay
