#include "bcrelay/tabulated.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcrelay {

TabulatedFunction::TabulatedFunction(Eigen::ArrayXd xs, Eigen::ArrayXd ys,
                                     InterpOrder order, bool clamp)
    : xs_(std::move(xs)), ys_(std::move(ys)), order_(order), clamp_(clamp) {
  const Eigen::Index n = xs_.size();
  if (n < 2 || ys_.size() != n) {
    throw std::invalid_argument("TabulatedFunction: need matching grids with >= 2 points");
  }
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (!(xs_(i) < xs_(i + 1))) {
      throw std::invalid_argument("TabulatedFunction: grid must be strictly increasing");
    }
  }
  if (order_ == InterpOrder::cubic_monotone) {
    // Fritsch-Carlson shape-preserving slopes
    slopes_.resize(n);
    Eigen::ArrayXd h(n - 1), d(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      h(i) = xs_(i + 1) - xs_(i);
      d(i) = (ys_(i + 1) - ys_(i)) / h(i);
    }
    if (n == 2) {
      slopes_(0) = slopes_(1) = d(0);
    } else {
      for (Eigen::Index i = 1; i + 1 < n; ++i) {
        if (d(i - 1) * d(i) <= 0.0) {
          slopes_(i) = 0.0;
        } else {
          const double w1 = 2.0 * h(i) + h(i - 1);
          const double w2 = h(i) + 2.0 * h(i - 1);
          slopes_(i) = (w1 + w2) / (w1 / d(i - 1) + w2 / d(i));
        }
      }
      auto endpoint = [](double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) {
          m = 0.0;
        } else if (d0 * d1 <= 0.0 && std::abs(m) > 3.0 * std::abs(d0)) {
          m = 3.0 * d0;
        }
        return m;
      };
      slopes_(0) = endpoint(h(0), h(1), d(0), d(1));
      slopes_(n - 1) = endpoint(h(n - 2), h(n - 3), d(n - 2), d(n - 3));
    }
  }
}

double TabulatedFunction::clamp_arg(double x) const {
  if (x < x_min() || x > x_max()) {
    if (!clamp_) {
      throw std::domain_error("TabulatedFunction: evaluation outside the tabulated range");
    }
    return std::clamp(x, x_min(), x_max());
  }
  return x;
}

Eigen::Index TabulatedFunction::cell(double x) const {
  const double* begin = xs_.data();
  const double* end = begin + xs_.size();
  Eigen::Index k = std::upper_bound(begin, end, x) - begin - 1;
  return std::clamp<Eigen::Index>(k, 0, xs_.size() - 2);
}

double TabulatedFunction::operator()(double x) const {
  x = clamp_arg(x);
  const Eigen::Index k = cell(x);
  const double h = xs_(k + 1) - xs_(k);
  const double t = (x - xs_(k)) / h;
  if (order_ == InterpOrder::linear) {
    return ys_(k) + t * (ys_(k + 1) - ys_(k));
  }
  const double t2 = t * t, t3 = t2 * t;
  return ys_(k) * (2.0 * t3 - 3.0 * t2 + 1.0) +
         h * slopes_(k) * (t3 - 2.0 * t2 + t) +
         ys_(k + 1) * (-2.0 * t3 + 3.0 * t2) +
         h * slopes_(k + 1) * (t3 - t2);
}

double TabulatedFunction::derivative(double x) const {
  x = clamp_arg(x);
  const Eigen::Index k = cell(x);
  const double h = xs_(k + 1) - xs_(k);
  const double t = (x - xs_(k)) / h;
  if (order_ == InterpOrder::linear) {
    return (ys_(k + 1) - ys_(k)) / h;
  }
  const double t2 = t * t;
  return (ys_(k) * (6.0 * t2 - 6.0 * t) +
          h * slopes_(k) * (3.0 * t2 - 4.0 * t + 1.0) +
          ys_(k + 1) * (-6.0 * t2 + 6.0 * t) +
          h * slopes_(k + 1) * (3.0 * t2 - 2.0 * t)) / h;
}

double TabulatedFunction::second_derivative(double x) const {
  x = clamp_arg(x);
  const Eigen::Index k = cell(x);
  const double h = xs_(k + 1) - xs_(k);
  const double t = (x - xs_(k)) / h;
  if (order_ == InterpOrder::linear) return 0.0;
  return (ys_(k) * (12.0 * t - 6.0) +
          h * slopes_(k) * (6.0 * t - 4.0) +
          ys_(k + 1) * (-12.0 * t + 6.0) +
          h * slopes_(k + 1) * (6.0 * t - 2.0)) / (h * h);
}

}  // namespace bcrelay
