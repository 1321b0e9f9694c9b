#pragma once

#include <Eigen/Core>

namespace bcrelay {

enum class InterpOrder { linear, cubic_monotone };

/// Immutable tabulation of a scalar function on a strictly increasing grid.
/// cubic_monotone uses Fritsch-Carlson slopes, so monotone data yields a
/// monotone interpolant. Evaluation outside [x_min, x_max] throws unless
/// the clamp flag is set at construction.
class TabulatedFunction {
 public:
  TabulatedFunction() = default;
  TabulatedFunction(Eigen::ArrayXd xs, Eigen::ArrayXd ys,
                    InterpOrder order = InterpOrder::cubic_monotone,
                    bool clamp = false);

  double operator()(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  double x_min() const { return xs_(0); }
  double x_max() const { return xs_(xs_.size() - 1); }
  const Eigen::ArrayXd& xs() const { return xs_; }
  const Eigen::ArrayXd& ys() const { return ys_; }
  Eigen::Index size() const { return xs_.size(); }

 private:
  double clamp_arg(double x) const;
  Eigen::Index cell(double x) const;

  Eigen::ArrayXd xs_, ys_, slopes_;
  InterpOrder order_ = InterpOrder::cubic_monotone;
  bool clamp_ = false;
};

}  // namespace bcrelay
