#include "bcrelay/fading.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace bcrelay {

FadingModel make_rayleigh() {
  FadingModel m;
  m.kind = FadingKind::rayleigh_unit_mean;
  m.pdf = [](double l) { return l < 0.0 ? 0.0 : std::exp(-l); };
  m.cdf = [](double l) { return l < 0.0 ? 0.0 : -std::expm1(-l); };
  m.survival = [](double l) { return l < 0.0 ? 1.0 : std::exp(-l); };
  m.pdf_derivative = [](double l) { return l < 0.0 ? 0.0 : -std::exp(-l); };
  m.support_min = 0.0;
  m.support_max = std::numeric_limits<double>::infinity();
  m.derivative_exact = true;
  return m;
}

FadingModel make_tabulated(const std::vector<double>& levels,
                           const std::vector<double>& cdf_values) {
  const std::size_t n = levels.size();
  if (n != cdf_values.size()) {
    throw std::invalid_argument("make_tabulated: level/CDF size mismatch");
  }
  if (n < 3) {
    throw std::invalid_argument("make_tabulated: need at least 3 samples for a density");
  }
  if (std::abs(cdf_values.front()) > 1e-9) {
    throw std::invalid_argument("make_tabulated: first CDF sample must be 0");
  }
  if (cdf_values.back() < 1.0 - 1e-6) {
    throw std::invalid_argument("make_tabulated: last CDF sample must reach 1 (within 1e-6)");
  }
  Eigen::ArrayXd xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n && !(levels[i] < levels[i + 1])) {
      throw std::invalid_argument("make_tabulated: levels must be strictly increasing");
    }
    if (cdf_values[i] < -1e-12 || cdf_values[i] > 1.0 + 1e-6) {
      throw std::invalid_argument("make_tabulated: CDF samples must lie in [0, 1]");
    }
    if (i > 0 && cdf_values[i] < cdf_values[i - 1]) {
      throw std::invalid_argument("make_tabulated: CDF samples must be non-decreasing");
    }
    xs(i) = levels[i];
    ys(i) = cdf_values[i];
  }
  ys(0) = 0.0;
  ys /= ys(n - 1);  // renormalize so F(l_max) = 1

  auto interp = std::make_shared<TabulatedFunction>(xs, ys, InterpOrder::cubic_monotone,
                                                    /*clamp=*/true);
  FadingModel m;
  m.kind = FadingKind::tabulated;
  m.support_min = xs(0);
  m.support_max = xs(n - 1);
  m.cdf = [interp](double l) {
    if (l <= interp->x_min()) return 0.0;
    if (l >= interp->x_max()) return 1.0;
    return (*interp)(l);
  };
  m.survival = [cdf = m.cdf](double l) { return 1.0 - cdf(l); };
  m.pdf = [interp](double l) {
    if (l < interp->x_min() || l > interp->x_max()) return 0.0;
    return std::max(interp->derivative(l), 0.0);
  };
  m.pdf_derivative = [interp](double l) {
    if (l < interp->x_min() || l > interp->x_max()) return 0.0;
    return interp->second_derivative(l);
  };
  m.derivative_exact = false;

  // quadrature sanity check on the reconstructed density
  const double mass = integrate(m.pdf, m.support_min, m.support_max);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw std::invalid_argument("make_tabulated: reconstructed density does not integrate to 1");
  }
  return m;
}

FadingModel load_fading_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_fading_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_fading_csv: empty file " + path);
  }
  std::vector<double> ls, fs;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',')) {
      throw std::runtime_error("load_fading_csv: malformed row '" + line + "'");
    }
    ls.push_back(std::stod(a));
    fs.push_back(std::stod(b));
  }
  return make_tabulated(ls, fs);
}

}  // namespace bcrelay
