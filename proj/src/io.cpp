#include "bcrelay/io.hpp"

#include <cmath>
#include <cstdio>

namespace bcrelay {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_profile_csv(std::ostream& os, const PowerProfile& profile,
                       const std::map<std::string, double>& metadata) {
  for (const auto& [key, value] : metadata) {
    os << "# " << key << "=" << format_number(value) << "\n";
  }
  os << "l,I,rho,R\n";
  for (Eigen::Index i = 0; i < profile.grid.size(); ++i) {
    const double l = profile.grid(i);
    os << format_number(l) << "," << format_number(profile.interference_at(l)) << ","
       << format_number(profile.rho_at(l)) << "," << format_number(profile.rate_to(l))
       << "\n";
  }
}

void write_policy_csv(std::ostream& os, const RelayPolicy& policy) {
  os << "# pr=" << format_number(policy.relay_power)
     << "\n# rate_saturation=" << format_number(policy.rate_saturation) << "\n";
  os << "R,h,hp,hpp\n";
  for (Eigen::Index i = 0; i < policy.grid_rates.size(); ++i) {
    const double r = policy.grid_rates(i);
    const auto [hp, hpp] = policy.h_derivatives(r);
    os << format_number(r) << "," << format_number(policy.h(r)) << "," << format_number(hp)
       << "," << format_number(hpp) << "\n";
  }
}

void write_source_csv(std::ostream& os, const SourceSolution& solution) {
  const PowerProfile& p = solution.profile;
  os << "# expected_rate=" << format_number(solution.expected_rate)
     << "\n# residual_norm=" << format_number(solution.residual_norm)
     << "\n# method=" << (solution.method == SourceSolution::Method::euler ? "euler" : "direct-oracle")
     << "\n# l0=" << format_number(p.l0) << "\n# l1=" << format_number(p.l1) << "\n";
  os << "l,I,rho\n";
  for (Eigen::Index i = 0; i < p.grid.size(); ++i) {
    const double l = p.grid(i);
    os << format_number(l) << "," << format_number(p.interference_at(l)) << ","
       << format_number(p.rho_at(l)) << "\n";
  }
}

nlohmann::json sim_report_json(const SimReport& report, const std::string& scheme,
                               double ps_db, double pr_db) {
  nlohmann::json j;
  j["scheme"] = scheme;
  j["ps_db"] = ps_db;
  j["pr_db"] = pr_db;
  j["n_blocks"] = report.n_blocks;
  j["seed"] = report.seed;
  j["mean_rate_nats"] = report.mean_rate;
  j["std_error"] = report.std_error;
  j["zero_relay_fraction"] = report.zero_relay_fraction;
  j["saturated_fraction"] = report.saturated_fraction;
  return j;
}

}  // namespace bcrelay
