#pragma once

#include <map>
#include <ostream>
#include <string>

#include "json.hpp"

#include "bcrelay/montecarlo.hpp"
#include "bcrelay/relay_policy.hpp"
#include "bcrelay/single_hop.hpp"
#include "bcrelay/source_solver.hpp"

namespace bcrelay {

/// "l,I,rho,R" rows preceded by '#' metadata comments.
void write_profile_csv(std::ostream& os, const PowerProfile& profile,
                       const std::map<std::string, double>& metadata);

/// "R,h,hp,hpp" rows over the policy grid.
void write_policy_csv(std::ostream& os, const RelayPolicy& policy);

/// "l,I,rho" rows for a two-hop source solution.
void write_source_csv(std::ostream& os, const SourceSolution& solution);

nlohmann::json sim_report_json(const SimReport& report, const std::string& scheme,
                               double ps_db, double pr_db);

std::string format_number(double v);

}  // namespace bcrelay
