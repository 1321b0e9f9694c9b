// Command-line front end: scheme comparison sweeps, single-hop and two-hop
// profile exports, relay best-response curves, and block-level validation.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bcrelay/io.hpp"
#include "bcrelay/montecarlo.hpp"
#include "bcrelay/schemes.hpp"

namespace {

using namespace bcrelay;

constexpr const char* kVersion = "1";
constexpr double kLn2 = 0.6931471805599453;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct CompareOptions {
  double ps_db = 20.0;
  std::vector<double> pr_db;
  std::string pr_sweep;
  std::vector<std::string> schemes = {"df_opt", "af", "df_1bs", "cutset"};
  int grid_n = 200;
  int policy_grid = 128;
  long long mc_samples = 0;
  unsigned long long seed = 1;
  std::string output = "-";
  std::string format = "csv";
  bool bits = false;
  int jobs = 0;
};

struct Row {
  double pr_db;
  Scheme scheme;
  double rate = std::nan("");
  std::optional<double> mc_mean;
  std::optional<double> mc_stderr;
  std::string error;
};

std::vector<double> parse_sweep(const std::string& spec) {
  double start, stop, step;
  char c1, c2;
  std::istringstream in(spec);
  if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0) {
    throw CLI::ValidationError("--pr-sweep expects start:stop:step with step > 0");
  }
  std::vector<double> out;
  for (double v = start; v <= stop + 1e-9; v += step) out.push_back(v);
  return out;
}

std::vector<Scheme> parse_schemes(const std::vector<std::string>& names) {
  std::vector<Scheme> out;
  auto want = [&](Scheme s) {
    for (const auto& n : names) {
      if (n == scheme_name(s)) return true;
    }
    return false;
  };
  // fixed enum order regardless of how flags were given
  for (Scheme s : {Scheme::df_opt, Scheme::af, Scheme::df_1bs, Scheme::cutset}) {
    if (want(s)) out.push_back(s);
  }
  std::size_t known = 0;
  for (const auto& n : names) {
    for (Scheme s : {Scheme::df_opt, Scheme::af, Scheme::df_1bs, Scheme::cutset}) {
      if (n == scheme_name(s)) {
        ++known;
        break;
      }
    }
  }
  if (known != names.size() || out.empty()) {
    throw CLI::ValidationError("--schemes accepts df_opt, af, df_1bs, cutset");
  }
  return out;
}

void write_output(const std::string& path, const std::string& payload) {
  if (path == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << payload;
}

int run_compare(const CompareOptions& opt) {
  if (opt.grid_n < 32) throw CLI::ValidationError("--grid-n must be >= 32");
  std::vector<double> prs = opt.pr_db;
  if (!opt.pr_sweep.empty()) {
    auto sweep = parse_sweep(opt.pr_sweep);
    prs.insert(prs.end(), sweep.begin(), sweep.end());
  }
  if (prs.empty()) throw CLI::ValidationError("compare needs --pr-db or --pr-sweep");
  std::sort(prs.begin(), prs.end());
  const std::vector<Scheme> schemes = parse_schemes(opt.schemes);

  const bool needs_policy =
      opt.mc_samples > 0 ||
      std::any_of(schemes.begin(), schemes.end(),
                  [](Scheme s) { return s == Scheme::df_opt || s == Scheme::df_1bs; });

  const FadingModel rayleigh = make_rayleigh();
  const double ps = db_to_linear(opt.ps_db);

  auto evaluate_point = [&](double pr_db) {
    std::vector<Row> rows;
    NetworkConfig cfg{ps, db_to_linear(pr_db), rayleigh, rayleigh};
    std::optional<RelayPolicy> policy;
    std::optional<SourceSolution> source;
    try {
      if (needs_policy) policy = build_relay_policy(cfg.fading2, cfg.relay_power, opt.policy_grid);
      for (Scheme s : schemes) {
        Row row{pr_db, s};
        try {
          switch (s) {
            case Scheme::df_opt: {
              SchemeResult r = df_expected_rate(cfg, *policy, opt.grid_n);
              row.rate = r.rate;
              if (opt.mc_samples > 0) {
                if (!source) {
                  source = solve_source_with_fallback(cfg, *policy, opt.grid_n, nullptr);
                }
                SimReport rep = simulate_df(cfg, *source, *policy, opt.mc_samples,
                                            opt.seed);
                row.mc_mean = rep.mean_rate;
                row.mc_stderr = rep.std_error;
              }
              break;
            }
            case Scheme::af: row.rate = af_expected_rate(cfg).rate; break;
            case Scheme::df_1bs: row.rate = df_1bs_expected_rate(cfg, *policy).rate; break;
            case Scheme::cutset: row.rate = cutset_bound(cfg).rate; break;
          }
        } catch (const std::exception& e) {
          row.error = e.what();
        }
        rows.push_back(std::move(row));
      }
    } catch (const std::exception& e) {
      for (Scheme s : schemes) rows.push_back(Row{pr_db, s, std::nan(""), {}, {}, e.what()});
    }
    return rows;
  };

  const unsigned pool = opt.jobs > 0 ? static_cast<unsigned>(opt.jobs)
                                     : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<std::vector<Row>>> futures(prs.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::vector<Row>> results(prs.size());
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < std::min<std::size_t>(pool, prs.size()); ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < prs.size(); i = next.fetch_add(1)) {
        results[i] = evaluate_point(prs[i]);
      }
    });
  }
  for (auto& t : threads) t.join();

  const double unit = opt.bits ? kLn2 : 1.0;
  const std::string rate_col = opt.bits ? "rate_bits" : "rate_nats";
  bool failed = false;
  std::ostringstream out;

  if (opt.format == "csv") {
    out << "# ps_db=" << format_number(opt.ps_db) << "\n# grid_n=" << opt.grid_n
        << "\n# policy_grid=" << opt.policy_grid << "\n# seed=" << opt.seed
        << "\n# mc_samples=" << opt.mc_samples << "\n";
    out << "pr_db,scheme," << rate_col;
    if (opt.mc_samples > 0) {
      out << (opt.bits ? ",mc_mean_bits,mc_stderr_bits" : ",mc_mean_nats,mc_stderr_nats");
    }
    out << "\n";
    for (const auto& rows : results) {
      for (const Row& row : rows) {
        if (!row.error.empty()) {
          failed = true;
          out << "# error pr_db=" << format_number(row.pr_db) << " scheme="
              << scheme_name(row.scheme) << ": " << row.error << "\n";
        }
        out << format_number(row.pr_db) << "," << scheme_name(row.scheme) << ",";
        if (std::isnan(row.rate)) {
          out << "";
        } else {
          out << format_number(row.rate / unit);
        }
        if (opt.mc_samples > 0) {
          out << ",";
          if (row.mc_mean) out << format_number(*row.mc_mean / unit);
          out << ",";
          if (row.mc_stderr) out << format_number(*row.mc_stderr / unit);
        }
        out << "\n";
      }
    }
  } else if (opt.format == "json") {
    nlohmann::json doc;
    doc["version"] = kVersion;
    doc["config"] = {{"ps_db", opt.ps_db},
                     {"grid_n", opt.grid_n},
                     {"policy_grid", opt.policy_grid},
                     {"seed", opt.seed},
                     {"mc_samples", opt.mc_samples},
                     {"rate_unit", opt.bits ? "bits" : "nats"}};
    doc["rows"] = nlohmann::json::array();
    for (const auto& rows : results) {
      for (const Row& row : rows) {
        nlohmann::json jr;
        jr["pr_db"] = row.pr_db;
        jr["scheme"] = scheme_name(row.scheme);
        if (std::isnan(row.rate)) {
          jr["rate"] = nullptr;
        } else {
          jr["rate"] = row.rate / unit;
        }
        if (row.mc_mean) jr["mc_mean"] = *row.mc_mean / unit;
        if (row.mc_stderr) jr["mc_stderr"] = *row.mc_stderr / unit;
        if (!row.error.empty()) {
          jr["error"] = row.error;
          failed = true;
        }
        doc["rows"].push_back(jr);
      }
    }
    out << doc.dump(2) << "\n";
  } else {
    throw CLI::ValidationError("--format must be csv or json");
  }

  write_output(opt.output, out.str());
  return failed ? 1 : 0;
}

int run_single_hop(double ps_db, std::optional<double> rate_limit, const std::string& output) {
  const FadingModel f = make_rayleigh();
  const double p = db_to_linear(ps_db);
  std::map<std::string, double> meta;
  PowerProfile profile;
  if (rate_limit) {
    RateLimitedSolution sol = solve_rate_limited(f, p, *rate_limit);
    profile = sol.profile;
    meta["lambda"] = sol.lambda;
  } else {
    profile = solve_unconstrained(f, p);
    meta["lambda"] = 0.0;
  }
  meta["ps_db"] = ps_db;
  meta["l0"] = profile.l0;
  meta["l1"] = profile.l1;
  meta["R_F"] = profile.transmit_rate();
  meta["R_av"] = average_rate(profile, f);
  std::ostringstream out;
  write_profile_csv(out, profile, meta);
  write_output(output, out.str());
  return 0;
}

int run_hstar(double pr_db, int grid, const std::string& output) {
  RelayPolicy policy = build_relay_policy(make_rayleigh(), db_to_linear(pr_db), grid);
  std::ostringstream out;
  write_policy_csv(out, policy);
  write_output(output, out.str());
  return 0;
}

int run_profile(double ps_db, double pr_db, int grid_n, int policy_grid,
                const std::string& output) {
  const FadingModel f = make_rayleigh();
  NetworkConfig cfg{db_to_linear(ps_db), db_to_linear(pr_db), f, f};
  RelayPolicy policy = build_relay_policy(cfg.fading2, cfg.relay_power, policy_grid);
  SourceSolution sol = solve_source_with_fallback(cfg, policy, grid_n, nullptr);
  std::ostringstream out;
  write_source_csv(out, sol);
  write_output(output, out.str());
  return 0;
}

int run_simulate(double ps_db, double pr_db, long long blocks, unsigned long long seed,
                 int grid_n, int policy_grid, const std::string& output) {
  const FadingModel f = make_rayleigh();
  NetworkConfig cfg{db_to_linear(ps_db), db_to_linear(pr_db), f, f};
  RelayPolicy policy = build_relay_policy(cfg.fading2, cfg.relay_power, policy_grid);
  SourceSolution sol = solve_source_with_fallback(cfg, policy, grid_n, nullptr);
  SimReport rep = simulate_df(cfg, sol, policy, blocks, seed);
  nlohmann::json j = sim_report_json(rep, "df_opt", ps_db, pr_db);
  j["analytic_rate_nats"] = sol.expected_rate;
  std::ostringstream out;
  out << j.dump(2) << "\n";
  write_output(output, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"expected-rate calculator for two-hop fading networks without transmit CSI"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file (flags override)");

  CompareOptions copt;
  CLI::App* cmp = app.add_subcommand("compare", "scheme comparison over a relay-power sweep");
  cmp->add_option("--ps-db", copt.ps_db, "source power in dB");
  cmp->add_option("--pr-db", copt.pr_db, "relay power point in dB (repeatable)");
  cmp->add_option("--pr-sweep", copt.pr_sweep, "relay power sweep start:stop:step in dB");
  cmp->add_option("--schemes", copt.schemes, "subset of df_opt,af,df_1bs,cutset")
      ->delimiter(',');
  cmp->add_option("--grid-n", copt.grid_n, "source-profile discretization levels");
  cmp->add_option("--policy-grid", copt.policy_grid, "relay-policy rate grid size");
  cmp->add_option("--mc-samples", copt.mc_samples, "simulated blocks per df_opt point (0 = skip)");
  cmp->add_option("--seed", copt.seed, "simulation seed");
  cmp->add_option("--output,-o", copt.output, "output path ('-' for stdout)");
  cmp->add_option("--format", copt.format, "csv or json");
  cmp->add_flag("--bits", copt.bits, "report rates in bits instead of nats");
  cmp->add_option("--jobs", copt.jobs, "worker threads (default: hardware)");

  double sh_ps_db = 20.0;
  std::optional<double> sh_limit;
  std::string sh_output = "-";
  CLI::App* sh = app.add_subcommand("single-hop", "one-hop broadcast profile export");
  sh->add_option("--ps-db", sh_ps_db, "transmit power in dB");
  sh->add_option("--rate-limit", sh_limit, "transmit-rate cap in nats");
  sh->add_option("--output,-o", sh_output, "output path");

  double hs_pr_db = 20.0;
  int hs_grid = 128;
  std::string hs_output = "-";
  CLI::App* hs = app.add_subcommand("hstar", "relay best-response curve export");
  hs->add_option("--pr-db", hs_pr_db, "relay power in dB");
  hs->add_option("--grid", hs_grid, "rate grid size");
  hs->add_option("--output,-o", hs_output, "output path");

  double pf_ps_db = 20.0, pf_pr_db = 20.0;
  int pf_grid = 200, pf_policy = 128;
  std::string pf_output = "-";
  CLI::App* pf = app.add_subcommand("profile", "two-hop source profile export");
  pf->add_option("--ps-db", pf_ps_db, "source power in dB");
  pf->add_option("--pr-db", pf_pr_db, "relay power in dB");
  pf->add_option("--grid-n", pf_grid, "source-profile discretization levels");
  pf->add_option("--policy-grid", pf_policy, "relay-policy rate grid size");
  pf->add_option("--output,-o", pf_output, "output path");

  double sim_ps_db = 20.0, sim_pr_db = 20.0;
  long long sim_blocks = 100000;
  unsigned long long sim_seed = 1;
  int sim_grid = 200, sim_policy = 128;
  std::string sim_output = "-";
  CLI::App* sim = app.add_subcommand("simulate", "block-level validation of df_opt");
  sim->add_option("--ps-db", sim_ps_db, "source power in dB");
  sim->add_option("--pr-db", sim_pr_db, "relay power in dB");
  sim->add_option("--blocks", sim_blocks, "number of simulated blocks");
  sim->add_option("--seed", sim_seed, "simulation seed");
  sim->add_option("--grid-n", sim_grid, "source-profile discretization levels");
  sim->add_option("--policy-grid", sim_policy, "relay-policy rate grid size");
  sim->add_option("--output,-o", sim_output, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmp->parsed()) return run_compare(copt);
    if (sh->parsed()) return run_single_hop(sh_ps_db, sh_limit, sh_output);
    if (hs->parsed()) return run_hstar(hs_pr_db, hs_grid, hs_output);
    if (pf->parsed()) return run_profile(pf_ps_db, pf_pr_db, pf_grid, pf_policy, pf_output);
    if (sim->parsed()) {
      return run_simulate(sim_ps_db, sim_pr_db, sim_blocks, sim_seed, sim_grid, sim_policy,
                          sim_output);
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
