#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "schema_check.hpp"

namespace {

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run_cli(const std::string& args, const std::string& out_file) {
  const std::string cmd = std::string(BCRELAY_CLI_PATH) + " " + args + " -o " + out_file;
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  std::ifstream in(out_file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

int run_status(const std::string& args) {
  const std::string cmd = std::string(BCRELAY_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

double metadata_value(const std::string& text, const std::string& key) {
  const std::string needle = "# " + key + "=";
  const auto pos = text.find(needle);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + needle.size()));
}

nlohmann::json load_schema(const char* name) {
  std::ifstream in(std::string(BCRELAY_SCHEMA_DIR) + "/" + name);
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("compare: full sweep emits one row per point and scheme") {
  RunResult r = run_cli(
      "compare --ps-db 20 --pr-sweep 20:32:3 --grid-n 48 --policy-grid 32", "cli_sweep.csv");
  CHECK(r.exit_code == 0);
  const auto rows = data_lines(r.output);
  REQUIRE(rows.size() == 21);  // header + 5 points x 4 schemes
  CHECK(rows[0] == "pr_db,scheme,rate_nats");
  // deterministic ordering: pr ascending, schemes in enum order
  CHECK(rows[1].rfind("20,df_opt,", 0) == 0);
  CHECK(rows[2].rfind("20,af,", 0) == 0);
  CHECK(rows[3].rfind("20,df_1bs,", 0) == 0);
  CHECK(rows[4].rfind("20,cutset,", 0) == 0);
  CHECK(rows[5].rfind("23,df_opt,", 0) == 0);
  CHECK(rows[20].rfind("32,cutset,", 0) == 0);
  std::remove("cli_sweep.csv");
}

TEST_CASE("compare: cutset-only sweep runs without building a relay policy") {
  RunResult r = run_cli("compare --ps-db 20 --pr-sweep 20:32:3 --schemes cutset",
                        "cli_cutset.csv");
  CHECK(r.exit_code == 0);
  const auto rows = data_lines(r.output);
  CHECK(rows.size() == 6);  // header + 5 rows
  std::remove("cli_cutset.csv");
}

TEST_CASE("compare: identical invocations produce byte-identical output") {
  RunResult a = run_cli(
      "compare --ps-db 20 --pr-db 22 --schemes af,cutset --format json", "cli_a.json");
  RunResult b = run_cli(
      "compare --ps-db 20 --pr-db 22 --schemes af,cutset --format json", "cli_b.json");
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  const nlohmann::json doc = nlohmann::json::parse(a.output);
  std::string why;
  CHECK_MESSAGE(schema_check::validate(doc, load_schema("compare.schema.json"), &why), why);
  std::remove("cli_a.json");
  std::remove("cli_b.json");
}

TEST_CASE("compare: simulation columns bracket the analytic rate") {
  RunResult r = run_cli(
      "compare --ps-db 20 --pr-db 20 --schemes df_opt --grid-n 64 --policy-grid 48 "
      "--mc-samples 5000 --seed 3",
      "cli_mc.csv");
  CHECK(r.exit_code == 0);
  const auto rows = data_lines(r.output);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "pr_db,scheme,rate_nats,mc_mean_nats,mc_stderr_nats");
  std::istringstream row(rows[1]);
  std::string pr, scheme, rate_s, mean_s, se_s;
  std::getline(row, pr, ',');
  std::getline(row, scheme, ',');
  std::getline(row, rate_s, ',');
  std::getline(row, mean_s, ',');
  std::getline(row, se_s, ',');
  const double rate = std::stod(rate_s), mean = std::stod(mean_s), se = std::stod(se_s);
  CHECK(std::abs(rate - mean) <= 3.0 * se);
  std::remove("cli_mc.csv");
}

TEST_CASE("compare: bits flag renames and rescales the rate column") {
  RunResult nats = run_cli("compare --ps-db 20 --pr-db 20 --schemes cutset", "cli_n.csv");
  RunResult bits = run_cli("compare --ps-db 20 --pr-db 20 --schemes cutset --bits", "cli_b.csv");
  const auto rn = data_lines(nats.output);
  const auto rb = data_lines(bits.output);
  CHECK(rb[0] == "pr_db,scheme,rate_bits");
  const double vn = std::stod(rn[1].substr(rn[1].rfind(',') + 1));
  const double vb = std::stod(rb[1].substr(rb[1].rfind(',') + 1));
  CHECK(vb == doctest::Approx(vn / std::log(2.0)).epsilon(1e-9));
  std::remove("cli_n.csv");
  std::remove("cli_b.csv");
}

TEST_CASE("single-hop: header metadata matches the Rayleigh solution") {
  RunResult r = run_cli("single-hop --ps-db 20", "cli_sh.csv");
  CHECK(r.exit_code == 0);
  CHECK(metadata_value(r.output, "l1") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(metadata_value(r.output, "lambda") == 0.0);
  const auto rows = data_lines(r.output);
  CHECK(rows[0] == "l,I,rho,R");
  std::remove("cli_sh.csv");
}

TEST_CASE("single-hop: zero rate budget zeroes the power density column") {
  RunResult r = run_cli("single-hop --ps-db 20 --rate-limit 0", "cli_sh0.csv");
  CHECK(r.exit_code == 0);
  const auto rows = data_lines(r.output);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream row(rows[i]);
    std::string l, I, rho, R;
    std::getline(row, l, ',');
    std::getline(row, I, ',');
    std::getline(row, rho, ',');
    std::getline(row, R, ',');
    CHECK(std::abs(std::stod(rho)) <= 1e-9);
  }
  std::remove("cli_sh0.csv");
}

TEST_CASE("single-hop: generous rate budget reports an inactive multiplier") {
  RunResult r = run_cli("single-hop --ps-db 20 --rate-limit 9", "cli_shq.csv");
  CHECK(metadata_value(r.output, "lambda") == 0.0);
  std::remove("cli_shq.csv");
}

TEST_CASE("hstar: endpoints of the exported curve") {
  RunResult r = run_cli("hstar --pr-db 20 --grid 48", "cli_h.csv");
  CHECK(r.exit_code == 0);
  const auto rows = data_lines(r.output);
  REQUIRE(rows.size() == 49);
  CHECK(rows[0] == "R,h,hp,hpp");
  {
    std::istringstream first(rows[1]);
    std::string R, h;
    std::getline(first, R, ',');
    std::getline(first, h, ',');
    CHECK(std::stod(R) == 0.0);
    CHECK(std::abs(std::stod(h)) <= 1e-8);
  }
  {
    std::istringstream last(rows.back());
    std::string R, h, hp;
    std::getline(last, R, ',');
    std::getline(last, h, ',');
    std::getline(last, hp, ',');
    CHECK(std::abs(std::stod(hp)) <= 1e-2);  // slope flattens into saturation
  }
  std::remove("cli_h.csv");
}

TEST_CASE("profile: exports a usable source profile") {
  RunResult r = run_cli("profile --ps-db 20 --pr-db 20 --grid-n 64 --policy-grid 32",
                        "cli_p.csv");
  CHECK(r.exit_code == 0);
  const auto rows = data_lines(r.output);
  CHECK(rows[0] == "l,I,rho");
  CHECK(rows.size() == 65);
  CHECK(metadata_value(r.output, "expected_rate") > 0.0);
  std::remove("cli_p.csv");
}

TEST_CASE("simulate: JSON report validates and reproduces bit-for-bit") {
  const std::string args =
      "simulate --ps-db 20 --pr-db 20 --blocks 2000 --seed 11 --grid-n 64 --policy-grid 32";
  RunResult a = run_cli(args, "cli_sim_a.json");
  RunResult b = run_cli(args, "cli_sim_b.json");
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  const nlohmann::json doc = nlohmann::json::parse(a.output);
  std::string why;
  CHECK_MESSAGE(schema_check::validate(doc, load_schema("simulate.schema.json"), &why), why);
  std::remove("cli_sim_a.json");
  std::remove("cli_sim_b.json");
}

TEST_CASE("usage errors exit with a distinct status") {
  CHECK(run_status("compare --ps-db 20") == 2);           // no relay power given
  CHECK(run_status("compare --no-such-flag") == 2);
  CHECK(run_status("") == 2);                              // missing subcommand
  CHECK(run_status("compare --ps-db 20 --pr-db 20 --schemes bogus") == 2);
}
