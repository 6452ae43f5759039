#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doselim/cli.hpp"
#include "support/oracles.hpp"

using namespace doselim;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Csv parse_csv(const std::string& text) {
  Csv csv;
  std::istringstream in(text);
  std::string line;
  REQUIRE(std::getline(in, line));
  std::istringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) csv.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream rs(line);
    while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

double extract_kv(const std::string& text, const std::string& key) {
  const std::string needle = key + "=";
  const std::size_t pos = text.find(needle);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + needle.size()));
}

fs::path tmp_file(const std::string& name) {
  return fs::temp_directory_path() / ("doselim_test_" + name);
}

struct FileGuard {
  fs::path p;
  explicit FileGuard(fs::path path) : p(std::move(path)) {}
  ~FileGuard() { std::error_code ec; fs::remove(p, ec); }
};

}  // namespace

TEST_CASE("efficiency prints the single-pass record") {
  const CliResult r = run_cli({"efficiency", "--family", "sp", "--eta", "0.9"});
  CHECK(r.code == 0);
  CHECK(extract_kv(r.out, "xi") == doctest::Approx(3.6).epsilon(1e-11));
  CHECK(extract_kv(r.out, "xi_ratio") == doctest::Approx(0.1).epsilon(1e-11));
}

TEST_CASE("efficiency evaluates the multi-pass optimum point") {
  const CliResult r =
      run_cli({"efficiency", "--family", "mp", "--m", "15", "--eta", "0.9"});
  CHECK(r.code == 0);
  CHECK(extract_kv(r.out, "xi") == doctest::Approx(23.33).epsilon(1e-3));
}

TEST_CASE("efficiency json output carries the same fields") {
  const CliResult r = run_cli({"efficiency", "--family", "sqz", "--nsq", "1", "--eta",
                               "0.9", "--format", "json"});
  CHECK(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["family"] == "sqz");
  CHECK(double(doc["xi"]) == doctest::Approx(14.1500763854).epsilon(1e-9));
}

TEST_CASE("efficiency usage and domain errors exit 1 and name the precondition") {
  {
    const CliResult r =
        run_cli({"efficiency", "--family", "noon", "--n", "0", "--eta", "0.9"});
    CHECK(r.code == 1);
    CHECK(r.err.find("n") != std::string::npos);
  }
  {
    const CliResult r = run_cli({"efficiency", "--family", "sp", "--eta", "1.1"});
    CHECK(r.code == 1);
    CHECK(r.err.find("eta") != std::string::npos);
  }
  {
    const CliResult r = run_cli({"efficiency", "--family", "mp", "--eta", "0.9"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--m") != std::string::npos);
  }
  CHECK(run_cli({"efficiency", "--family", "warp", "--eta", "0.9"}).code == 1);
  CHECK(run_cli({"efficiency", "--eta", "0.9"}).code == 1);
}

TEST_CASE("figure rejects unknown names") {
  const CliResult r = run_cli({"figure", "fig9", "--out", "x.csv"});
  CHECK(r.code == 1);
}

TEST_CASE("fig1b row one: every single-particle family equals the single-pass point") {
  const fs::path path = tmp_file("fig1b.csv");
  const FileGuard guard(path);
  const CliResult r = run_cli({"figure", "fig1b", "--out", path.string()});
  REQUIRE(r.code == 0);
  const Csv csv = parse_csv(slurp(path));
  REQUIRE(csv.header == std::vector<std::string>{"param", "ratio_sp", "ratio_noon",
                                                 "ratio_mp", "ratio_cic", "ratio_cio",
                                                 "ratio_sqz"});
  REQUIRE(csv.rows.size() == 128);
  const std::vector<double>& first = csv.rows.front();
  CHECK(first[0] == 1.0);
  for (int c = 1; c <= 5; ++c) CHECK(first[c] == doctest::Approx(0.1).epsilon(1e-11));
  CHECK(first[6] == doctest::Approx(14.1500763854 / 36.0).epsilon(1e-9));
}

TEST_CASE("fig1a output is deterministic across runs and thread counts") {
  const fs::path a = tmp_file("fig1a_a.csv");
  const fs::path b = tmp_file("fig1a_b.csv");
  const fs::path c = tmp_file("fig1a_c.csv");
  const FileGuard ga(a), gb(b), gc(c);
  REQUIRE(run_cli({"figure", "fig1a", "--out", a.string(), "--points", "24"}).code == 0);
  REQUIRE(run_cli({"figure", "fig1a", "--out", b.string(), "--points", "24"}).code == 0);
  REQUIRE(run_cli({"figure", "fig1a", "--out", c.string(), "--points", "24",
                   "--threads", "3"})
              .code == 0);
  const std::string bytes = slurp(a);
  CHECK(bytes == slurp(b));
  CHECK(bytes == slurp(c));

  const Csv csv = parse_csv(bytes);
  REQUIRE(csv.header.size() == 9);
  CHECK(csv.header.front() == "one_minus_eta");
  CHECK(csv.header.back() == "equivalent_db");
  REQUIRE(csv.rows.size() == 24);
  for (const auto& row : csv.rows) {
    CHECK(row[0] > 0.0);
    CHECK(row[0] < 1.0);
    CHECK(row[8] >= 0.0);      // equivalent squeezing in dB
    CHECK(row[8] < 200.0);
    for (int c = 1; c <= 7; ++c) {
      CHECK(row[c] > 0.0);
      CHECK(row[c] <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("fig3 rows re-evaluate to the stored CIO ratio") {
  const fs::path path = tmp_file("fig3.csv");
  const FileGuard guard(path);
  REQUIRE(run_cli({"figure", "fig3", "--out", path.string(), "--points", "12"}).code == 0);
  const Csv csv = parse_csv(slurp(path));
  REQUIRE(csv.header.size() == 11);
  CHECK(csv.header[7] == "ratio_cio_m128");
  CHECK(csv.header[9] == "ratio_mp_rt99");
  for (const auto& row : csv.rows) {
    const double eta = 1.0 - row[0];
    const LossBudget budget(eta, 0.9, 0.95, 0.9);
    const double expected = testsupport::cio_closed_form(128, budget) / xi_ql(eta);
    CHECK(row[7] == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("sweep: config-driven run, determinism and round trip") {
  const fs::path cfg_path = tmp_file("sweep.cfg");
  const fs::path out_a = tmp_file("sweep_a.csv");
  const fs::path out_b = tmp_file("sweep_b.csv");
  const FileGuard g1(cfg_path), g2(out_a), g3(out_b);
  {
    std::ofstream cfg(cfg_path);
    cfg << "# three-point check\n"
        << "schema_version = 1\n"
        << "eta_grid = 0.5, 0.7, 0.9\n"
        << "schemes = sp, mp:opt, cio:32, sqz:2.5\n"
        << "eta_d = 0.9\n";
  }
  REQUIRE(run_cli({"sweep", "--config", cfg_path.string(), "--out", out_a.string()})
              .code == 0);
  REQUIRE(run_cli({"sweep", "--config", cfg_path.string(), "--out", out_b.string(),
                   "--threads", "2"})
              .code == 0);
  CHECK(slurp(out_a) == slurp(out_b));

  const Csv csv = parse_csv(slurp(out_a));
  REQUIRE(csv.header ==
          std::vector<std::string>{"eta", "sp_xi", "sp_ratio", "mp_opt_xi",
                                   "mp_opt_ratio", "mp_opt_param", "cio_32_xi",
                                   "cio_32_ratio", "sqz_2.5_xi", "sqz_2.5_ratio"});
  REQUIRE(csv.rows.size() == 3);
  for (const auto& row : csv.rows) {
    const LossBudget budget(row[0], 1.0, 1.0, 0.9);
    CHECK(row[1] == doctest::Approx(xi_sp(budget).xi).epsilon(1e-9));
    CHECK(row[3] ==
          doctest::Approx(xi_mp(static_cast<int>(row[5]), budget).xi).epsilon(1e-9));
    CHECK(row[6] == doctest::Approx(xi_cio(32, budget).xi).epsilon(1e-9));
    CHECK(row[8] == doctest::Approx(xi_sqz(2.5, budget).xi).epsilon(1e-9));
  }
}

TEST_CASE("sweep json format mirrors the table") {
  const fs::path cfg_path = tmp_file("sweep_json.cfg");
  const fs::path out = tmp_file("sweep.json");
  const FileGuard g1(cfg_path), g2(out);
  {
    std::ofstream cfg(cfg_path);
    cfg << "schema_version = 1\n"
        << "eta_min = 0.5\n"
        << "eta_max = 0.9\n"
        << "eta_points = 3\n"
        << "schemes = sp\n"
        << "format = json\n";
  }
  REQUIRE(run_cli({"sweep", "--config", cfg_path.string(), "--out", out.string()}).code ==
          0);
  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc["schema_version"] == 1);
  REQUIRE(doc["columns"].size() == 3);
  REQUIRE(doc["rows"].size() == 3);
  CHECK(double(doc["rows"][0][0]) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sweep config errors exit 1 with the violated rule") {
  const auto run_with_config = [](const std::string& body) {
    const fs::path cfg_path = tmp_file("bad.cfg");
    const FileGuard g(cfg_path);
    std::ofstream(cfg_path) << body;
    return run_cli({"sweep", "--config", cfg_path.string(), "--out",
                    tmp_file("bad_out.csv").string()});
  };
  {
    const CliResult r = run_with_config("eta_grid = 0.5\nschemes = sp\n");
    CHECK(r.code == 1);
    CHECK(r.err.find("schema_version") != std::string::npos);
  }
  {
    const CliResult r =
        run_with_config("schema_version = 1\neta_grid = 0.9, 0.5\nschemes = sp\n");
    CHECK(r.code == 1);
    CHECK(r.err.find("increasing") != std::string::npos);
  }
  {
    const CliResult r = run_with_config("schema_version = 1\neta_grid = 0.5\n");
    CHECK(r.code == 1);
    CHECK(r.err.find("schemes") != std::string::npos);
  }
  {
    const CliResult r =
        run_with_config("schema_version = 1\neta_grid = 0.5\nschemes = sqz:opt\n");
    CHECK(r.code == 1);
  }
  {
    const CliResult r =
        run_with_config("schema_version = 1\neta_grid = 0.5\nschemes = sp\nwat = 1\n");
    CHECK(r.code == 1);
    CHECK(r.err.find("unknown key") != std::string::npos);
  }
}

TEST_CASE("unwritable output path exits 3") {
  const fs::path cfg_path = tmp_file("io.cfg");
  const FileGuard g(cfg_path);
  std::ofstream(cfg_path) << "schema_version = 1\neta_grid = 0.5\nschemes = sp\n";
  const CliResult r = run_cli({"sweep", "--config", cfg_path.string(), "--out",
                               "/nonexistent_dir_zzz/out.csv"});
  CHECK(r.code == 3);
  CHECK(run_cli({"figure", "fig1b", "--out", "/nonexistent_dir_zzz/fig.csv"}).code == 3);
}

TEST_CASE("missing config file is an I/O error") {
  const CliResult r =
      run_cli({"sweep", "--config", "/nonexistent_dir_zzz/nope.cfg", "--out", "x.csv"});
  CHECK(r.code == 3);
}

TEST_CASE("optimize prints the prescription comparison") {
  const CliResult r = run_cli({"optimize", "--m", "3", "--eta", "0.9"});
  CHECK(r.code == 0);
  CHECK(extract_kv(r.out, "best_xi") == doctest::Approx(9.756).epsilon(1e-6));
  CHECK(extract_kv(r.out, "shortfall") <= 1e-6);
  CHECK(r.out.find("converged=yes") != std::string::npos);
}

TEST_CASE("validate --quick passes on a healthy build") {
  const CliResult r = run_cli({"validate", "--quick"});
  CHECK(r.code == 0);
  CHECK(r.out.find("perturbative-convergence") != std::string::npos);
  CHECK(r.out.find("mp-equivalence") != std::string::npos);
  CHECK(r.out.find("limit-recovery") != std::string::npos);
  CHECK(r.out.find("prescription-optimality") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("mp-equivalence check is sensitive to a corrupted schedule") {
  // a tau_1 typo must produce a detectable deviation from the closed form,
  // otherwise the validation group could never fail
  const LossBudget budget = LossBudget::lossless(0.9);
  const int m = 8;
  std::vector<double> taus(m, 0.0);
  taus[0] = kDefaultEpsilon;
  taus[1] = 0.5 * kDefaultEpsilon;  // injected typo
  const double xi_corrupt = ci_xi(TauSchedule(taus), budget).xi;
  const double xi_closed = xi_mp(m, budget).xi;
  CHECK(std::abs(xi_corrupt - xi_closed) / xi_closed > 1e-10);
}

TEST_CASE("help exits zero") {
  CHECK(run_cli({"--help"}).code == 0);
  CHECK(run_cli({}).code == 1);
}

TEST_CASE("a 200-point sweep with the 128-stage chain finishes quickly") {
  const fs::path cfg_path = tmp_file("perf.cfg");
  const fs::path out = tmp_file("perf.csv");
  const FileGuard g1(cfg_path), g2(out);
  {
    std::ofstream cfg(cfg_path);
    cfg << "schema_version = 1\n"
        << "eta_min = 0.1\n"
        << "eta_max = 0.999\n"
        << "eta_points = 200\n"
        << "eta_spacing = log-one-minus\n"
        << "schemes = sp, noon:opt, mp:opt, cic:opt, cio:128\n";
  }
  const auto start = std::chrono::steady_clock::now();
  REQUIRE(run_cli({"sweep", "--config", cfg_path.string(), "--out", out.string()}).code ==
          0);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(std::chrono::duration_cast<std::chrono::seconds>(elapsed).count() < 10);
  CHECK(parse_csv(slurp(out)).rows.size() == 200);
}

TEST_CASE("quick validation finishes well inside its budget") {
  const auto start = std::chrono::steady_clock::now();
  CHECK(run_cli({"validate", "--quick"}).code == 0);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() < 2000);
}
