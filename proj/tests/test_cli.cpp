#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kData = HBFQ_TEST_DATA;

int run(const std::string& args) {
  const std::string cmd = std::string(HBFQ_CLI_PATH) + ' ' + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hbfq_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scenario(const char* name) { return "--scenario " + (kData / name).string(); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    const auto d = fresh_dir("codes");
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("solve --out-dir " + d.string()) == 1);
    CHECK(run("solve " + scenario("malformed.toml") + " --out-dir " + d.string()) == 2);
    CHECK(run("solve " + scenario("unstable.toml") + " --out-dir " + d.string()) == 4);
    CHECK(run("solve --scenario /nonexistent.toml --out-dir " + d.string()) == 7);
    CHECK(run("verify " + scenario("example.toml") + " --policy two-threshold --b1 6 --b2 2 --out-dir " +
              d.string()) == 3);
  }

  TEST_CASE("solve writes the solution table and manifest") {
    const auto d = fresh_dir("solve");
    REQUIRE(run("solve " + scenario("example.toml") + " --out-dir " + d.string()) == 0);
    const std::string csv = slurp(d / "solution.csv");
    for (const char* key : {"beta1", "beta2", "lambda_fifo", "residual_bid_minus_price", "condition_1_interior_margin",
                            "condition_2_bid_minus_price", "condition_3_cost_difference", "revenue_total"})
      CHECK(csv.find(key) != std::string::npos);
    const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
    CHECK(m["command"] == "solve");
    CHECK(m["wait_variant"] == "eq2");
    CHECK(m["exit_code"] == 0);
    CHECK(m["outputs"].size() == 1);
  }

  TEST_CASE("no interior root is a distinct exit code") {
    const auto d = fresh_dir("allhbf");
    fs::create_directories(d);
    std::ofstream(d / "s.toml") << "lambda = 4\nmu1 = 5\nc = 100\n[profile]\nkind = \"uniform\"\na = 0\nb = 10\n";
    CHECK(run("solve --scenario " + (d / "s.toml").string() + " --out-dir " + d.string()) == 6);
    CHECK(slurp(d / "solution.csv").find("all-hbf-boundary") != std::string::npos);
  }

  TEST_CASE("auto solver picks the single-threshold form when c < m") {
    const auto d = fresh_dir("single");
    REQUIRE(run("solve " + scenario("below_min_bid.toml") + " --out-dir " + d.string()) == 0);
    CHECK(slurp(d / "solution.csv").find("single-threshold-interior") != std::string::npos);
  }

  TEST_CASE("verify") {
    const auto d = fresh_dir("verify");
    REQUIRE(run("verify " + scenario("example.toml") + " --policy two-threshold --b1 1.67 --b2 5.66 --out-dir " +
                d.string()) == 0);
    const std::string csv = slurp(d / "wardrop.csv");
    CHECK(csv.rfind("beta,fifo_probability,assigned,cost_fifo,cost_hbf,", 0) == 0);
    const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
    CHECK(m["results"]["satisfied"] == false);

    const auto e = fresh_dir("verify_low");
    REQUIRE(run("verify " + scenario("example.toml") + " --policy single-low --b1 3 --out-dir " + e.string()) == 0);
    const auto ml = nlohmann::json::parse(slurp(e / "manifest.json"));
    CHECK(ml["results"]["satisfied"] == false);
    CHECK(ml["results"]["refutation"]["refuted"] == true);
  }

  TEST_CASE("simulate is seed-reproducible") {
    const auto a = fresh_dir("sim_a");
    const auto b = fresh_dir("sim_b");
    const std::string args = "simulate " + scenario("example.toml") + " --equilibrium --horizon 20000 --seed 5";
    REQUIRE(run(args + " --out-dir " + a.string()) == 0);
    REQUIRE(run(args + " --out-dir " + b.string()) == 0);
    CHECK(slurp(a / "sim_bins.csv") == slurp(b / "sim_bins.csv"));
    CHECK(slurp(a / "sim_servers.csv") == slurp(b / "sim_servers.csv"));

    const auto r = fresh_dir("sim_reps");
    REQUIRE(run("simulate " + scenario("example.toml") +
                " --policy two-threshold --b1 3.49 --b2 8.14 --horizon 20000 --reps 10 --out-dir " + r.string()) == 0);
    const std::string bins = slurp(r / "sim_bins.csv");
    CHECK(bins.find("ci_wait") != std::string::npos);
    CHECK(nlohmann::json::parse(slurp(r / "manifest.json"))["results"]["batches"] == 10);
  }

  TEST_CASE("sweep flags the argmax and degenerates to solve at one step") {
    const auto d = fresh_dir("sweep");
    REQUIRE(run("sweep " + scenario("example.toml") + " --c-min 0 --c-max 2 --steps 11 --out-dir " + d.string()) == 0);
    const std::string csv = slurp(d / "sweep.csv");
    CHECK(csv.find(",no-root,") != std::string::npos);
    std::istringstream lines(csv);
    std::string line;
    int rows = 0, flagged = 0;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
      ++rows;
      if (line.find(",1,0,") != std::string::npos || line.find(",1,1,") != std::string::npos) ++flagged;
    }
    CHECK(rows == 11);
    CHECK(flagged >= 1);

    const auto one = fresh_dir("sweep1");
    REQUIRE(run("sweep " + scenario("example.toml") + " --c-min 0.2017 --c-max 0.2017 --steps 1 --out-dir " +
                one.string()) == 0);
    CHECK(slurp(one / "sweep.csv").find("3.49038746") != std::string::npos);
  }

  TEST_CASE("paper-example writes the discrepancy report") {
    const auto d = fresh_dir("ref");
    REQUIRE(run("paper-example --panels 100000 --out-dir " + d.string()) == 0);
    const std::string csv = slurp(d / "discrepancy.csv");
    for (const char* q : {"lambda_fifo", "lambda_hbf", "d2", "w1_at_beta1", "bid_at_beta1", "solver_beta1"})
      CHECK(csv.find(q) != std::string::npos);
    CHECK(run("reference-example --panels 1000 --out-dir " + d.string()) == 0);
  }

  TEST_CASE("replay reproduces solve and verify bit for bit") {
    const auto d = fresh_dir("replay_src");
    const auto r = fresh_dir("replay_dst");
    REQUIRE(run("verify " + scenario("example.toml") + " --policy single-high --b1 4 --grid 300 --out-dir " +
                d.string()) == 0);
    REQUIRE(run("replay " + (d / "manifest.json").string() + " --out-dir " + r.string()) == 0);
    CHECK(slurp(d / "wardrop.csv") == slurp(r / "wardrop.csv"));
    CHECK(run("replay /nonexistent/manifest.json") == 7);
  }
}
