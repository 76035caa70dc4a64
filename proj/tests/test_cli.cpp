#include <doctest.h>

#include <sys/wait.h>

#include <Eigen/Dense>
#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mtlim/csv_io.hpp"
#include "mtlim/diffusion_data.hpp"

// Exercises the installed binary end to end.  The test runner passes the
// executable's location in MTLIM_CLI.

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("MTLIM_CLI");
  REQUIRE_MESSAGE(p != nullptr, "MTLIM_CLI must point at the cli binary");
  return p;
}

int run_cli(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() /
             ("mtlim_cli_" + std::to_string(::getpid()) + "_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string sub(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int file_count(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  int n = 0;
  for (auto it = fs::directory_iterator(dir); it != fs::directory_iterator();
       ++it)
    ++n;
  return n;
}

std::string small_instance_flags() {
  return "--n_nodes 6 --n_contagions 3 --lag 2 --horizon 8 --rank 2";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes a consumable instance") {
  TempDir tmp("simulate");
  int rc = run_cli("simulate --out " + tmp.sub("sim") + " --seed 3 " +
                   small_instance_flags());
  CHECK(rc == 0);
  for (const char* f : {"events.csv", "volumes.csv", "influence_true.csv",
                        "instance.config", "meta.json"})
    CHECK(fs::exists(tmp.path / "sim" / f));

  auto log = mtlim::read_events_csv(tmp.sub("sim/events.csv"), 6, 3, 8);
  CHECK_FALSE(log.events.empty());
  Eigen::MatrixXd vol = mtlim::read_matrix_csv(tmp.sub("sim/volumes.csv"));
  CHECK(vol.rows() == 8);
  CHECK(vol.cols() == 3);
  Eigen::MatrixXd truth =
      mtlim::read_matrix_csv(tmp.sub("sim/influence_true.csv"));
  CHECK(truth.rows() == 12);
  CHECK(truth.cols() == 3);
}

TEST_CASE("rerunning a command reproduces its outputs byte for byte") {
  TempDir tmp("determinism");
  std::string sim = tmp.sub("sim");
  std::string flags =
      "simulate --out " + sim + " --seed 11 " + small_instance_flags();
  REQUIRE(run_cli(flags) == 0);
  std::vector<std::pair<std::string, std::string>> first;
  for (auto& entry : fs::directory_iterator(sim))
    first.emplace_back(entry.path().filename().string(),
                       slurp(entry.path()));
  REQUIRE(run_cli(flags) == 0);
  for (const auto& [name, content] : first)
    CHECK(slurp(fs::path(sim) / name) == content);

  std::string fit = "fit --config " + sim + "/instance.config --out " +
                    tmp.sub("fit") +
                    " --model copula --lambda1 0.1 --lambda2 0.2 "
                    "--lambda3 0.05 --lambda4 0.1 --lambda5 0.1";
  REQUIRE(run_cli(fit) == 0);
  std::string influence = slurp(tmp.sub("fit/influence.csv"));
  std::string metrics = slurp(tmp.sub("fit/metrics.json"));
  REQUIRE(run_cli(fit) == 0);
  CHECK(slurp(tmp.sub("fit/influence.csv")) == influence);
  CHECK(slurp(tmp.sub("fit/metrics.json")) == metrics);
}

TEST_CASE("fit emits model files and metrics") {
  TempDir tmp("fit");
  REQUIRE(run_cli("simulate --out " + tmp.sub("sim") + " --seed 5 " +
                  small_instance_flags()) == 0);

  SUBCASE("per-contagion baseline") {
    int rc = run_cli("fit --config " + tmp.sub("sim/instance.config") +
                     " --out " + tmp.sub("ms") +
                     " --model mslim --mslim_lambda 0.1 --mslim_gamma 0.1");
    CHECK(rc == 0);
    Eigen::MatrixXd inf = mtlim::read_matrix_csv(tmp.sub("ms/influence.csv"));
    CHECK(inf.rows() == 12);
    CHECK(inf.cols() == 3);
    std::string metrics = slurp(tmp.sub("ms/metrics.json"));
    CHECK(metrics.find("\"mse_full\"") != std::string::npos);
    CHECK(metrics.find("\"influence_error\"") != std::string::npos);
    CHECK(metrics.find("\"mslim_lambda\"") != std::string::npos);
  }

  SUBCASE("dependence-coupled model") {
    int rc = run_cli("fit --config " + tmp.sub("sim/instance.config") +
                     " --out " + tmp.sub("cop") +
                     " --model copula --lambda1 0.1 --lambda2 0.2 "
                     "--lambda3 0.05 --lambda4 0.1 --lambda5 0.1");
    CHECK(rc == 0);
    for (const char* f : {"influence.csv", "mean.csv", "precision.csv",
                          "trace.csv", "metrics.json", "meta.json"})
      CHECK(fs::exists(tmp.path / "cop" / f));
    Eigen::MatrixXd prec =
        mtlim::read_matrix_csv(tmp.sub("cop/precision.csv"));
    CHECK(prec.rows() == 3);
    CHECK(prec.cols() == 3);
    Eigen::MatrixXd trace = mtlim::read_matrix_csv(tmp.sub("cop/trace.csv"));
    for (int i = 1; i < trace.rows(); ++i)
      CHECK(trace(i, 0) <= trace(i - 1, 0) + 1e-9);
  }

  SUBCASE("shared-influence baseline") {
    int rc = run_cli("fit --config " + tmp.sub("sim/instance.config") +
                     " --out " + tmp.sub("lim") + " --model lim");
    CHECK(rc == 0);
    Eigen::MatrixXd inf =
        mtlim::read_matrix_csv(tmp.sub("lim/influence.csv"));
    CHECK(inf.rows() == 12);
    CHECK(inf.cols() == 1);
  }
}

TEST_CASE("predictions agree with the library forward model") {
  TempDir tmp("predict");
  REQUIRE(run_cli("simulate --out " + tmp.sub("sim") + " --seed 7 " +
                  small_instance_flags()) == 0);
  REQUIRE(run_cli("fit --config " + tmp.sub("sim/instance.config") +
                  " --out " + tmp.sub("fit") +
                  " --model mslim --mslim_lambda 0.05 --mslim_gamma 0.05") ==
          0);
  int rc = run_cli("predict --config " + tmp.sub("sim/instance.config") +
                   " --influence " + tmp.sub("fit/influence.csv") +
                   " --out " + tmp.sub("pred") + " --steps 8");
  CHECK(rc == 0);

  Eigen::MatrixXd pred =
      mtlim::read_matrix_csv(tmp.sub("pred/predictions.csv"));
  REQUIRE(pred.rows() == 8);
  REQUIRE(pred.cols() == 3);
  auto log = mtlim::read_events_csv(tmp.sub("sim/events.csv"), 6, 3, 8);
  Eigen::MatrixXd inf = mtlim::read_matrix_csv(tmp.sub("fit/influence.csv"));
  for (int t = 1; t <= 8; ++t) {
    Eigen::VectorXd row = mtlim::predict_volume(log, inf, t);
    for (int k = 0; k < 3; ++k) CHECK(pred(t - 1, k) == row(k));
  }
}

TEST_CASE("ranking emits per-pair scores and per-node summaries") {
  TempDir tmp("rank");
  REQUIRE(run_cli("simulate --out " + tmp.sub("sim") + " --seed 2 " +
                  small_instance_flags()) == 0);
  int rc = run_cli("rank --config " + tmp.sub("sim/instance.config") +
                   " --influence " + tmp.sub("sim/influence_true.csv") +
                   " --out " + tmp.sub("rk"));
  CHECK(rc == 0);

  std::ifstream rankings(tmp.sub("rk/rankings.csv"));
  std::string line;
  std::getline(rankings, line);
  CHECK(line == "node_id,contagion_id,score");
  int rows = 0;
  double prev_score = 0.0;
  int prev_contagion = 0;
  while (std::getline(rankings, line)) {
    ++rows;
    int node, contagion;
    double score;
    REQUIRE(std::sscanf(line.c_str(), "%d,%d,%lf", &node, &contagion,
                        &score) == 3);
    if (contagion == prev_contagion) CHECK(score <= prev_score);
    prev_contagion = contagion;
    prev_score = score;
  }
  CHECK(rows == 18);  // 6 nodes x 3 contagions

  std::ifstream nodes(tmp.sub("rk/nodes.csv"));
  std::getline(nodes, line);
  CHECK(line == "node_id,avg_score,max_score,selected");
  rows = 0;
  while (std::getline(nodes, line)) ++rows;
  CHECK(rows == 6);
}

TEST_CASE("topic extraction builds a fit-ready instance") {
  TempDir tmp("topics");
  {
    std::ofstream out(tmp.sub("tweets.csv"));
    out << "username,timestamp,tweet_text\n"
        << "alice,2024-01-01 08:00:00,apple orchard harvest apple pie\n"
        << "bob,2024-01-01 09:30:00,\"rocket launch orbit, rocket engines\"\n"
        << "carol,2024-01-02 10:00:00,apple cider orchard visit\n"
        << "alice,2024-01-02 11:00:00,rocket orbit telemetry launch\n"
        << "bob,2024-01-03 12:00:00,apple pie orchard recipes\n"
        << "carol,2024-01-03 13:00:00,launch window orbit rocket\n";
  }
  int rc = run_cli("topics --corpus " + tmp.sub("tweets.csv") + " --out " +
                   tmp.sub("tp") + " --n_topics 2 --top_n 3 --seed 5");
  CHECK(rc == 0);

  std::ifstream report(tmp.sub("tp/topic_report.txt"));
  std::string line;
  int topic_lines = 0;
  while (std::getline(report, line)) {
    ++topic_lines;
    CHECK(line.rfind("topic ", 0) == 0);
  }
  CHECK(topic_lines == 2);

  auto cfg = mtlim::read_config(tmp.sub("tp/instance.config"));
  CHECK(cfg.at("n_contagions") == "2");
  CHECK(cfg.at("horizon") == "3");
  int n_nodes = std::stoi(cfg.at("n_nodes"));
  CHECK(n_nodes == 3);
  auto log = mtlim::read_events_csv(tmp.sub("tp/events.csv"), n_nodes, 2, 3);
  Eigen::MatrixXd vol = mtlim::read_matrix_csv(tmp.sub("tp/volumes.csv"));
  CHECK(vol.rows() == 3);
  CHECK(vol.cols() == 2);
  CHECK(vol.sum() == 6.0);  // one volume count per document
  CHECK_FALSE(log.events.empty());

  std::ifstream users(tmp.sub("tp/users.csv"));
  std::getline(users, line);
  CHECK(line == "node_id,username");
  std::getline(users, line);
  CHECK(line == "1,alice");
}

TEST_CASE("grid search reports every candidate and refits the winner") {
  TempDir tmp("cv");
  REQUIRE(run_cli("simulate --out " + tmp.sub("sim") + " --seed 13 " +
                  small_instance_flags()) == 0);
  int rc = run_cli("cv --config " + tmp.sub("sim/instance.config") +
                   " --out " + tmp.sub("cv") +
                   " --model mslim --train_fraction 0.5"
                   " --cv_grid_mslim_lambda 0.05,0.2"
                   " --cv_grid_mslim_gamma 0.05,0.2 --threads 2");
  CHECK(rc == 0);

  std::ifstream results(tmp.sub("cv/cv_results.csv"));
  std::string line;
  std::getline(results, line);
  CHECK(line == "index,mslim_gamma,mslim_lambda,validation_mse");
  int rows = 0;
  double best = 1e300;
  while (std::getline(results, line)) {
    ++rows;
    double mse = std::strtod(line.substr(line.rfind(',') + 1).c_str(),
                             nullptr);
    best = std::min(best, mse);
  }
  CHECK(rows == 4);

  nlohmann::json metrics =
      nlohmann::json::parse(slurp(tmp.sub("cv/metrics.json")));
  CHECK(metrics.at("mse_validation").get<double>() == best);
  CHECK(metrics.at("hyperparams").contains("mslim_lambda"));
  Eigen::MatrixXd inf = mtlim::read_matrix_csv(tmp.sub("cv/influence.csv"));
  CHECK(inf.rows() == 12);
  CHECK(inf.cols() == 3);

  CHECK(run_cli("cv --config " + tmp.sub("sim/instance.config") + " --out " +
                tmp.sub("cv_lim") + " --model lim"
                " --cv_grid_mslim_lambda 0.1") == 2);
}

TEST_CASE("validation problems exit with 2") {
  TempDir tmp("val");
  CHECK(run_cli("simulate --out " + tmp.sub("bad") +
                " --rank 30 --n_contagions 3") == 2);
  CHECK(run_cli("fit --out " + tmp.sub("bad2") + " --bogus_key 1") == 2);
  CHECK(file_count(tmp.sub("bad2")) == 0);
  CHECK(run_cli("fit --out " + tmp.sub("bad3") + " --model nonesuch") == 2);
  CHECK(run_cli("fit --out " + tmp.sub("bad4") +
                " --events /nonexistent/e.csv --volumes /nonexistent/v.csv"
                " --n_nodes 2 --n_contagions 2 --lag 1 --horizon 4") == 2);
  CHECK(run_cli("nonesuch-command") == 2);
}

TEST_CASE("runtime failures exit with 1 and leave no partial outputs") {
  TempDir tmp("rt");
  REQUIRE(run_cli("simulate --out " + tmp.sub("sim") + " --seed 3 " +
                  small_instance_flags()) == 0);
  // A truth file that exists but cannot be parsed fails only after the
  // influence and trace files were already written; the run must take them
  // back out on its way down.
  {
    std::ofstream out(tmp.sub("garbage.csv"));
    out << "not,numeric,data\n";
  }
  int rc = run_cli("fit --config " + tmp.sub("sim/instance.config") +
                   " --out " + tmp.sub("fit") +
                   " --model mslim --truth " + tmp.sub("garbage.csv"));
  CHECK(rc == 1);
  CHECK(file_count(tmp.sub("fit")) == 0);
}

}  // TEST_SUITE
