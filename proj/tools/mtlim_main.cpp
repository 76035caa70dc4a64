// Command-line front end: simulate, fit, predict, rank, topics, cv.
//
// Configuration is a flat key = value file merged with --key value
// overrides (overrides win).  Every command writes a meta.json recording
// the exact configuration it ran with, numeric output is printed with 17
// significant digits, and a failed run removes whatever it had written.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mtlim/baselines.hpp"
#include "mtlim/copula_model.hpp"
#include "mtlim/csv_io.hpp"
#include "mtlim/diffusion_data.hpp"
#include "mtlim/eval.hpp"
#include "mtlim/synth.hpp"
#include "mtlim/topics.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ConfigMap = std::map<std::string, std::string>;

namespace {

// Thrown for problems the user can fix in the invocation; exits with 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      // common
      "model", "seed", "out", "threads", "init",
      // input files
      "events", "volumes", "truth", "influence", "corpus",
      // dimensions
      "n_nodes", "n_contagions", "lag", "horizon",
      // synthetic protocol
      "rank", "noise_scale",
      // dependence-coupled model
      "lambda1", "lambda2", "lambda3", "lambda4", "lambda5", "step_theta",
      "inner_tol", "outer_tol", "inner_max", "outer_max",
      // per-contagion baseline
      "mslim_lambda", "mslim_gamma",
      // prediction and ranking
      "steps", "avg_threshold", "max_threshold",
      // topic extraction
      "n_topics", "top_n", "nmf_max_iter", "nmf_tol",
      // grid search
      "train_fraction",
  };
  return keys;
}

bool is_grid_key(const std::string& key) {
  return key.rfind("cv_grid_", 0) == 0;
}

// Input-file keys get resolved relative to the config file that set them.
bool is_path_key(const std::string& key) {
  return key == "events" || key == "volumes" || key == "truth" ||
         key == "influence" || key == "corpus";
}

ConfigMap load_config(const std::string& path) {
  ConfigMap raw = mtlim::read_config(path);
  fs::path dir = fs::path(path).parent_path();
  for (auto& [key, value] : raw) {
    if (is_path_key(key) && !value.empty() && !fs::path(value).is_absolute())
      value = (dir / value).string();
  }
  return raw;
}

void reject_unknown(const ConfigMap& cfg) {
  for (const auto& [key, value] : cfg) {
    (void)value;
    if (!known_keys().count(key) && !is_grid_key(key))
      throw ValidationError("unknown configuration key: " + key);
  }
}

std::string get_str(const ConfigMap& cfg, const std::string& key,
                    const std::string& fallback) {
  auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

std::string require_str(const ConfigMap& cfg, const std::string& key) {
  auto it = cfg.find(key);
  if (it == cfg.end() || it->second.empty())
    throw ValidationError("missing required configuration key: " + key);
  return it->second;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("key " + key + ": cannot parse \"" + text +
                          "\" as a number");
  }
}

double get_double(const ConfigMap& cfg, const std::string& key,
                  double fallback) {
  auto it = cfg.find(key);
  return it == cfg.end() ? fallback : parse_double(key, it->second);
}

long get_long(const ConfigMap& cfg, const std::string& key, long fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  try {
    size_t used = 0;
    long v = std::stol(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("key " + key + ": cannot parse \"" + it->second +
                          "\" as an integer");
  }
}

void require_file(const std::string& key, const std::string& path) {
  if (!fs::exists(path))
    throw ValidationError("key " + key + ": file not found: " + path);
}

// Collects everything a command writes; a failure removes it all so no
// partial run is left on disk.
class OutputGuard {
 public:
  ~OutputGuard() {
    if (committed_) return;
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
  std::string track(const fs::path& p) {
    written_.push_back(p);
    return p.string();
  }
  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> written_;
  bool committed_ = false;
};

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
}

void write_meta(OutputGuard& guard, const fs::path& dir,
                const std::string& command, const ConfigMap& cfg) {
  json doc;
  doc["command"] = command;
  doc["config"] = json::object();
  for (const auto& [key, value] : cfg) doc["config"][key] = value;
  write_json(guard.track(dir / "meta.json"), doc);
}

struct Dimensions {
  int n_nodes = 0;
  int n_contagions = 0;
  int lag = 0;
  int horizon = 0;
};

Dimensions read_dimensions(const ConfigMap& cfg) {
  Dimensions d;
  d.n_nodes = static_cast<int>(get_long(cfg, "n_nodes", 0));
  d.n_contagions = static_cast<int>(get_long(cfg, "n_contagions", 0));
  d.lag = static_cast<int>(get_long(cfg, "lag", 0));
  d.horizon = static_cast<int>(get_long(cfg, "horizon", 0));
  if (d.n_nodes < 1 || d.n_contagions < 1 || d.horizon < 1)
    throw ValidationError(
        "n_nodes, n_contagions and horizon must all be set and >= 1");
  if (d.lag < 1 || d.lag > d.horizon)
    throw ValidationError("lag must be set and in 1..horizon");
  return d;
}

mtlim::Hyperparams read_hyperparams(const ConfigMap& cfg, int lag) {
  mtlim::Hyperparams hp;
  hp.lambda1 = get_double(cfg, "lambda1", hp.lambda1);
  hp.lambda2 = get_double(cfg, "lambda2", hp.lambda2);
  hp.lambda3 = get_double(cfg, "lambda3", hp.lambda3);
  hp.lambda4 = get_double(cfg, "lambda4", hp.lambda4);
  hp.lambda5 = get_double(cfg, "lambda5", hp.lambda5);
  hp.lag = lag;
  if (cfg.count("step_theta"))
    hp.step_theta = get_double(cfg, "step_theta", 0.0);
  hp.inner_tol = get_double(cfg, "inner_tol", hp.inner_tol);
  hp.outer_tol = get_double(cfg, "outer_tol", hp.outer_tol);
  hp.inner_max = static_cast<int>(get_long(cfg, "inner_max", hp.inner_max));
  hp.outer_max = static_cast<int>(get_long(cfg, "outer_max", hp.outer_max));
  return hp;
}

mtlim::InitStrategy read_init(const ConfigMap& cfg) {
  std::string init = get_str(cfg, "init", "ridge");
  if (init == "ridge") return mtlim::InitStrategy::Ridge;
  if (init == "zeros") return mtlim::InitStrategy::Zeros;
  throw ValidationError("init must be one of: ridge, zeros");
}

std::string require_model(const ConfigMap& cfg) {
  std::string model = get_str(cfg, "model", "copula");
  if (model != "lim" && model != "mslim" && model != "copula")
    throw ValidationError("model must be one of: lim, mslim, copula");
  return model;
}

fs::path prepare_out_dir(const ConfigMap& cfg) {
  fs::path dir = get_str(cfg, "out", ".");
  fs::create_directories(dir);
  return dir;
}

// In-sample mean squared error of an (LN) x K influence matrix against the
// observed volumes, all rows and contagions pooled.
double full_mse(const std::vector<Eigen::MatrixXd>& designs,
                const Eigen::MatrixXd& volumes,
                const Eigen::MatrixXd& influence) {
  double sse = 0.0;
  for (int k = 0; k < volumes.cols(); ++k)
    sse += (volumes.col(k) - designs[k] * influence.col(k)).squaredNorm();
  return sse / (static_cast<double>(volumes.rows()) * volumes.cols());
}

Eigen::MatrixXd replicate_if_shared(const Eigen::MatrixXd& influence,
                                    int n_contagions) {
  if (influence.cols() == n_contagions) return influence;
  if (influence.cols() == 1)
    return influence.replicate(1, n_contagions);
  throw ValidationError("influence matrix has " +
                        std::to_string(influence.cols()) +
                        " columns; expected 1 or n_contagions");
}

json hyperparams_json(const mtlim::Hyperparams& hp) {
  json h;
  h["lambda1"] = hp.lambda1;
  h["lambda2"] = hp.lambda2;
  h["lambda3"] = hp.lambda3;
  h["lambda4"] = hp.lambda4;
  h["lambda5"] = hp.lambda5;
  if (hp.step_theta) h["step_theta"] = *hp.step_theta;
  h["inner_tol"] = hp.inner_tol;
  h["outer_tol"] = hp.outer_tol;
  h["inner_max"] = hp.inner_max;
  h["outer_max"] = hp.outer_max;
  return h;
}

int cmd_simulate(const ConfigMap& cfg) {
  mtlim::SynthConfig sc;
  sc.n_nodes = static_cast<int>(get_long(cfg, "n_nodes", sc.n_nodes));
  sc.n_contagions =
      static_cast<int>(get_long(cfg, "n_contagions", sc.n_contagions));
  sc.lag = static_cast<int>(get_long(cfg, "lag", sc.lag));
  sc.horizon = static_cast<int>(get_long(cfg, "horizon", sc.horizon));
  sc.rank = static_cast<int>(get_long(cfg, "rank", sc.rank));
  if (cfg.count("noise_scale"))
    sc.noise_scale = get_double(cfg, "noise_scale", 0.0);
  sc.seed = static_cast<std::uint64_t>(get_long(cfg, "seed", 0));
  sc.validate();

  fs::path dir = prepare_out_dir(cfg);
  mtlim::SynthInstance inst = mtlim::gen_instance(sc);

  OutputGuard guard;
  mtlim::write_events_csv(guard.track(dir / "events.csv"), inst.log);
  mtlim::write_matrix_csv(guard.track(dir / "volumes.csv"), inst.volumes);
  mtlim::write_matrix_csv(guard.track(dir / "influence_true.csv"),
                          inst.influence_true);

  // A config describing the instance, so downstream commands can consume
  // the directory with a single --config flag.
  ConfigMap inst_cfg;
  inst_cfg["n_nodes"] = std::to_string(sc.n_nodes);
  inst_cfg["n_contagions"] = std::to_string(sc.n_contagions);
  inst_cfg["lag"] = std::to_string(sc.lag);
  inst_cfg["horizon"] = std::to_string(sc.horizon);
  inst_cfg["rank"] = std::to_string(sc.rank);
  inst_cfg["seed"] = std::to_string(sc.seed);
  inst_cfg["noise_scale"] = mtlim::format_g17(inst.noise_scale_used);
  inst_cfg["events"] = "events.csv";
  inst_cfg["volumes"] = "volumes.csv";
  inst_cfg["truth"] = "influence_true.csv";
  mtlim::write_config(guard.track(dir / "instance.config"), inst_cfg);

  write_meta(guard, dir, "simulate", cfg);
  guard.commit();
  return 0;
}

int cmd_fit(const ConfigMap& cfg) {
  Dimensions dims = read_dimensions(cfg);
  std::string events_path = require_str(cfg, "events");
  std::string volumes_path = require_str(cfg, "volumes");
  require_file("events", events_path);
  require_file("volumes", volumes_path);
  std::string truth_path = get_str(cfg, "truth", "");
  if (!truth_path.empty()) require_file("truth", truth_path);
  std::string model = require_model(cfg);

  mtlim::InfectionLog log = mtlim::read_events_csv(
      events_path, dims.n_nodes, dims.n_contagions, dims.horizon);
  Eigen::MatrixXd volumes = mtlim::read_matrix_csv(volumes_path);
  if (volumes.rows() != dims.horizon || volumes.cols() != dims.n_contagions)
    throw ValidationError("volumes file shape does not match the dimensions");
  std::vector<Eigen::MatrixXd> designs = mtlim::build_design(log, dims.lag);
  mtlim::BlockLayout layout{dims.lag, dims.n_nodes, dims.n_contagions};

  fs::path dir = prepare_out_dir(cfg);
  OutputGuard guard;

  Eigen::MatrixXd influence;
  std::vector<double> trace;
  json metrics;
  metrics["model"] = model;
  metrics["seed"] = get_long(cfg, "seed", 0);

  if (model == "copula") {
    mtlim::Hyperparams hp = read_hyperparams(cfg, dims.lag);
    hp.validate();
    auto res = mtlim::fit(designs, volumes, layout, hp, read_init(cfg),
                          static_cast<std::uint64_t>(get_long(cfg, "seed", 0)));
    influence = res.influence;
    trace = res.objective_trace;
    mtlim::write_matrix_csv(guard.track(dir / "mean.csv"), res.mean.compact);
    mtlim::write_matrix_csv(guard.track(dir / "precision.csv"),
                            res.precision.precision);
    metrics["hyperparams"] = hyperparams_json(hp);
    metrics["converged"] = res.converged;
    metrics["iterations"] = res.iterations;
  } else if (model == "mslim") {
    double lambda = get_double(cfg, "mslim_lambda", 0.0);
    double gamma = get_double(cfg, "mslim_gamma", 0.0);
    double tol = get_double(cfg, "inner_tol", 1e-6);
    int max_iter = static_cast<int>(get_long(cfg, "inner_max", 500));
    auto res =
        mtlim::fit_mslim(designs, volumes, layout, lambda, gamma, tol,
                         max_iter);
    influence = res.influence;
    trace = res.objective_trace;
    metrics["hyperparams"] = {{"mslim_lambda", lambda},
                              {"mslim_gamma", gamma},
                              {"inner_tol", tol},
                              {"inner_max", max_iter}};
    metrics["converged"] = res.converged;
    metrics["iterations"] = res.iterations;
  } else {
    // fit_lim's tolerance is an absolute bound on the KKT residual, so the
    // default has to track the data scale to mean anything.
    double tol;
    if (cfg.count("inner_tol")) {
      tol = get_double(cfg, "inner_tol", 0.0);
    } else {
      double grad0 = 0.0;
      for (int k = 0; k < dims.n_contagions; ++k)
        grad0 = std::max(grad0, (2.0 * (designs[static_cast<size_t>(k)]
                                            .transpose() *
                                        volumes.col(k)))
                                    .cwiseAbs()
                                    .maxCoeff());
      tol = 1e-8 * (1.0 + grad0);
    }
    int max_iter = static_cast<int>(get_long(cfg, "inner_max", 5000));
    auto res = mtlim::fit_lim(designs, volumes, tol, max_iter);
    influence = res.influence;
    trace = res.objective_trace;
    metrics["hyperparams"] = {{"inner_tol", tol}, {"inner_max", max_iter}};
    metrics["converged"] = res.converged;
    metrics["iterations"] = res.iterations;
  }

  mtlim::write_matrix_csv(guard.track(dir / "influence.csv"), influence);
  mtlim::write_values_csv(guard.track(dir / "trace.csv"), trace);

  Eigen::MatrixXd expanded =
      replicate_if_shared(influence, dims.n_contagions);
  metrics["mse_full"] = full_mse(designs, volumes, expanded);
  if (!truth_path.empty()) {
    Eigen::MatrixXd truth = mtlim::read_matrix_csv(truth_path);
    metrics["influence_error"] = mtlim::influence_error(expanded, truth);
  }
  write_json(guard.track(dir / "metrics.json"), metrics);
  write_meta(guard, dir, "fit", cfg);
  guard.commit();
  return 0;
}

int cmd_predict(const ConfigMap& cfg) {
  Dimensions dims = read_dimensions(cfg);
  std::string events_path = require_str(cfg, "events");
  std::string influence_path = require_str(cfg, "influence");
  require_file("events", events_path);
  require_file("influence", influence_path);
  int steps = static_cast<int>(get_long(cfg, "steps", dims.horizon));
  if (steps < 1) throw ValidationError("steps must be >= 1");

  mtlim::InfectionLog log = mtlim::read_events_csv(
      events_path, dims.n_nodes, dims.n_contagions, dims.horizon);
  Eigen::MatrixXd influence = replicate_if_shared(
      mtlim::read_matrix_csv(influence_path), dims.n_contagions);
  if (influence.rows() != dims.lag * dims.n_nodes)
    throw ValidationError("influence row count does not match lag * n_nodes");

  Eigen::MatrixXd pred(steps, dims.n_contagions);
  for (int t = 1; t <= steps; ++t)
    pred.row(t - 1) = mtlim::predict_volume(log, influence, t).transpose();

  fs::path dir = prepare_out_dir(cfg);
  OutputGuard guard;
  mtlim::write_matrix_csv(guard.track(dir / "predictions.csv"), pred);
  write_meta(guard, dir, "predict", cfg);
  guard.commit();
  return 0;
}

int cmd_rank(const ConfigMap& cfg) {
  Dimensions dims = read_dimensions(cfg);
  std::string influence_path = require_str(cfg, "influence");
  require_file("influence", influence_path);
  double avg_threshold = get_double(cfg, "avg_threshold", 1.3);
  double max_threshold = get_double(cfg, "max_threshold", 1.8);

  Eigen::MatrixXd influence = replicate_if_shared(
      mtlim::read_matrix_csv(influence_path), dims.n_contagions);
  mtlim::BlockLayout layout{dims.lag, dims.n_nodes, dims.n_contagions};
  if (influence.rows() != layout.rows())
    throw ValidationError("influence row count does not match lag * n_nodes");

  mtlim::NodeScores scores = mtlim::rank_nodes(influence, layout);
  std::vector<int> selected =
      mtlim::select_influential(scores, avg_threshold, max_threshold);
  std::set<int> picked(selected.begin(), selected.end());

  fs::path dir = prepare_out_dir(cfg);
  OutputGuard guard;
  {
    std::ofstream out(guard.track(dir / "rankings.csv"));
    out << "node_id,contagion_id,score\n";
    for (int k = 0; k < dims.n_contagions; ++k)
      for (int rank = 0; rank < dims.n_nodes; ++rank) {
        int node = scores.ranking[k][rank];
        out << node << "," << (k + 1) << ","
            << mtlim::format_g17(scores.score(node - 1, k)) << "\n";
      }
  }
  {
    std::ofstream out(guard.track(dir / "nodes.csv"));
    out << "node_id,avg_score,max_score,selected\n";
    for (int u = 1; u <= dims.n_nodes; ++u)
      out << u << "," << mtlim::format_g17(scores.avg(u - 1)) << ","
          << mtlim::format_g17(scores.max(u - 1)) << ","
          << (picked.count(u) ? 1 : 0) << "\n";
  }
  write_meta(guard, dir, "rank", cfg);
  guard.commit();
  return 0;
}

int cmd_topics(const ConfigMap& cfg) {
  std::string corpus_path = require_str(cfg, "corpus");
  require_file("corpus", corpus_path);
  int n_topics = static_cast<int>(get_long(cfg, "n_topics", 10));
  int top_n = static_cast<int>(get_long(cfg, "top_n", 10));
  int nmf_max_iter = static_cast<int>(get_long(cfg, "nmf_max_iter", 500));
  double nmf_tol = get_double(cfg, "nmf_tol", 1e-6);
  std::uint64_t seed = static_cast<std::uint64_t>(get_long(cfg, "seed", 0));
  if (n_topics < 1) throw ValidationError("n_topics must be >= 1");
  if (top_n < 1) throw ValidationError("top_n must be >= 1");

  std::vector<mtlim::RawDocument> raw = mtlim::read_tweets_csv(corpus_path);
  mtlim::Corpus corpus = mtlim::preprocess(raw, mtlim::default_stopwords());
  if (corpus.documents.empty())
    throw std::runtime_error("no documents survive preprocessing");
  Eigen::MatrixXd x = mtlim::tfidf(corpus);
  mtlim::TopicModel model =
      mtlim::nmf(x, n_topics, nmf_max_iter, nmf_tol, seed);
  auto words = mtlim::top_words(model, corpus.vocabulary, top_n);
  mtlim::TopicLog tl = mtlim::build_log(corpus, model);

  fs::path dir = prepare_out_dir(cfg);
  OutputGuard guard;
  {
    std::ofstream out(guard.track(dir / "topic_report.txt"));
    for (size_t k = 0; k < words.size(); ++k) {
      out << "topic " << (k + 1) << ":";
      for (const auto& w : words[k]) out << " " << w;
      out << "\n";
    }
  }
  {
    std::ofstream out(guard.track(dir / "users.csv"));
    out << "node_id,username\n";
    for (size_t u = 0; u < tl.users.size(); ++u)
      out << (u + 1) << "," << tl.users[u] << "\n";
  }
  mtlim::write_events_csv(guard.track(dir / "events.csv"), tl.log);
  mtlim::write_matrix_csv(guard.track(dir / "volumes.csv"), tl.volumes);

  // The instance config mirrors simulate's so fitting picks up from here.
  ConfigMap inst_cfg;
  inst_cfg["n_nodes"] = std::to_string(tl.log.n_nodes);
  inst_cfg["n_contagions"] = std::to_string(tl.log.n_contagions);
  inst_cfg["horizon"] = std::to_string(tl.log.horizon);
  inst_cfg["events"] = "events.csv";
  inst_cfg["volumes"] = "volumes.csv";
  mtlim::write_config(guard.track(dir / "instance.config"), inst_cfg);

  write_meta(guard, dir, "topics", cfg);
  guard.commit();
  return 0;
}

// Grid parameters come from cv_grid_<key> entries whose <key> must be a
// hyperparameter of the chosen model; candidates iterate in alphabetical
// key order, first key outermost.
mtlim::CvPlan read_cv_plan(const ConfigMap& cfg, const std::string& model) {
  static const std::set<std::string> copula_keys = {
      "lambda1", "lambda2", "lambda3", "lambda4", "lambda5"};
  static const std::set<std::string> mslim_keys = {"mslim_lambda",
                                                   "mslim_gamma"};
  mtlim::CvPlan plan;
  plan.train_fraction = get_double(cfg, "train_fraction", 0.6);
  for (const auto& [key, value] : cfg) {
    if (!is_grid_key(key)) continue;
    std::string name = key.substr(std::string("cv_grid_").size());
    bool ok = (model == "copula" && copula_keys.count(name)) ||
              (model == "mslim" && mslim_keys.count(name));
    if (!ok)
      throw ValidationError("key " + key + ": \"" + name +
                            "\" is not tunable for model=" + model);
    std::vector<double> grid;
    std::string item;
    std::istringstream stream(value);
    while (std::getline(stream, item, ','))
      grid.push_back(parse_double(key, item));
    if (grid.empty())
      throw ValidationError("key " + key + ": empty candidate list");
    plan.param_names.push_back(name);
    plan.param_grids.push_back(std::move(grid));
  }
  if (plan.param_names.empty())
    throw ValidationError(
        "cv needs at least one cv_grid_<param> candidate list");
  return plan;
}

int cmd_cv(const ConfigMap& cfg) {
  Dimensions dims = read_dimensions(cfg);
  std::string events_path = require_str(cfg, "events");
  std::string volumes_path = require_str(cfg, "volumes");
  require_file("events", events_path);
  require_file("volumes", volumes_path);
  std::string truth_path = get_str(cfg, "truth", "");
  if (!truth_path.empty()) require_file("truth", truth_path);
  std::string model = require_model(cfg);
  if (model == "lim")
    throw ValidationError("model=lim has no tunable hyperparameters");
  int threads = static_cast<int>(get_long(cfg, "threads", 1));
  if (threads < 1) throw ValidationError("threads must be >= 1");

  mtlim::InfectionLog log = mtlim::read_events_csv(
      events_path, dims.n_nodes, dims.n_contagions, dims.horizon);
  Eigen::MatrixXd volumes = mtlim::read_matrix_csv(volumes_path);
  if (volumes.rows() != dims.horizon || volumes.cols() != dims.n_contagions)
    throw ValidationError("volumes file shape does not match the dimensions");
  mtlim::BlockLayout layout{dims.lag, dims.n_nodes, dims.n_contagions};
  mtlim::CvPlan plan = read_cv_plan(cfg, model);
  std::uint64_t seed = static_cast<std::uint64_t>(get_long(cfg, "seed", 0));

  mtlim::SolverFn solver;
  if (model == "copula") {
    mtlim::Hyperparams base = read_hyperparams(cfg, dims.lag);
    mtlim::InitStrategy init = read_init(cfg);
    solver = [base, layout, init, seed](
                 const std::vector<Eigen::MatrixXd>& designs,
                 const Eigen::MatrixXd& vol, const mtlim::GridPoint& point) {
      mtlim::Hyperparams hp = base;
      for (const auto& [name, v] : point) {
        if (name == "lambda1") hp.lambda1 = v;
        else if (name == "lambda2") hp.lambda2 = v;
        else if (name == "lambda3") hp.lambda3 = v;
        else if (name == "lambda4") hp.lambda4 = v;
        else if (name == "lambda5") hp.lambda5 = v;
      }
      hp.validate();
      return mtlim::fit(designs, vol, layout, hp, init, seed).influence;
    };
  } else {
    double base_lambda = get_double(cfg, "mslim_lambda", 0.0);
    double base_gamma = get_double(cfg, "mslim_gamma", 0.0);
    double tol = get_double(cfg, "inner_tol", 1e-6);
    int max_iter = static_cast<int>(get_long(cfg, "inner_max", 500));
    solver = [base_lambda, base_gamma, tol, max_iter, layout](
                 const std::vector<Eigen::MatrixXd>& designs,
                 const Eigen::MatrixXd& vol, const mtlim::GridPoint& point) {
      double lambda = base_lambda, gamma = base_gamma;
      for (const auto& [name, v] : point) {
        if (name == "mslim_lambda") lambda = v;
        else if (name == "mslim_gamma") gamma = v;
      }
      return mtlim::fit_mslim(designs, vol, layout, lambda, gamma, tol,
                              max_iter)
          .influence;
    };
  }

  mtlim::CvResult res =
      mtlim::cross_validate(log, volumes, dims.lag, plan, solver, threads);

  fs::path dir = prepare_out_dir(cfg);
  OutputGuard guard;
  {
    std::ofstream out(guard.track(dir / "cv_results.csv"));
    out << "index";
    for (const auto& name : plan.param_names) out << "," << name;
    out << ",validation_mse\n";
    for (size_t i = 0; i < res.grid.size(); ++i) {
      out << i;
      for (const auto& name : plan.param_names)
        out << "," << mtlim::format_g17(res.grid[i].at(name));
      out << "," << mtlim::format_g17(res.validation_mse[i]) << "\n";
    }
  }
  mtlim::write_matrix_csv(guard.track(dir / "influence.csv"),
                          res.refit_influence);

  std::vector<Eigen::MatrixXd> designs = mtlim::build_design(log, dims.lag);
  json metrics;
  metrics["model"] = model;
  metrics["seed"] = get_long(cfg, "seed", 0);
  metrics["mse_validation"] = res.best_validation_mse;
  metrics["mse_full"] = full_mse(designs, volumes, res.refit_influence);
  json best;
  for (const auto& [name, v] : res.best_params) best[name] = v;
  metrics["hyperparams"] = best;
  if (!truth_path.empty()) {
    Eigen::MatrixXd truth = mtlim::read_matrix_csv(truth_path);
    metrics["influence_error"] =
        mtlim::influence_error(res.refit_influence, truth);
  }
  write_json(guard.track(dir / "metrics.json"), metrics);
  write_meta(guard, dir, "cv", cfg);
  guard.commit();
  return 0;
}

int dispatch(const std::string& command, const ConfigMap& cfg) {
  if (command == "simulate") return cmd_simulate(cfg);
  if (command == "fit") return cmd_fit(cfg);
  if (command == "predict") return cmd_predict(cfg);
  if (command == "rank") return cmd_rank(cfg);
  if (command == "topics") return cmd_topics(cfg);
  return cmd_cv(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"influence estimation for implicit diffusion networks"};
  app.require_subcommand(1);

  struct Common {
    std::string config;
    std::string out;
    std::string model;
    std::optional<long> seed;
    std::optional<int> threads;
  };
  Common common;
  std::vector<CLI::App*> subs;
  for (const char* name :
       {"simulate", "fit", "predict", "rank", "topics", "cv"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", common.config, "flat key = value file");
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--model", common.model, "lim, mslim or copula");
    sub->add_option("--seed", common.seed, "random seed");
    sub->add_option("--threads", common.threads, "parallel grid evaluations");
    sub->allow_extras();
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  CLI::App* active = nullptr;
  for (CLI::App* sub : subs)
    if (sub->parsed()) active = sub;

  try {
    ConfigMap cfg;
    if (!common.config.empty()) {
      require_file("config", common.config);
      cfg = load_config(common.config);
    }

    // Leftover arguments are --key value overrides; overrides win.
    std::vector<std::string> extras = active->remaining();
    for (size_t i = 0; i < extras.size(); i += 2) {
      const std::string& flag = extras[i];
      if (flag.rfind("--", 0) != 0)
        throw ValidationError("expected --key value override, got: " + flag);
      if (i + 1 >= extras.size())
        throw ValidationError("override " + flag + " is missing its value");
      cfg[flag.substr(2)] = extras[i + 1];
    }
    if (!common.out.empty()) cfg["out"] = common.out;
    if (!common.model.empty()) cfg["model"] = common.model;
    if (common.seed) cfg["seed"] = std::to_string(*common.seed);
    if (common.threads) cfg["threads"] = std::to_string(*common.threads);
    reject_unknown(cfg);

    return dispatch(active->get_name(), cfg);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
