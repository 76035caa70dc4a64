#include "mtlim/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace mtlim {

double volume_mse(const Eigen::MatrixXd& predicted,
                  const Eigen::MatrixXd& actual,
                  const std::vector<int>& time_steps) {
  if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols())
    throw std::invalid_argument("volume_mse: shape mismatch");
  if (time_steps.empty())
    throw std::invalid_argument("volume_mse: no time steps selected");
  double sum = 0.0;
  for (int t : time_steps) {
    if (t < 1 || t > actual.rows())
      throw std::invalid_argument("volume_mse: time step out of range");
    sum += (predicted.row(t - 1) - actual.row(t - 1)).squaredNorm();
  }
  return sum / (static_cast<double>(time_steps.size()) * actual.cols());
}

double influence_error(const Eigen::MatrixXd& estimate,
                       const Eigen::MatrixXd& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw std::invalid_argument("influence_error: shape mismatch");
  return (estimate - truth).norm();
}

namespace {

std::vector<GridPoint> expand_grid(const CvPlan& plan) {
  if (plan.param_names.size() != plan.param_grids.size())
    throw std::invalid_argument("cross_validate: names/grids mismatch");
  for (const auto& g : plan.param_grids)
    if (g.empty())
      throw std::invalid_argument("cross_validate: empty candidate list");
  std::vector<GridPoint> points;
  points.emplace_back();
  for (size_t p = 0; p < plan.param_names.size(); ++p) {
    std::vector<GridPoint> next;
    for (const auto& base : points)
      for (double v : plan.param_grids[p]) {
        GridPoint g = base;
        g[plan.param_names[p]] = v;
        next.push_back(std::move(g));
      }
    points = std::move(next);
  }
  return points;
}

}  // namespace

CvResult cross_validate(const InfectionLog& log,
                        const Eigen::MatrixXd& volumes, int lag,
                        const CvPlan& plan, const SolverFn& solver,
                        int threads) {
  if (volumes.rows() != log.horizon || volumes.cols() != log.n_contagions)
    throw std::invalid_argument("cross_validate: volume shape mismatch");
  if (plan.train_fraction <= 0.0 || plan.train_fraction >= 1.0)
    throw std::invalid_argument(
        "cross_validate: train_fraction must be in (0, 1)");
  const int t_total = log.horizon;
  const int t_train =
      static_cast<int>(std::floor(plan.train_fraction * t_total));
  if (t_train < lag || t_total - t_train < lag)
    throw std::invalid_argument(
        "cross_validate: split too small, both parts need >= lag rows");

  // Row t of the full design only references times < t, so the train design
  // is exactly the top block of the full one.
  std::vector<Eigen::MatrixXd> full = build_design(log, lag);
  std::vector<Eigen::MatrixXd> train;
  train.reserve(full.size());
  for (const auto& mk : full) train.push_back(mk.topRows(t_train));
  Eigen::MatrixXd train_volumes = volumes.topRows(t_train);

  std::vector<int> val_steps;
  for (int t = t_train + 1; t <= t_total; ++t) val_steps.push_back(t);

  CvResult res;
  res.grid = expand_grid(plan);
  res.validation_mse.assign(res.grid.size(), 0.0);

  auto score_point = [&](size_t idx) {
    Eigen::MatrixXd inf = solver(train, train_volumes, res.grid[idx]);
    Eigen::MatrixXd pred = Eigen::MatrixXd::Zero(t_total, log.n_contagions);
    for (int t : val_steps)
      pred.row(t - 1) = predict_volume(log, inf, t).transpose();
    res.validation_mse[idx] = volume_mse(pred, volumes, val_steps);
  };

  const size_t n_points = res.grid.size();
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(n_points)));
  if (workers == 1) {
    for (size_t i = 0; i < n_points; ++i) score_point(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> cursor{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t i = cursor.fetch_add(1); i < n_points;
             i = cursor.fetch_add(1))
          score_point(i);
      });
    for (auto& th : pool) th.join();
  }

  res.best_index = 0;
  for (size_t i = 1; i < n_points; ++i)
    if (res.validation_mse[i] < res.validation_mse[res.best_index])
      res.best_index = static_cast<int>(i);
  res.best_params = res.grid[res.best_index];
  res.best_validation_mse = res.validation_mse[res.best_index];
  res.refit_influence = solver(full, volumes, res.best_params);
  return res;
}

NodeScores rank_nodes(const Eigen::MatrixXd& influence,
                      const BlockLayout& layout) {
  layout.validate();
  if (influence.rows() != layout.rows() || influence.cols() != layout.cols())
    throw std::invalid_argument("rank_nodes: influence shape mismatch");
  NodeScores scores;
  scores.score.resize(layout.n_nodes, layout.n_contagions);
  for (int u = 1; u <= layout.n_nodes; ++u)
    for (int k = 0; k < layout.n_contagions; ++k)
      scores.score(u - 1, k) =
          influence.col(k).segment(layout.block_row(u), layout.lag).norm();
  scores.avg = scores.score.rowwise().mean();
  scores.max = scores.score.rowwise().maxCoeff();

  scores.ranking.resize(layout.n_contagions);
  for (int k = 0; k < layout.n_contagions; ++k) {
    std::vector<int> order(layout.n_nodes);
    for (int u = 0; u < layout.n_nodes; ++u) order[u] = u + 1;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return scores.score(a - 1, k) > scores.score(b - 1, k);
    });
    scores.ranking[k] = std::move(order);
  }
  return scores;
}

std::vector<int> select_influential(const NodeScores& scores,
                                    double avg_threshold,
                                    double max_threshold) {
  std::vector<int> out;
  for (int u = 0; u < scores.avg.size(); ++u)
    if (scores.avg(u) > avg_threshold || scores.max(u) > max_threshold)
      out.push_back(u + 1);
  return out;
}

}  // namespace mtlim
