#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mtlim/diffusion_data.hpp"
#include "mtlim/layout.hpp"

namespace mtlim {

// Mean squared error over the listed time steps (1-based rows), all
// contagions pooled.  Throws on an empty selection or shape mismatch.
double volume_mse(const Eigen::MatrixXd& predicted,
                  const Eigen::MatrixXd& actual,
                  const std::vector<int>& time_steps);

// Frobenius distance between influence estimates.
double influence_error(const Eigen::MatrixXd& estimate,
                       const Eigen::MatrixXd& truth);

// Grid search over hyperparameter candidates with a leading train split and
// teacher-forced one-step validation on the remaining rows.
struct CvPlan {
  double train_fraction = 0.6;
  // Cross product of per-parameter candidate lists, first name outermost.
  std::vector<std::string> param_names;
  std::vector<std::vector<double>> param_grids;
};

using GridPoint = std::map<std::string, double>;

// Fits on the given (already split) designs/volumes and returns influence.
using SolverFn = std::function<Eigen::MatrixXd(
    const std::vector<Eigen::MatrixXd>& designs,
    const Eigen::MatrixXd& volumes, const GridPoint& params)>;

struct CvResult {
  GridPoint best_params;
  int best_index = 0;
  std::vector<GridPoint> grid;
  std::vector<double> validation_mse;  // one per grid point
  double best_validation_mse = 0.0;
  Eigen::MatrixXd refit_influence;     // best params refitted on all rows
};

// Trains every grid point on rows 1..floor(train_fraction*T); each
// validation row is predicted from the true event history (teacher forcing).
// Ties keep the first grid point in grid order.  The winning parameters are
// refitted on all rows.  Both splits must have at least `lag` rows.
CvResult cross_validate(const InfectionLog& log,
                        const Eigen::MatrixXd& volumes, int lag,
                        const CvPlan& plan, const SolverFn& solver,
                        int threads = 1);

// Per-(node, contagion) block l2 scores with per-node average and maximum,
// plus a per-contagion ranking (descending score, ties toward the lower
// node id).
struct NodeScores {
  Eigen::MatrixXd score;  // N x K
  Eigen::VectorXd avg;    // length N
  Eigen::VectorXd max;    // length N
  std::vector<std::vector<int>> ranking;  // per contagion, node ids
};

NodeScores rank_nodes(const Eigen::MatrixXd& influence,
                      const BlockLayout& layout);

// Node ids whose average score exceeds avg_threshold or whose maximum
// exceeds max_threshold (union, ascending).
std::vector<int> select_influential(const NodeScores& scores,
                                    double avg_threshold = 1.3,
                                    double max_threshold = 1.8);

}  // namespace mtlim
