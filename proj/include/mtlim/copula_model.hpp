#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "mtlim/diffusion_data.hpp"
#include "mtlim/glasso.hpp"
#include "mtlim/layout.hpp"

namespace mtlim {

// Hyperparameters of the dependence-coupled influence model.
//
//   lambda1  weight of the trace coupling tr((I-m) P (I-m)^T)
//   lambda2  weight of -log det P        (must be > 0 whenever lambda1 > 0;
//            when lambda2 = 0 the precision stays at its initialization)
//   lambda3  l1 weight on the precision, all entries
//   lambda4  nuclear-norm weight on I
//   lambda5  group-l2 weight on the (node, contagion) blocks of I
struct Hyperparams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double lambda4 = 0.0;
  double lambda5 = 0.0;
  int lag = 1;
  std::optional<double> step_theta;  // empty selects the automatic step
  double inner_tol = 1e-6;
  double outer_tol = 1e-5;
  int inner_max = 500;
  int outer_max = 50;

  void validate() const;
};

// Block-constant mean: one scalar per (node, contagion), expanded to the
// (L*N) x K shape on demand.
struct MeanMatrix {
  Eigen::MatrixXd compact;  // N x K
  int lag = 1;

  Eigen::MatrixXd expanded() const;
};

struct FitResult {
  Eigen::MatrixXd influence;
  MeanMatrix mean;
  ContagionPrecision precision;
  std::vector<double> objective_trace;  // [0] is the value at initialization
  bool converged = false;
  int iterations = 0;  // outer iterations performed
};

enum class InitStrategy { Ridge, Zeros };

// Full model objective.  Throws std::invalid_argument when I has negative
// entries or the precision is not positive definite.
double objective(const Eigen::MatrixXd& influence, const MeanMatrix& mean,
                 const Eigen::MatrixXd& precision,
                 const std::vector<Eigen::MatrixXd>& designs,
                 const Eigen::MatrixXd& volumes, const Hyperparams& hp,
                 const BlockLayout& layout);

// Per-block average of I; the exact minimizer of the trace term over
// block-constant means for any positive definite precision.
MeanMatrix update_mean(const Eigen::MatrixXd& influence,
                       const BlockLayout& layout);

// Graphical-lasso refresh of the precision from the centered influence.
ContagionPrecision update_precision(const Eigen::MatrixXd& influence,
                                    const MeanMatrix& mean,
                                    const Hyperparams& hp);

// Gradient of the smooth objective terms (data misfit + trace coupling).
Eigen::MatrixXd grad_smooth(const Eigen::MatrixXd& influence,
                            const MeanMatrix& mean,
                            const Eigen::MatrixXd& precision,
                            const std::vector<Eigen::MatrixXd>& designs,
                            const Eigen::MatrixXd& volumes,
                            const Hyperparams& hp);

// theta = 1 / (2 max_k ||M_k^T M_k||_2 + 2 lambda1 ||P||_2), spectral norms
// estimated with 50 power iterations; falls back to 1 when the bound is 0.
double auto_step(const std::vector<Eigen::MatrixXd>& designs,
                 const Eigen::MatrixXd& precision, const Hyperparams& hp);

// Inner influence refresh with mean and precision held fixed.
Eigen::MatrixXd update_influence(const Eigen::MatrixXd& start,
                                 const MeanMatrix& mean,
                                 const ContagionPrecision& precision,
                                 const std::vector<Eigen::MatrixXd>& designs,
                                 const Eigen::MatrixXd& volumes,
                                 const Hyperparams& hp,
                                 const BlockLayout& layout);

// Alternating optimization: mean, precision, influence, repeated until the
// relative objective change drops below outer_tol.  The trace this produces
// is non-increasing.  The seed is recorded for reproducibility; the current
// initialization strategies are deterministic and do not consume it.
FitResult fit(const std::vector<Eigen::MatrixXd>& designs,
              const Eigen::MatrixXd& volumes, const BlockLayout& layout,
              const Hyperparams& hp, InitStrategy init = InitStrategy::Ridge,
              std::uint64_t seed = 0);

FitResult fit(const InfectionLog& log, const Eigen::MatrixXd& volumes,
              const Hyperparams& hp, InitStrategy init = InitStrategy::Ridge,
              std::uint64_t seed = 0);

// Ridge start point: per contagion (M^T M + eps I)^{-1} M^T V with
// eps = 1e-3 tr(M^T M)/(LN), clamped to the nonnegative orthant.
Eigen::MatrixXd ridge_init(const std::vector<Eigen::MatrixXd>& designs,
                           const Eigen::MatrixXd& volumes,
                           const BlockLayout& layout);

}  // namespace mtlim
