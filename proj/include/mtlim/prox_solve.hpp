#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mtlim/layout.hpp"

namespace mtlim {

// Shared inner solver: incremental proximal descent on
//
//   data_weight * sum_k ||V_k - M_k I^k||^2
//   + lambda_trace * tr((I - m) P (I - m)^T)
//   + w_nuclear * ||I||_*  + w_frobenius * sum_u ||I_u||_F
//   + w_group * sum_{u,k} ||I_{u,k}||_2      subject to I >= 0.
//
// Each iteration takes one gradient step on the smooth part, then applies
// the nuclear, Frobenius-block and group prox operators (each with weight
// theta * w) in that order, and finally projects onto the nonnegative
// orthant.  constant_offset is added to every objective value so callers
// can thread through terms that do not depend on I.
struct ProxSolveOptions {
  double data_weight = 1.0;
  double lambda_trace = 0.0;
  const Eigen::MatrixXd* mean = nullptr;       // expanded (L*N) x K
  const Eigen::MatrixXd* precision = nullptr;  // K x K, PD
  double w_nuclear = 0.0;
  double w_frobenius = 0.0;
  double w_group = 0.0;
  double constant_offset = 0.0;
  double theta = 0.0;  // <= 0 selects the automatic 1/L step
  double tol = 1e-6;   // relative iterate change
  int max_iter = 500;
};

struct ProxSolveResult {
  Eigen::MatrixXd influence;
  std::vector<double> objective_trace;  // objective after every iteration
  double objective = 0.0;               // value at the returned iterate
  bool converged = false;
  int iterations = 0;
  double theta_used = 0.0;
};

// Returns the best-objective iterate seen (the start point included), so the
// result never scores worse than I0.  If the objective ever exceeds ten
// times its starting value the step is halved once and the loop restarts
// from I0; a second blow-up raises std::runtime_error.
ProxSolveResult prox_solve(const Eigen::MatrixXd& i0,
                           const std::vector<Eigen::MatrixXd>& designs,
                           const Eigen::MatrixXd& volumes,
                           const BlockLayout& layout,
                           const ProxSolveOptions& opts);

// Largest eigenvalue of the PSD operator M^T M, estimated with `iters`
// power iterations from a fixed deterministic start vector.
double design_gram_norm(const Eigen::MatrixXd& design, int iters = 50);

// Same estimate for a symmetric PSD matrix applied directly.
double sym_matrix_norm(const Eigen::MatrixXd& m, int iters = 50);

}  // namespace mtlim
