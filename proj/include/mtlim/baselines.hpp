#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mtlim/layout.hpp"

namespace mtlim {

// Single shared influence vector across contagions, fitted by projected
// gradient on sum_k ||V_k - M_k x||^2 subject to x >= 0.
struct LimResult {
  Eigen::VectorXd influence;            // length L*N
  std::vector<double> objective_trace;  // objective at each iterate
  bool converged = false;
  int iterations = 0;
};

// tol bounds the KKT residual: |grad_i| where x_i > 0, max(0, -grad_i)
// where x_i = 0.
LimResult fit_lim(const std::vector<Eigen::MatrixXd>& designs,
                  const Eigen::MatrixXd& volumes, double tol = 1e-8,
                  int max_iter = 5000);

// Per-contagion influence with node-slice Frobenius and (node, contagion)
// group-l2 shrinkage:
//   (1/2) sum_k ||V_k - M_k I^k||^2 + lambda sum_u ||I_u||_F
//     + gamma sum_{u,k} ||I_{u,k}||_2   subject to I >= 0.
struct MslimResult {
  Eigen::MatrixXd influence;
  std::vector<double> objective_trace;
  bool converged = false;
  int iterations = 0;
};

MslimResult fit_mslim(const std::vector<Eigen::MatrixXd>& designs,
                      const Eigen::MatrixXd& volumes,
                      const BlockLayout& layout, double lambda, double gamma,
                      double tol = 1e-6, int max_iter = 500);

double lim_objective(const std::vector<Eigen::MatrixXd>& designs,
                     const Eigen::MatrixXd& volumes,
                     const Eigen::VectorXd& influence);

double mslim_objective(const std::vector<Eigen::MatrixXd>& designs,
                       const Eigen::MatrixXd& volumes,
                       const BlockLayout& layout,
                       const Eigen::MatrixXd& influence, double lambda,
                       double gamma);

}  // namespace mtlim
