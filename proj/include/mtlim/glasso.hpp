#pragma once

#include <Eigen/Dense>

namespace mtlim {

// Result of a graphical-lasso solve.  precision * covariance stays within
// ~tol of the identity at convergence, the precision is symmetric positive
// definite, and diag(covariance) = diag(S) + rho exactly.
struct ContagionPrecision {
  Eigen::MatrixXd precision;   // Omega^{-1}
  Eigen::MatrixXd covariance;  // W
  bool converged = false;
  int sweeps = 0;

  static ContagionPrecision identity(int k);
};

// Cyclic coordinate descent for
//   min_x (1/2) x^T A x - b^T x + rho * ||x||_1
// with A positive definite.  Stops when the largest coordinate change in a
// full sweep drops below tol, or after max_iter sweeps (converged flag set
// accordingly).  x0, when given, warm-starts the iteration.
Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                         double rho, double tol, int max_iter,
                         bool* converged = nullptr,
                         const Eigen::VectorXd* x0 = nullptr);

// Blockwise-coordinate-descent graphical lasso: maximizes
//   log det Omega^{-1} - tr(S Omega^{-1}) - rho * ||Omega^{-1}||_1
// with the l1 penalty over all entries, diagonal included.  W starts at S
// with rho added to the diagonal (the diagonal is never updated), and each
// sweep re-solves one column's lasso subproblem against the current W11.
// Terminates when the mean absolute off-diagonal change of W over a sweep
// falls below tol * mean|offdiag(S)|.  rho = 0 requires S positive definite
// and reproduces S^{-1}.
ContagionPrecision glasso_fit(const Eigen::MatrixXd& s, double rho,
                              double tol = 1e-6, int max_iter = 200);

}  // namespace mtlim
