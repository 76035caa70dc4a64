#pragma once

#include <Eigen/Dense>

#include "mtlim/layout.hpp"

namespace mtlim {

// Proximal operators and the feasibility projection used by the influence
// solvers.  Each operator maps Z to the exact minimizer of
//   (1/2) ||X - Z||_F^2 + tau * penalty(X)
// over its domain.  All of them are identity at tau = 0 and nonexpansive.
// Non-finite input or tau < 0 raises std::invalid_argument.

// penalty = sum of singular values.  Thin-SVD soft thresholding; the rank
// never increases.
Eigen::MatrixXd prox_nuclear(const Eigen::MatrixXd& z, double tau);

// penalty = sum over (node, contagion) blocks of the block l2 norm.
// Each length-L block b becomes max(0, 1 - tau/||b||) * b; an all-zero
// block maps to itself.
Eigen::MatrixXd prox_group_l2(const Eigen::MatrixXd& z, double tau,
                              const BlockLayout& layout);

// penalty = sum over nodes of the Frobenius norm of the node's L x K slice.
Eigen::MatrixXd prox_frobenius_block(const Eigen::MatrixXd& z, double tau,
                                     const BlockLayout& layout);

// Entrywise projection onto the nonnegative orthant.
Eigen::MatrixXd project_nonneg(const Eigen::MatrixXd& z);

}  // namespace mtlim
