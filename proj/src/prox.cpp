#include "mtlim/prox.hpp"

#include <stdexcept>

namespace mtlim {

namespace {

void check_input(const Eigen::MatrixXd& z, double tau) {
  if (!z.allFinite())
    throw std::invalid_argument("prox: input has non-finite entries");
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("prox: tau must be finite and >= 0");
}

void check_layout(const Eigen::MatrixXd& z, const BlockLayout& layout) {
  layout.validate();
  if (z.rows() != layout.rows() || z.cols() != layout.cols())
    throw std::invalid_argument("prox: matrix shape does not match layout");
}

}  // namespace

Eigen::MatrixXd prox_nuclear(const Eigen::MatrixXd& z, double tau) {
  check_input(z, tau);
  if (tau == 0.0) return z;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(z,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s =
      (svd.singularValues().array() - tau).max(0.0).matrix();
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Eigen::MatrixXd prox_group_l2(const Eigen::MatrixXd& z, double tau,
                              const BlockLayout& layout) {
  check_input(z, tau);
  check_layout(z, layout);
  if (tau == 0.0) return z;
  Eigen::MatrixXd out = z;
  for (int u = 1; u <= layout.n_nodes; ++u)
    for (int k = 0; k < layout.n_contagions; ++k) {
      auto block = out.col(k).segment(layout.block_row(u), layout.lag);
      double norm = block.norm();
      if (norm <= tau)
        block.setZero();
      else
        block *= 1.0 - tau / norm;
    }
  return out;
}

Eigen::MatrixXd prox_frobenius_block(const Eigen::MatrixXd& z, double tau,
                                     const BlockLayout& layout) {
  check_input(z, tau);
  check_layout(z, layout);
  if (tau == 0.0) return z;
  Eigen::MatrixXd out = z;
  for (int u = 1; u <= layout.n_nodes; ++u) {
    auto slice = out.middleRows(layout.block_row(u), layout.lag);
    double norm = slice.norm();
    if (norm <= tau)
      slice.setZero();
    else
      slice *= 1.0 - tau / norm;
  }
  return out;
}

Eigen::MatrixXd project_nonneg(const Eigen::MatrixXd& z) {
  if (!z.allFinite())
    throw std::invalid_argument("project_nonneg: non-finite entries");
  return z.cwiseMax(0.0);
}

}  // namespace mtlim
