#include "mtlim/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "mtlim/prox_solve.hpp"

namespace mtlim {

double lim_objective(const std::vector<Eigen::MatrixXd>& designs,
                     const Eigen::MatrixXd& volumes,
                     const Eigen::VectorXd& influence) {
  double total = 0.0;
  for (size_t k = 0; k < designs.size(); ++k)
    total += (volumes.col(static_cast<int>(k)) - designs[k] * influence)
                 .squaredNorm();
  return total;
}

double mslim_objective(const std::vector<Eigen::MatrixXd>& designs,
                       const Eigen::MatrixXd& volumes,
                       const BlockLayout& layout,
                       const Eigen::MatrixXd& influence, double lambda,
                       double gamma) {
  double total = 0.0;
  for (int k = 0; k < layout.n_contagions; ++k)
    total +=
        0.5 * (volumes.col(k) - designs[k] * influence.col(k)).squaredNorm();
  for (int u = 1; u <= layout.n_nodes; ++u) {
    total += lambda * influence.middleRows(layout.block_row(u), layout.lag).norm();
    for (int k = 0; k < layout.n_contagions; ++k)
      total += gamma *
               influence.col(k).segment(layout.block_row(u), layout.lag).norm();
  }
  return total;
}

LimResult fit_lim(const std::vector<Eigen::MatrixXd>& designs,
                  const Eigen::MatrixXd& volumes, double tol, int max_iter) {
  if (designs.empty() || designs.size() != static_cast<size_t>(volumes.cols()))
    throw std::invalid_argument("fit_lim: one design per volume column");
  const int p = static_cast<int>(designs[0].cols());
  for (const auto& mk : designs)
    if (mk.cols() != p || mk.rows() != volumes.rows())
      throw std::invalid_argument("fit_lim: design shape mismatch");
  if (tol <= 0.0 || max_iter < 1)
    throw std::invalid_argument("fit_lim: bad tolerance or iteration cap");

  // The same x appears in every contagion's term, so the Lipschitz bound
  // sums the per-contagion Gram norms.
  double lf = 0.0;
  for (const auto& mk : designs) lf += design_gram_norm(mk);
  lf *= 2.0;
  double theta = lf > 0.0 ? 1.0 / lf : 1.0;

  LimResult res;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd grad(p);
  for (int it = 0; it < max_iter; ++it) {
    grad.setZero();
    double obj = 0.0;
    for (size_t k = 0; k < designs.size(); ++k) {
      Eigen::VectorXd r =
          designs[k] * x - volumes.col(static_cast<int>(k));
      obj += r.squaredNorm();
      grad.noalias() += 2.0 * designs[k].transpose() * r;
    }
    res.objective_trace.push_back(obj);
    res.iterations = it;

    double kkt = 0.0;
    for (int i = 0; i < p; ++i)
      kkt = std::max(kkt, x(i) > 0.0 ? std::abs(grad(i))
                                     : std::max(0.0, -grad(i)));
    if (kkt <= tol) {
      res.converged = true;
      break;
    }
    x = (x - theta * grad).cwiseMax(0.0);
  }
  res.influence = std::move(x);
  return res;
}

MslimResult fit_mslim(const std::vector<Eigen::MatrixXd>& designs,
                      const Eigen::MatrixXd& volumes,
                      const BlockLayout& layout, double lambda, double gamma,
                      double tol, int max_iter) {
  if (lambda < 0.0 || gamma < 0.0 || !std::isfinite(lambda) ||
      !std::isfinite(gamma))
    throw std::invalid_argument("fit_mslim: weights must be finite and >= 0");
  ProxSolveOptions opts;
  opts.data_weight = 0.5;
  opts.w_frobenius = lambda;
  opts.w_group = gamma;
  opts.tol = tol;
  opts.max_iter = max_iter;
  Eigen::MatrixXd start =
      Eigen::MatrixXd::Zero(layout.rows(), layout.cols());
  ProxSolveResult inner = prox_solve(start, designs, volumes, layout, opts);

  MslimResult res;
  res.influence = std::move(inner.influence);
  res.objective_trace = std::move(inner.objective_trace);
  res.converged = inner.converged;
  res.iterations = inner.iterations;
  return res;
}

}  // namespace mtlim
