#include "mtlim/prox_solve.hpp"

#include <cmath>
#include <stdexcept>

#include "mtlim/prox.hpp"

namespace mtlim {

namespace {

Eigen::VectorXd power_start(int dim) {
  // Fixed, mildly tilted start so the iteration cannot begin orthogonal to
  // the leading eigenvector of a structured operator.
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = 1.0 + 1e-3 * i;
  v /= v.norm();
  return v;
}

template <typename Op>
double power_norm(int dim, int iters, Op&& op) {
  Eigen::VectorXd v = power_start(dim);
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd w = op(v);
    double n = w.norm();
    if (n == 0.0) return 0.0;
    v = w / n;
  }
  return v.dot(op(v));
}

struct ObjectiveParts {
  double data = 0.0;
  double trace = 0.0;
  double nuclear = 0.0;
  double frobenius = 0.0;
  double group = 0.0;
};

double evaluate(const Eigen::MatrixXd& inf,
                const std::vector<Eigen::MatrixXd>& designs,
                const Eigen::MatrixXd& volumes, const BlockLayout& layout,
                const ProxSolveOptions& o) {
  double total = o.constant_offset;
  for (int k = 0; k < layout.n_contagions; ++k)
    total += o.data_weight *
             (volumes.col(k) - designs[k] * inf.col(k)).squaredNorm();
  if (o.lambda_trace > 0.0) {
    Eigen::MatrixXd e = inf - *o.mean;
    total += o.lambda_trace * (e * (*o.precision)).cwiseProduct(e).sum();
  }
  if (o.w_nuclear > 0.0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(inf);
    total += o.w_nuclear * svd.singularValues().sum();
  }
  if (o.w_frobenius > 0.0)
    for (int u = 1; u <= layout.n_nodes; ++u)
      total += o.w_frobenius *
               inf.middleRows(layout.block_row(u), layout.lag).norm();
  if (o.w_group > 0.0)
    for (int u = 1; u <= layout.n_nodes; ++u)
      for (int k = 0; k < layout.n_contagions; ++k)
        total += o.w_group *
                 inf.col(k).segment(layout.block_row(u), layout.lag).norm();
  return total;
}

}  // namespace

double design_gram_norm(const Eigen::MatrixXd& design, int iters) {
  if (design.size() == 0) return 0.0;
  return power_norm(static_cast<int>(design.cols()), iters,
                    [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
                      return design.transpose() * (design * v);
                    });
}

double sym_matrix_norm(const Eigen::MatrixXd& m, int iters) {
  if (m.size() == 0) return 0.0;
  return power_norm(static_cast<int>(m.rows()), iters,
                    [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
                      return m * v;
                    });
}

ProxSolveResult prox_solve(const Eigen::MatrixXd& i0,
                           const std::vector<Eigen::MatrixXd>& designs,
                           const Eigen::MatrixXd& volumes,
                           const BlockLayout& layout,
                           const ProxSolveOptions& opts) {
  layout.validate();
  if (static_cast<int>(designs.size()) != layout.n_contagions)
    throw std::invalid_argument("prox_solve: one design per contagion");
  if (i0.rows() != layout.rows() || i0.cols() != layout.cols())
    throw std::invalid_argument("prox_solve: start point shape mismatch");
  if (volumes.cols() != layout.n_contagions ||
      volumes.rows() != designs[0].rows())
    throw std::invalid_argument("prox_solve: volume shape mismatch");
  if (opts.lambda_trace > 0.0 &&
      (opts.mean == nullptr || opts.precision == nullptr))
    throw std::invalid_argument(
        "prox_solve: trace term requires mean and precision");

  double theta = opts.theta;
  if (theta <= 0.0) {
    double lf = 0.0;
    for (const auto& mk : designs)
      lf = std::max(lf, design_gram_norm(mk));
    lf *= 2.0 * opts.data_weight;
    if (opts.lambda_trace > 0.0)
      lf += 2.0 * opts.lambda_trace * sym_matrix_norm(*opts.precision);
    theta = lf > 0.0 ? 1.0 / lf : 1.0;
  }

  ProxSolveResult res;
  Eigen::MatrixXd cur = i0;
  double obj0 = evaluate(cur, designs, volumes, layout, opts);
  // Cushion keeps a zero-objective fixed point from tripping the guard on
  // float noise alone.
  const double guard = 10.0 * obj0 + 1e-12 * (1.0 + std::abs(obj0));
  double best_obj = obj0;
  Eigen::MatrixXd best = cur;
  bool halved = false;

  Eigen::MatrixXd grad(layout.rows(), layout.cols());
  int it = 0;
  while (it < opts.max_iter) {
    ++it;
    for (int k = 0; k < layout.n_contagions; ++k)
      grad.col(k).noalias() = 2.0 * opts.data_weight * designs[k].transpose() *
                              (designs[k] * cur.col(k) - volumes.col(k));
    if (opts.lambda_trace > 0.0)
      grad.noalias() +=
          2.0 * opts.lambda_trace * ((cur - *opts.mean) * (*opts.precision));

    Eigen::MatrixXd next = cur - theta * grad;
    if (opts.w_nuclear > 0.0) next = prox_nuclear(next, theta * opts.w_nuclear);
    if (opts.w_frobenius > 0.0)
      next = prox_frobenius_block(next, theta * opts.w_frobenius, layout);
    if (opts.w_group > 0.0)
      next = prox_group_l2(next, theta * opts.w_group, layout);
    next = next.cwiseMax(0.0);

    double obj = evaluate(next, designs, volumes, layout, opts);
    if (obj > guard) {
      if (halved)
        throw std::runtime_error(
            "prox_solve: diverging despite a halved step; pick a smaller "
            "step size");
      halved = true;
      theta *= 0.5;
      cur = i0;
      res.objective_trace.clear();
      it = 0;
      continue;
    }

    double rel = (next - cur).norm() / std::max(1.0, cur.norm());
    res.objective_trace.push_back(obj);
    if (obj < best_obj) {
      best_obj = obj;
      best = next;
    }
    cur = next;
    if (rel < opts.tol) {
      res.converged = true;
      break;
    }
  }

  res.influence = std::move(best);
  res.objective = best_obj;
  res.iterations = it;
  res.theta_used = theta;
  return res;
}

}  // namespace mtlim
