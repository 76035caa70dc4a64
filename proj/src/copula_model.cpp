#include "mtlim/copula_model.hpp"

#include <cmath>
#include <stdexcept>

#include "mtlim/prox_solve.hpp"

namespace mtlim {

namespace {

// 2 sum_i log L_ii from the Cholesky factor; throws when P is not PD.
double log_det_pd(const Eigen::MatrixXd& p) {
  Eigen::LLT<Eigen::MatrixXd> llt(p);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("precision matrix must be positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Objective terms that depend on the precision only (plus the trace term,
// which depends on I as well); used both by objective() and by fit()'s
// keep-the-better-precision guard.
double precision_terms(const Eigen::MatrixXd& influence,
                       const MeanMatrix& mean, const Eigen::MatrixXd& precision,
                       const Hyperparams& hp) {
  double total = 0.0;
  if (hp.lambda1 > 0.0) {
    Eigen::MatrixXd e = influence - mean.expanded();
    total += hp.lambda1 * (e * precision).cwiseProduct(e).sum();
  }
  if (hp.lambda2 > 0.0) total -= hp.lambda2 * log_det_pd(precision);
  if (hp.lambda3 > 0.0) total += hp.lambda3 * precision.cwiseAbs().sum();
  return total;
}

void check_data(const std::vector<Eigen::MatrixXd>& designs,
                const Eigen::MatrixXd& volumes, const BlockLayout& layout) {
  layout.validate();
  if (static_cast<int>(designs.size()) != layout.n_contagions)
    throw std::invalid_argument("expected one design matrix per contagion");
  for (const auto& mk : designs)
    if (mk.cols() != layout.rows() || mk.rows() != volumes.rows())
      throw std::invalid_argument("design matrix shape mismatch");
  if (volumes.cols() != layout.n_contagions)
    throw std::invalid_argument("volume matrix shape mismatch");
}

}  // namespace

void Hyperparams::validate() const {
  const double ls[] = {lambda1, lambda2, lambda3, lambda4, lambda5};
  for (double l : ls)
    if (l < 0.0 || !std::isfinite(l))
      throw std::invalid_argument("hyperparameters must be finite and >= 0");
  if (lambda1 > 0.0 && lambda2 == 0.0)
    throw std::invalid_argument("lambda2 must be > 0 whenever lambda1 > 0");
  if (lag < 1) throw std::invalid_argument("lag must be >= 1");
  if (step_theta && (!std::isfinite(*step_theta) || *step_theta <= 0.0))
    throw std::invalid_argument("step_theta must be finite and > 0");
  if (inner_tol <= 0.0 || outer_tol <= 0.0)
    throw std::invalid_argument("tolerances must be > 0");
  if (inner_max < 1 || outer_max < 1)
    throw std::invalid_argument("iteration caps must be >= 1");
}

Eigen::MatrixXd MeanMatrix::expanded() const {
  Eigen::MatrixXd out(compact.rows() * lag, compact.cols());
  for (int u = 0; u < compact.rows(); ++u)
    for (int k = 0; k < compact.cols(); ++k)
      out.col(k).segment(u * lag, lag).setConstant(compact(u, k));
  return out;
}

double objective(const Eigen::MatrixXd& influence, const MeanMatrix& mean,
                 const Eigen::MatrixXd& precision,
                 const std::vector<Eigen::MatrixXd>& designs,
                 const Eigen::MatrixXd& volumes, const Hyperparams& hp,
                 const BlockLayout& layout) {
  check_data(designs, volumes, layout);
  if (influence.rows() != layout.rows() || influence.cols() != layout.cols())
    throw std::invalid_argument("influence shape mismatch");
  if ((influence.array() < 0.0).any())
    throw std::invalid_argument("influence must be nonnegative");
  Eigen::LLT<Eigen::MatrixXd> pd_probe(precision);
  if (pd_probe.info() != Eigen::Success)
    throw std::invalid_argument("precision matrix must be positive definite");

  double total = 0.0;
  for (int k = 0; k < layout.n_contagions; ++k)
    total += (volumes.col(k) - designs[k] * influence.col(k)).squaredNorm();
  total += precision_terms(influence, mean, precision, hp);
  // The log det and l1 terms above skip zero weights; the nuclear and group
  // terms below do the same so a zero weight never costs an SVD.
  if (hp.lambda4 > 0.0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(influence);
    total += hp.lambda4 * svd.singularValues().sum();
  }
  if (hp.lambda5 > 0.0)
    for (int u = 1; u <= layout.n_nodes; ++u)
      for (int k = 0; k < layout.n_contagions; ++k)
        total += hp.lambda5 *
                 influence.col(k).segment(layout.block_row(u), layout.lag).norm();
  return total;
}

MeanMatrix update_mean(const Eigen::MatrixXd& influence,
                       const BlockLayout& layout) {
  layout.validate();
  if (influence.rows() != layout.rows() || influence.cols() != layout.cols())
    throw std::invalid_argument("update_mean: influence shape mismatch");
  MeanMatrix mean;
  mean.lag = layout.lag;
  mean.compact.resize(layout.n_nodes, layout.n_contagions);
  for (int u = 0; u < layout.n_nodes; ++u)
    for (int k = 0; k < layout.n_contagions; ++k)
      mean.compact(u, k) =
          influence.col(k).segment(u * layout.lag, layout.lag).mean();
  return mean;
}

ContagionPrecision update_precision(const Eigen::MatrixXd& influence,
                                    const MeanMatrix& mean,
                                    const Hyperparams& hp) {
  if (hp.lambda2 <= 0.0)
    throw std::invalid_argument(
        "update_precision requires lambda2 > 0; with lambda2 = 0 the "
        "precision is not updated");
  Eigen::MatrixXd e = influence - mean.expanded();
  Eigen::MatrixXd s = (hp.lambda1 / hp.lambda2) * (e.transpose() * e);
  s = 0.5 * (s + s.transpose());  // clear GEMM round-off asymmetry
  return glasso_fit(s, hp.lambda3 / hp.lambda2);
}

Eigen::MatrixXd grad_smooth(const Eigen::MatrixXd& influence,
                            const MeanMatrix& mean,
                            const Eigen::MatrixXd& precision,
                            const std::vector<Eigen::MatrixXd>& designs,
                            const Eigen::MatrixXd& volumes,
                            const Hyperparams& hp) {
  Eigen::MatrixXd grad(influence.rows(), influence.cols());
  for (int k = 0; k < influence.cols(); ++k)
    grad.col(k).noalias() =
        2.0 * designs[k].transpose() *
        (designs[k] * influence.col(k) - volumes.col(k));
  if (hp.lambda1 > 0.0)
    grad.noalias() +=
        2.0 * hp.lambda1 * ((influence - mean.expanded()) * precision);
  return grad;
}

double auto_step(const std::vector<Eigen::MatrixXd>& designs,
                 const Eigen::MatrixXd& precision, const Hyperparams& hp) {
  double lf = 0.0;
  for (const auto& mk : designs) lf = std::max(lf, design_gram_norm(mk));
  lf *= 2.0;
  if (hp.lambda1 > 0.0) lf += 2.0 * hp.lambda1 * sym_matrix_norm(precision);
  return lf > 0.0 ? 1.0 / lf : 1.0;
}

Eigen::MatrixXd update_influence(const Eigen::MatrixXd& start,
                                 const MeanMatrix& mean,
                                 const ContagionPrecision& precision,
                                 const std::vector<Eigen::MatrixXd>& designs,
                                 const Eigen::MatrixXd& volumes,
                                 const Hyperparams& hp,
                                 const BlockLayout& layout) {
  hp.validate();
  Eigen::MatrixXd mean_exp = mean.expanded();
  ProxSolveOptions opts;
  opts.data_weight = 1.0;
  opts.lambda_trace = hp.lambda1;
  opts.mean = &mean_exp;
  opts.precision = &precision.precision;
  opts.w_nuclear = hp.lambda4;
  opts.w_group = hp.lambda5;
  opts.theta = hp.step_theta ? *hp.step_theta
                             : auto_step(designs, precision.precision, hp);
  opts.tol = hp.inner_tol;
  opts.max_iter = hp.inner_max;
  // Constant precision terms keep the divergence guard comparing full
  // objective values, as the outer loop does.
  opts.constant_offset = 0.0;
  if (hp.lambda2 > 0.0)
    opts.constant_offset -= hp.lambda2 * log_det_pd(precision.precision);
  if (hp.lambda3 > 0.0)
    opts.constant_offset += hp.lambda3 * precision.precision.cwiseAbs().sum();
  return prox_solve(start, designs, volumes, layout, opts).influence;
}

Eigen::MatrixXd ridge_init(const std::vector<Eigen::MatrixXd>& designs,
                           const Eigen::MatrixXd& volumes,
                           const BlockLayout& layout) {
  const int p = layout.rows();
  Eigen::MatrixXd init(p, layout.n_contagions);
  for (int k = 0; k < layout.n_contagions; ++k) {
    const Eigen::MatrixXd& mk = designs[k];
    double tr = mk.squaredNorm();  // tr(M^T M)
    if (tr == 0.0) {
      init.col(k).setZero();
      continue;
    }
    double eps = 1e-3 * tr / p;
    // Woodbury form keeps the solve at T x T instead of LN x LN.
    Eigen::MatrixXd gram = mk * mk.transpose();
    gram.diagonal().array() += eps;
    init.col(k).noalias() =
        mk.transpose() * gram.llt().solve(volumes.col(k));
  }
  return init.cwiseMax(0.0);
}

FitResult fit(const std::vector<Eigen::MatrixXd>& designs,
              const Eigen::MatrixXd& volumes, const BlockLayout& layout,
              const Hyperparams& hp, InitStrategy init, std::uint64_t seed) {
  (void)seed;  // recorded by callers; current init strategies are exact
  hp.validate();
  check_data(designs, volumes, layout);

  FitResult res;
  res.influence = init == InitStrategy::Ridge
                      ? ridge_init(designs, volumes, layout)
                      : Eigen::MatrixXd::Zero(layout.rows(), layout.cols());
  res.mean = update_mean(res.influence, layout);
  res.precision = ContagionPrecision::identity(layout.n_contagions);
  res.objective_trace.push_back(objective(res.influence, res.mean,
                                          res.precision.precision, designs,
                                          volumes, hp, layout));

  for (int outer = 1; outer <= hp.outer_max; ++outer) {
    res.iterations = outer;
    res.mean = update_mean(res.influence, layout);
    if (hp.lambda2 > 0.0) {
      ContagionPrecision cand =
          update_precision(res.influence, res.mean, hp);
      // Keep the old precision when glasso's tol-converged answer would
      // nudge the objective up by float noise; preserves a monotone trace.
      double before = precision_terms(res.influence, res.mean,
                                      res.precision.precision, hp);
      double after =
          precision_terms(res.influence, res.mean, cand.precision, hp);
      if (after <= before) res.precision = std::move(cand);
    }
    res.influence = update_influence(res.influence, res.mean, res.precision,
                                     designs, volumes, hp, layout);
    double obj = objective(res.influence, res.mean, res.precision.precision,
                           designs, volumes, hp, layout);
    double prev = res.objective_trace.back();
    res.objective_trace.push_back(obj);
    if (std::abs(prev - obj) / std::max(1.0, std::abs(prev)) < hp.outer_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

FitResult fit(const InfectionLog& log, const Eigen::MatrixXd& volumes,
              const Hyperparams& hp, InitStrategy init, std::uint64_t seed) {
  BlockLayout layout{hp.lag, log.n_nodes, log.n_contagions};
  return fit(build_design(log, hp.lag), volumes, layout, hp, init, seed);
}

}  // namespace mtlim
