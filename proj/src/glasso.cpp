#include "mtlim/glasso.hpp"

#include <cmath>
#include <stdexcept>

namespace mtlim {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double mean_abs_offdiag(const Eigen::MatrixXd& s) {
  const int k = static_cast<int>(s.rows());
  if (k < 2) return 0.0;
  double sum = 0.0;
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i)
      if (i != j) sum += std::abs(s(i, j));
  return sum / (static_cast<double>(k) * (k - 1));
}

// Copies W with row/column j removed, and S's column j without entry j.
void split_column(const Eigen::MatrixXd& w, const Eigen::MatrixXd& s, int j,
                  Eigen::MatrixXd& w11, Eigen::VectorXd& s12) {
  const int k = static_cast<int>(w.rows());
  int r = 0;
  for (int a = 0; a < k; ++a) {
    if (a == j) continue;
    s12(r) = s(a, j);
    int c = 0;
    for (int b = 0; b < k; ++b) {
      if (b == j) continue;
      w11(r, c) = w(a, b);
      ++c;
    }
    ++r;
  }
}

}  // namespace

ContagionPrecision ContagionPrecision::identity(int k) {
  ContagionPrecision p;
  p.precision = Eigen::MatrixXd::Identity(k, k);
  p.covariance = Eigen::MatrixXd::Identity(k, k);
  p.converged = true;
  p.sweeps = 0;
  return p;
}

Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                         double rho, double tol, int max_iter, bool* converged,
                         const Eigen::VectorXd* x0) {
  const int p = static_cast<int>(b.size());
  if (a.rows() != p || a.cols() != p)
    throw std::invalid_argument("lasso_cd: A must be square and match b");
  if (rho < 0.0 || !std::isfinite(rho))
    throw std::invalid_argument("lasso_cd: rho must be finite and >= 0");
  for (int i = 0; i < p; ++i)
    if (!(a(i, i) > 0.0))
      throw std::invalid_argument("lasso_cd: A must have positive diagonal");

  Eigen::VectorXd x =
      (x0 != nullptr && x0->size() == p) ? *x0 : Eigen::VectorXd::Zero(p);
  bool done = false;
  for (int sweep = 0; sweep < max_iter && !done; ++sweep) {
    double max_change = 0.0;
    for (int i = 0; i < p; ++i) {
      double partial = a.row(i).dot(x) - a(i, i) * x(i);
      double xi = soft_threshold(b(i) - partial, rho) / a(i, i);
      max_change = std::max(max_change, std::abs(xi - x(i)));
      x(i) = xi;
    }
    done = max_change < tol;
  }
  if (converged != nullptr) *converged = done;
  return x;
}

ContagionPrecision glasso_fit(const Eigen::MatrixXd& s, double rho, double tol,
                              int max_iter) {
  const int k = static_cast<int>(s.rows());
  if (s.cols() != k || k < 1)
    throw std::invalid_argument("glasso_fit: S must be square and non-empty");
  if (!s.allFinite())
    throw std::invalid_argument("glasso_fit: S has non-finite entries");
  double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("glasso_fit: S must be symmetric");
  for (int i = 0; i < k; ++i)
    if (s(i, i) < 0.0)
      throw std::invalid_argument("glasso_fit: S must have nonnegative diagonal");
  if (rho < 0.0 || !std::isfinite(rho))
    throw std::invalid_argument("glasso_fit: rho must be finite and >= 0");
  if (rho == 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success || s.diagonal().minCoeff() <= 0.0)
      throw std::invalid_argument(
          "glasso_fit: rho = 0 requires a positive definite S");
  }

  ContagionPrecision out;
  Eigen::MatrixXd w = s;
  w.diagonal().array() += rho;

  if (k == 1) {
    out.covariance = w;
    out.precision = Eigen::MatrixXd::Constant(1, 1, 1.0 / w(0, 0));
    out.converged = true;
    out.sweeps = 0;
    return out;
  }

  const double thr = tol * mean_abs_offdiag(s);
  const double inner_tol = 1e-9 * std::max(1.0, scale + rho);
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(k - 1, k);
  Eigen::MatrixXd w11(k - 1, k - 1);
  Eigen::VectorXd s12(k - 1);
  out.converged = false;

  for (int sweep = 1; sweep <= max_iter; ++sweep) {
    double total_change = 0.0;
    for (int j = 0; j < k; ++j) {
      split_column(w, s, j, w11, s12);
      Eigen::VectorXd bj = beta.col(j);
      Eigen::VectorXd sol = lasso_cd(w11, s12, rho, inner_tol, 2000,
                                     nullptr, &bj);
      beta.col(j) = sol;
      Eigen::VectorXd w12 = w11 * sol;
      int r = 0;
      for (int a = 0; a < k; ++a) {
        if (a == j) continue;
        total_change += std::abs(w12(r) - w(a, j));
        w(a, j) = w12(r);
        w(j, a) = w12(r);
        ++r;
      }
    }
    out.sweeps = sweep;
    double mean_change =
        total_change / (static_cast<double>(k) * (k - 1));
    if (mean_change <= thr) {
      out.converged = true;
      break;
    }
  }

  // Recover the precision column by column from the final (W, beta) pair.
  Eigen::MatrixXd theta(k, k);
  for (int j = 0; j < k; ++j) {
    double dot = 0.0;
    int r = 0;
    for (int a = 0; a < k; ++a) {
      if (a == j) continue;
      dot += w(a, j) * beta(r, j);
      ++r;
    }
    double denom = w(j, j) - dot;
    if (!(denom > 0.0))
      throw std::runtime_error("glasso_fit: lost positive definiteness");
    double tjj = 1.0 / denom;
    theta(j, j) = tjj;
    r = 0;
    for (int a = 0; a < k; ++a) {
      if (a == j) continue;
      theta(a, j) = -beta(r, j) * tjj;
      ++r;
    }
  }
  out.precision = 0.5 * (theta + theta.transpose());
  out.covariance = w;
  return out;
}

}  // namespace mtlim
