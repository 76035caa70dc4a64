#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mtlim/diffusion_data.hpp"
#include "mtlim/eval.hpp"
#include "mtlim/layout.hpp"
#include "mtlim/rng.hpp"
#include "test_util.hpp"

using mtlim::BlockLayout;
using mtlim::CvPlan;
using mtlim::GridPoint;

TEST_SUITE("eval") {

TEST_CASE("pooled mean squared error over selected steps") {
  Eigen::MatrixXd pred(3, 2), actual(3, 2);
  pred << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  actual << 1.0, 0.0, 0.0, 4.0, 5.0, 8.0;
  // Steps 1 and 3: residuals (0, 2) and (0, -2) -> mean of squares = 2.
  CHECK(mtlim::volume_mse(pred, actual, {1, 3}) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(mtlim::volume_mse(pred, actual, {2}) ==
        doctest::Approx(4.5).epsilon(1e-14));
  CHECK_THROWS_AS(mtlim::volume_mse(pred, actual, {}), std::invalid_argument);
  CHECK_THROWS_AS(mtlim::volume_mse(pred, actual, {4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(mtlim::volume_mse(pred, actual.topRows(2), {1}),
                  std::invalid_argument);
}

TEST_CASE("influence error is the frobenius distance") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 1.0, 2.0, 3.0, 4.0;
  b << 0.0, 2.0, 3.0, 2.0;
  CHECK(mtlim::influence_error(a, b) ==
        doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  CHECK_THROWS_AS(mtlim::influence_error(a, b.topRows(1)),
                  std::invalid_argument);
}

TEST_CASE("node scores, ranking and selection") {
  BlockLayout layout{3, 2, 3};
  Eigen::MatrixXd inf = Eigen::MatrixXd::Zero(layout.rows(), 3);
  // Node 1, contagion 2 block (3, 4, 0) has norm 5, everything else zero.
  inf(0, 1) = 3.0;
  inf(1, 1) = 4.0;
  auto scores = mtlim::rank_nodes(inf, layout);
  CHECK(scores.score(0, 1) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(scores.score(1, 1) == 0.0);
  CHECK(scores.avg(0) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  CHECK(scores.max(0) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(scores.avg(1) == 0.0);

  REQUIRE(scores.ranking.size() == 3);
  CHECK(scores.ranking[1][0] == 1);  // node 1 leads contagion 2
  CHECK(scores.ranking[1][1] == 2);
  CHECK(scores.ranking[0][0] == 1);  // all-zero column: ties keep id order
  CHECK(scores.ranking[0][1] == 2);

  auto picked = mtlim::select_influential(scores, 1.3, 1.8);
  REQUIRE(picked.size() == 1);
  CHECK(picked[0] == 1);
  // Strict comparisons: thresholds exactly at the scores select nothing.
  CHECK(mtlim::select_influential(scores, 5.0 / 3.0, 5.0).empty());
  // Max path alone can pick the node up.
  auto by_max = mtlim::select_influential(scores, 99.0, 4.9);
  REQUIRE(by_max.size() == 1);
  CHECK(by_max[0] == 1);
}

TEST_CASE("grid search scores candidates by one-step validation error") {
  mtlim::Rng rng(81);
  const int horizon = 12, lag = 3;
  BlockLayout layout{lag, 3, 2};
  auto log = testutil::random_log(3, 2, horizon, 0.4, rng);
  Eigen::MatrixXd volumes = testutil::random_nonneg(horizon, 2, rng, 3.0);

  CvPlan plan;
  plan.train_fraction = 0.6;  // t_train = 7, validation rows 8..12
  plan.param_names = {"c"};
  plan.param_grids = {{0.0, 0.2, 0.5}};

  auto solver = [&](const std::vector<Eigen::MatrixXd>&,
                    const Eigen::MatrixXd&, const GridPoint& params) {
    return Eigen::MatrixXd::Constant(layout.rows(), layout.cols(),
                                     params.at("c"))
        .eval();
  };
  auto res = mtlim::cross_validate(log, volumes, lag, plan, solver);

  // Recompute every candidate's validation error straight from the design.
  auto designs = mtlim::build_design(log, lag);
  REQUIRE(res.validation_mse.size() == 3);
  for (int gi = 0; gi < 3; ++gi) {
    double c = plan.param_grids[0][gi];
    Eigen::MatrixXd inf =
        Eigen::MatrixXd::Constant(layout.rows(), layout.cols(), c);
    double sse = 0.0;
    int count = 0;
    for (int t = 8; t <= 12; ++t)
      for (int k = 0; k < 2; ++k) {
        double pred = designs[k].row(t - 1).dot(inf.col(k));
        double r = volumes(t - 1, k) - pred;
        sse += r * r;
        ++count;
      }
    CHECK(res.validation_mse[gi] ==
          doctest::Approx(sse / count).epsilon(1e-12));
  }

  int best = 0;
  for (int gi = 1; gi < 3; ++gi)
    if (res.validation_mse[gi] < res.validation_mse[best]) best = gi;
  CHECK(res.best_index == best);
  CHECK(res.best_params.at("c") == plan.param_grids[0][best]);
  CHECK(res.best_validation_mse ==
        doctest::Approx(res.validation_mse[best]).epsilon(1e-14));
  CHECK(res.refit_influence(0, 0) == plan.param_grids[0][best]);

  // A second thread must not change any score.
  auto res2 = mtlim::cross_validate(log, volumes, lag, plan, solver, 2);
  for (int gi = 0; gi < 3; ++gi)
    CHECK(res2.validation_mse[gi] == res.validation_mse[gi]);
  CHECK(res2.best_index == res.best_index);
}

TEST_CASE("grid expansion is a cartesian product, first name outermost") {
  mtlim::Rng rng(82);
  auto log = testutil::random_log(2, 1, 10, 0.5, rng);
  Eigen::MatrixXd volumes = testutil::random_nonneg(10, 1, rng);

  CvPlan plan;
  plan.train_fraction = 0.5;
  plan.param_names = {"a", "b"};
  plan.param_grids = {{1.0, 2.0}, {3.0, 4.0}};
  auto solver = [&](const std::vector<Eigen::MatrixXd>&,
                    const Eigen::MatrixXd&, const GridPoint&) {
    return Eigen::MatrixXd::Zero(4, 1).eval();
  };
  auto res = mtlim::cross_validate(log, volumes, 2, plan, solver);
  REQUIRE(res.grid.size() == 4);
  CHECK(res.grid[0].at("a") == 1.0);
  CHECK(res.grid[0].at("b") == 3.0);
  CHECK(res.grid[1].at("a") == 1.0);
  CHECK(res.grid[1].at("b") == 4.0);
  CHECK(res.grid[2].at("a") == 2.0);
  CHECK(res.grid[2].at("b") == 3.0);
  CHECK(res.grid[3].at("a") == 2.0);
  CHECK(res.grid[3].at("b") == 4.0);
  // All candidates score identically; the tie keeps the first.
  CHECK(res.best_index == 0);
}

TEST_CASE("refit sees every row after training saw only the head") {
  mtlim::Rng rng(83);
  const int horizon = 12, lag = 3;
  auto log = testutil::random_log(2, 1, horizon, 0.5, rng);
  Eigen::MatrixXd volumes = testutil::random_nonneg(horizon, 1, rng);

  CvPlan plan;
  plan.train_fraction = 0.5;  // t_train = 6
  plan.param_names = {"c"};
  plan.param_grids = {{1.0}};
  std::vector<int> seen;
  auto solver = [&](const std::vector<Eigen::MatrixXd>& designs,
                    const Eigen::MatrixXd& vol, const GridPoint&) {
    seen.push_back(static_cast<int>(vol.rows()));
    CHECK(designs[0].rows() == vol.rows());
    return Eigen::MatrixXd::Constant(2 * lag, 1,
                                     static_cast<double>(vol.rows()))
        .eval();
  };
  auto res = mtlim::cross_validate(log, volumes, lag, plan, solver);
  REQUIRE(seen.size() == 2);
  CHECK(seen[0] == 6);
  CHECK(seen[1] == 12);
  CHECK(res.refit_influence(0, 0) == 12.0);
}

TEST_CASE("splits smaller than the lag are rejected") {
  mtlim::Rng rng(84);
  auto log = testutil::random_log(2, 1, 12, 0.5, rng);
  Eigen::MatrixXd volumes = testutil::random_nonneg(12, 1, rng);
  auto solver = [&](const std::vector<Eigen::MatrixXd>&,
                    const Eigen::MatrixXd&, const GridPoint&) {
    return Eigen::MatrixXd::Zero(6, 1).eval();
  };
  CvPlan plan;
  plan.param_names = {"c"};
  plan.param_grids = {{1.0}};

  plan.train_fraction = 0.1;  // t_train = 1 < lag
  CHECK_THROWS_WITH_AS(mtlim::cross_validate(log, volumes, 3, plan, solver),
                       doctest::Contains("split too small"),
                       std::invalid_argument);
  plan.train_fraction = 0.95;  // validation side has a single row
  CHECK_THROWS_WITH_AS(mtlim::cross_validate(log, volumes, 3, plan, solver),
                       doctest::Contains("split too small"),
                       std::invalid_argument);
  plan.train_fraction = 1.5;
  CHECK_THROWS_AS(mtlim::cross_validate(log, volumes, 3, plan, solver),
                  std::invalid_argument);
}

}  // TEST_SUITE
