#include <doctest.h>

#include <Eigen/Dense>
#include <stdexcept>

#include "mtlim/diffusion_data.hpp"
#include "mtlim/synth.hpp"

using mtlim::SynthConfig;

namespace {

SynthConfig small_config(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_nodes = 8;
  cfg.n_contagions = 4;
  cfg.lag = 3;
  cfg.horizon = 6;
  cfg.rank = 2;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("same seed reproduces the instance bit for bit") {
  SynthConfig cfg = small_config(5);
  auto a = mtlim::gen_instance(cfg);
  auto b = mtlim::gen_instance(cfg);
  CHECK(a.volumes == b.volumes);
  CHECK(a.influence_true == b.influence_true);
  CHECK(a.noise_scale_used == b.noise_scale_used);
  REQUIRE(a.log.events.size() == b.log.events.size());
  for (size_t i = 0; i < a.log.events.size(); ++i)
    CHECK(a.log.events[i] == b.log.events[i]);

  SynthConfig other = small_config(6);
  auto c = mtlim::gen_instance(other);
  CHECK(a.volumes != c.volumes);
}

TEST_CASE("shapes and ranges") {
  SynthConfig cfg = small_config(7);
  auto inst = mtlim::gen_instance(cfg);
  CHECK(inst.volumes.rows() == cfg.horizon);
  CHECK(inst.volumes.cols() == cfg.n_contagions);
  CHECK(inst.influence_true.rows() == cfg.lag * cfg.n_nodes);
  CHECK(inst.influence_true.cols() == cfg.n_contagions);
  CHECK((inst.influence_true.array() >= 0.0).all());
  CHECK(inst.log.n_nodes == cfg.n_nodes);
  CHECK(inst.log.n_contagions == cfg.n_contagions);
  CHECK(inst.log.horizon == cfg.horizon);
  CHECK_FALSE(inst.log.events.empty());
  // Indicators are drawn for times 0..T-1 only.
  for (const auto& ev : inst.log.events) {
    CHECK(ev.time >= 0);
    CHECK(ev.time <= cfg.horizon - 1);
  }
}

TEST_CASE("ground truth influence has the configured rank") {
  SynthConfig cfg = small_config(8);
  auto inst = mtlim::gen_instance(cfg);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(inst.influence_true);
  int rank = 0;
  double top = svd.singularValues()(0);
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-9 * top) ++rank;
  CHECK(rank <= cfg.rank);
  CHECK(rank >= 1);
}

TEST_CASE("noise-free volumes reproduce the forward model exactly") {
  SynthConfig cfg = small_config(9);
  cfg.noise_scale = 0.0;
  auto inst = mtlim::gen_instance(cfg);
  for (int t = 1; t <= cfg.horizon; ++t) {
    Eigen::VectorXd pred =
        mtlim::predict_volume(inst.log, inst.influence_true, t);
    for (int k = 0; k < cfg.n_contagions; ++k)
      CHECK(inst.volumes(t - 1, k) == pred(k));
  }
  CHECK(inst.noise_scale_used == 0.0);
}

TEST_CASE("automatic noise level tracks the mean noiseless volume") {
  SynthConfig cfg = small_config(10);
  auto inst = mtlim::gen_instance(cfg);
  double noiseless_mean = 0.0;
  for (int t = 1; t <= cfg.horizon; ++t)
    noiseless_mean +=
        mtlim::predict_volume(inst.log, inst.influence_true, t).sum();
  noiseless_mean /= cfg.horizon * cfg.n_contagions;
  CHECK(inst.noise_scale_used ==
        doctest::Approx(0.1 * noiseless_mean).epsilon(1e-12));
  CHECK(inst.noise_scale_used > 0.0);

  SynthConfig pinned = small_config(10);
  pinned.noise_scale = 0.25;
  CHECK(mtlim::gen_instance(pinned).noise_scale_used == 0.25);
}

TEST_CASE("configuration validation") {
  SynthConfig cfg = small_config(11);
  CHECK_NOTHROW(cfg.validate());
  cfg.rank = 5;  // exceeds n_contagions = 4
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config(11);
  cfg.n_nodes = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config(11);
  cfg.lag = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config(11);
  cfg.noise_scale = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config(11);
  cfg.lag = 7;  // exceeds horizon = 6
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("default protocol dimensions") {
  SynthConfig cfg;
  CHECK(cfg.n_nodes == 100);
  CHECK(cfg.n_contagions == 20);
  CHECK(cfg.lag == 10);
  CHECK(cfg.horizon == 20);
  CHECK(cfg.rank == 5);
  CHECK_NOTHROW(cfg.validate());
}

}  // TEST_SUITE
