#include "mtlim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mtlim/rng.hpp"

namespace mtlim {

void SynthConfig::validate() const {
  if (n_nodes < 1 || n_contagions < 1 || horizon < 1)
    throw std::invalid_argument("SynthConfig: dimensions must be >= 1");
  if (lag < 1 || lag > horizon)
    throw std::invalid_argument("SynthConfig: lag must be in 1..horizon");
  if (rank < 1 || rank > std::min(lag * n_nodes, n_contagions))
    throw std::invalid_argument(
        "SynthConfig: rank must be in 1..min(lag*n_nodes, n_contagions)");
  if (noise_scale && (*noise_scale < 0.0 || !std::isfinite(*noise_scale)))
    throw std::invalid_argument("SynthConfig: noise_scale must be >= 0");
}

SynthInstance gen_instance(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int p = cfg.lag * cfg.n_nodes;

  // Draw order is part of the format: A column-major, then B column-major,
  // then indicators by (contagion, node, time), then noise by (contagion,
  // time).  Reordering any loop would change seeded instances.
  Eigen::MatrixXd a(p, cfg.rank);
  for (int j = 0; j < cfg.rank; ++j)
    for (int i = 0; i < p; ++i) a(i, j) = rng.uniform01();
  Eigen::MatrixXd b(cfg.rank, cfg.n_contagions);
  for (int j = 0; j < cfg.n_contagions; ++j)
    for (int i = 0; i < cfg.rank; ++i) b(i, j) = rng.uniform01();

  SynthInstance inst;
  inst.influence_true = a * b;

  std::vector<Event> events;
  for (int k = 1; k <= cfg.n_contagions; ++k)
    for (int u = 1; u <= cfg.n_nodes; ++u)
      for (int t = 0; t < cfg.horizon; ++t)
        if (rng.bernoulli_half()) events.push_back({u, k, t});
  inst.log = InfectionLog::create(cfg.n_nodes, cfg.n_contagions, cfg.horizon,
                                  std::move(events));

  inst.volumes.resize(cfg.horizon, cfg.n_contagions);
  for (int t = 1; t <= cfg.horizon; ++t)
    inst.volumes.row(t - 1) =
        predict_volume(inst.log, inst.influence_true, t).transpose();

  double scale;
  if (cfg.noise_scale) {
    scale = *cfg.noise_scale;
  } else {
    scale = 0.1 * inst.volumes.mean();  // noiseless volumes are >= 0
  }
  inst.noise_scale_used = scale;
  if (scale > 0.0)
    for (int k = 0; k < cfg.n_contagions; ++k)
      for (int t = 0; t < cfg.horizon; ++t)
        inst.volumes(t, k) += scale * rng.gaussian();
  return inst;
}

}  // namespace mtlim
