#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "mtlim/diffusion_data.hpp"

namespace mtlim {

// Synthetic benchmark protocol: low-rank nonnegative ground-truth influence,
// coin-flip infection indicators, Gaussian observation noise.
struct SynthConfig {
  int n_nodes = 100;
  int n_contagions = 20;
  int lag = 10;
  int horizon = 20;
  int rank = 5;
  // Noise standard deviation; empty selects 0.1 * mean noiseless volume.
  std::optional<double> noise_scale;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthInstance {
  InfectionLog log;
  Eigen::MatrixXd volumes;         // T x K, noiseless + gaussian noise
  Eigen::MatrixXd influence_true;  // (L*N) x K = A * B, rank <= cfg.rank
  double noise_scale_used = 0.0;
};

// Deterministic in cfg.seed: ground truth I = A B with A ((LN) x r) and
// B (r x K) filled column-major with uniform [0,1) draws, infection
// indicators Bernoulli(1/2) per (contagion, node, time in 0..T-1), and
// volumes computed through predict_volume so a noiseless instance
// reproduces the forward model bit for bit.
SynthInstance gen_instance(const SynthConfig& cfg);

}  // namespace mtlim
