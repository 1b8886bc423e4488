#pragma once

#include <vector>

#include <Eigen/Core>

#include "polebench/rnn.hpp"
#include "polebench/signal.hpp"

namespace polebench::esn {

enum class ReservoirKind { Random, Configured };

struct ReservoirSpec {
  ReservoirKind kind = ReservoirKind::Random;
  int n_hidden = 32;
  int n_in = 1;
  int n_out = 1;
  double spectral_radius = 0.9;       // Random; also the top of the Configured filler range
  std::vector<Complex> poles;         // Configured: conjugate-closed, |beta| < 1
  double input_scale = 1.0;
  unsigned seed = 0;
};

/// Dense i.i.d. standard-normal recurrent matrix rescaled to the requested
/// spectral radius; W_in i.i.d. uniform in [-input_scale, input_scale]; W_out
/// zero. Deterministic per seed. A degenerate draw (spectral radius below
/// 1e-12) is retried with an incremented seed and reported on stderr.
rnn::ReservoirModel init_random_reservoir(const ReservoirSpec& spec);

/// Real block-diagonal reservoir realizing exactly the requested pole set:
/// 1x1 blocks for real poles, 2x2 rotation-scaling blocks for conjugate
/// pairs. Unused hidden units get distinct small real filler poles evenly
/// spaced in [0.1, spectral_radius].
rnn::ReservoirModel init_configured_reservoir(const ReservoirSpec& spec);

/// Least-squares readout. ridge == 0 gives the minimum-norm solution
/// Y H^+ via SVD with singular values below 1e-12 * sigma_max truncated;
/// ridge > 0 gives Y H^T (H H^T + ridge I)^{-1}.
Eigen::MatrixXd fit_readout(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets,
                            double ridge);

/// Forward pass returning outputs only.
Eigen::MatrixXd esn_predict(const rnn::ReservoirModel& model, const Eigen::MatrixXd& inputs);

}  // namespace polebench::esn
