#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "polebench/signal.hpp"

namespace polebench::rnn {

/// Linear recurrent model h[t] = W_rec h[t-1] + W_in x[t], y[t] = W_out h[t],
/// identity activation, zero initial state.
struct ReservoirModel {
  Eigen::MatrixXd w_in;   // N_h x N_in
  Eigen::MatrixXd w_rec;  // N_h x N_h
  Eigen::MatrixXd w_out;  // N_out x N_h

  int n_in() const { return static_cast<int>(w_in.cols()); }
  int n_hidden() const { return static_cast<int>(w_rec.rows()); }
  int n_out() const { return static_cast<int>(w_out.rows()); }
  void validate() const;
};

nlohmann::json model_to_json(const ReservoirModel& model);
ReservoirModel model_from_json(const nlohmann::json& j);

struct ForwardResult {
  Eigen::MatrixXd states;   // N_h x T
  Eigen::MatrixXd outputs;  // N_out x T
};

/// Exact linear recursion from zero initial state. Throws NonFiniteState if
/// any state entry overflows (possible when the spectral radius exceeds 1
/// over a long horizon).
ForwardResult forward(const ReservoirModel& model, const Eigen::MatrixXd& inputs);

/// Squared error averaged over time: (1/T) sum_t ||y_hat[t] - y[t]||^2.
double sequence_loss(const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets);

struct Gradients {
  Eigen::MatrixXd w_in;
  Eigen::MatrixXd w_rec;
  Eigen::MatrixXd w_out;
};

/// Exact gradients of sequence_loss by backpropagation through time: the
/// running adjoint a[t] = W_rec^T a[t+1] + W_out^T dL/dy[t] realizes the
/// power-series sum over (W_rec^T)^{k-t}.
Gradients bptt_gradients(const ReservoirModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::MatrixXd& targets);

/// |sum_{j=0}^{horizon-1} lambda^j|: magnitude of the geometric factor a pole
/// contributes to its own gradient. Grows linearly at |lambda| = 1, explodes
/// beyond, saturates at 1/(1-|lambda|) below.
double pole_gradient_scale(Complex lambda, int horizon);

enum class OptimizerKind { Gd, GdMomentum, Adam };

struct TrainConfig {
  int epochs = 1;
  double learning_rate = 0.01;
  OptimizerKind optimizer = OptimizerKind::Gd;
  unsigned seed = 0;        // provenance only; training itself is deterministic
  double clip_norm = 0.0;   // global gradient-norm clip; 0 disables
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool train_w_in = true;
  bool train_w_rec = true;
  bool train_w_out = true;
};

struct EpochRecord {
  double loss = 0.0;
  double grad_norm_rec = 0.0;        // Frobenius norm of dL/dW_rec
  double cond_w_rec = 0.0;           // sigma_max / sigma_min of W_rec
  std::vector<double> eig_mags;      // |lambda_i|, descending
};

struct TrainingTrace {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  ReservoirModel model;
  TrainingTrace trace;
  bool diverged = false;
};

/// Full-batch gradient descent over the requested epochs. Each epoch records
/// the diagnostics of the model *entering* that epoch, then applies one
/// update. On divergence (non-finite loss or state) the trace up to the
/// failing epoch is returned with the diverged flag set.
TrainResult train(ReservoirModel model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const TrainConfig& config);

/// Magnitudes of all eigenvalues of a square matrix, descending.
std::vector<double> eigen_magnitudes(const Eigen::MatrixXd& w_rec);

/// sigma_max / sigma_min.
double condition_number(const Eigen::MatrixXd& m);

// CSV forms: "epoch,loss,grad_norm_rec,cond_w_rec" and "epoch,index,magnitude".
void write_trace_csv(const TrainingTrace& trace, std::ostream& out);
void write_eigen_csv(const TrainingTrace& trace, std::ostream& out);

}  // namespace polebench::rnn
