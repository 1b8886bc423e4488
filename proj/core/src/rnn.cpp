#include "polebench/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

namespace polebench::rnn {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix JSON: expected rows");
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != cols) throw std::invalid_argument("matrix JSON: ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct OptimizerState {
  Eigen::MatrixXd velocity;  // momentum
  Eigen::MatrixXd m1, m2;    // adam moments
};

void apply_update(Eigen::MatrixXd& w, const Eigen::MatrixXd& g, OptimizerState& state,
                  const TrainConfig& cfg, int step) {
  switch (cfg.optimizer) {
    case OptimizerKind::Gd:
      w -= cfg.learning_rate * g;
      return;
    case OptimizerKind::GdMomentum:
      if (state.velocity.size() == 0) state.velocity = Eigen::MatrixXd::Zero(w.rows(), w.cols());
      state.velocity = cfg.momentum * state.velocity + g;
      w -= cfg.learning_rate * state.velocity;
      return;
    case OptimizerKind::Adam: {
      if (state.m1.size() == 0) {
        state.m1 = Eigen::MatrixXd::Zero(w.rows(), w.cols());
        state.m2 = Eigen::MatrixXd::Zero(w.rows(), w.cols());
      }
      state.m1 = cfg.adam_beta1 * state.m1 + (1.0 - cfg.adam_beta1) * g;
      state.m2 = cfg.adam_beta2 * state.m2 + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(cfg.adam_beta1, step);
      const double c2 = 1.0 - std::pow(cfg.adam_beta2, step);
      const Eigen::MatrixXd denom =
          (state.m2 / c2).cwiseSqrt().array() + cfg.adam_epsilon;
      w -= cfg.learning_rate * ((state.m1 / c1).cwiseQuotient(denom));
      return;
    }
  }
}

Gradients gradients_from_forward(const ReservoirModel& model, const Eigen::MatrixXd& inputs,
                                 const Eigen::MatrixXd& targets, const ForwardResult& fwd) {
  const Eigen::Index horizon = inputs.cols();
  const Eigen::MatrixXd delta = (2.0 / static_cast<double>(horizon)) * (fwd.outputs - targets);

  Gradients g;
  g.w_out = delta * fwd.states.transpose();
  g.w_in = Eigen::MatrixXd::Zero(model.w_in.rows(), model.w_in.cols());
  g.w_rec = Eigen::MatrixXd::Zero(model.w_rec.rows(), model.w_rec.cols());

  Eigen::VectorXd adjoint = Eigen::VectorXd::Zero(model.n_hidden());
  for (Eigen::Index t = horizon - 1; t >= 0; --t) {
    adjoint = model.w_out.transpose() * delta.col(t) + model.w_rec.transpose() * adjoint;
    g.w_in += adjoint * inputs.col(t).transpose();
    if (t > 0) g.w_rec += adjoint * fwd.states.col(t - 1).transpose();
  }
  return g;
}

}  // namespace

void ReservoirModel::validate() const {
  if (w_rec.rows() != w_rec.cols()) throw std::invalid_argument("ReservoirModel: W_rec not square");
  if (w_in.rows() != w_rec.rows() || w_out.cols() != w_rec.rows()) {
    throw std::invalid_argument("ReservoirModel: inconsistent dimensions");
  }
  if (!w_in.allFinite() || !w_rec.allFinite() || !w_out.allFinite()) {
    throw std::invalid_argument("ReservoirModel: non-finite entries");
  }
}

nlohmann::json model_to_json(const ReservoirModel& model) {
  return {{"w_in", matrix_to_json(model.w_in)},
          {"w_rec", matrix_to_json(model.w_rec)},
          {"w_out", matrix_to_json(model.w_out)}};
}

ReservoirModel model_from_json(const nlohmann::json& j) {
  ReservoirModel model{matrix_from_json(j.at("w_in")), matrix_from_json(j.at("w_rec")),
                       matrix_from_json(j.at("w_out"))};
  model.validate();
  return model;
}

ForwardResult forward(const ReservoirModel& model, const Eigen::MatrixXd& inputs) {
  model.validate();
  if (inputs.rows() != model.n_in()) {
    throw std::invalid_argument("forward: input rows must equal N_in");
  }
  const Eigen::Index horizon = inputs.cols();
  ForwardResult result;
  result.states.resize(model.n_hidden(), horizon);
  Eigen::VectorXd state = Eigen::VectorXd::Zero(model.n_hidden());
  for (Eigen::Index t = 0; t < horizon; ++t) {
    state = model.w_rec * state + model.w_in * inputs.col(t);
    result.states.col(t) = state;
  }
  if (!result.states.allFinite()) {
    throw NonFiniteState("forward: state overflow (spectral radius above 1 over a long horizon?)");
  }
  result.outputs = model.w_out * result.states;
  return result;
}

double sequence_loss(const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets) {
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
    throw std::invalid_argument("sequence_loss: shape mismatch");
  }
  return (outputs - targets).squaredNorm() / static_cast<double>(outputs.cols());
}

Gradients bptt_gradients(const ReservoirModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::MatrixXd& targets) {
  const ForwardResult fwd = forward(model, inputs);
  if (targets.rows() != model.n_out() || targets.cols() != inputs.cols()) {
    throw std::invalid_argument("bptt_gradients: target shape mismatch");
  }
  return gradients_from_forward(model, inputs, targets, fwd);
}

double pole_gradient_scale(Complex lambda, int horizon) {
  if (horizon < 1) throw std::invalid_argument("pole_gradient_scale: horizon must be >= 1");
  if (lambda == Complex(1.0, 0.0)) return static_cast<double>(horizon);
  if (std::abs(Complex(1.0, 0.0) - lambda) < 1e-12) {
    Complex acc(0.0, 0.0), power(1.0, 0.0);
    for (int j = 0; j < horizon; ++j) {
      acc += power;
      power *= lambda;
    }
    return std::abs(acc);
  }
  return std::abs((Complex(1.0, 0.0) - std::pow(lambda, horizon)) /
                  (Complex(1.0, 0.0) - lambda));
}

TrainResult train(ReservoirModel model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const TrainConfig& config) {
  if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(config.learning_rate >= 0.0)) throw std::invalid_argument("train: bad learning rate");

  TrainResult result{std::move(model), {}, false};
  OptimizerState st_in, st_rec, st_out;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    ForwardResult fwd;
    try {
      fwd = forward(result.model, inputs);
    } catch (const NonFiniteState&) {
      result.diverged = true;
      break;
    }
    const double loss = sequence_loss(fwd.outputs, targets);
    if (!std::isfinite(loss)) {
      result.diverged = true;
      break;
    }
    Gradients g = gradients_from_forward(result.model, inputs, targets, fwd);

    result.trace.epochs.push_back({loss, g.w_rec.norm(), condition_number(result.model.w_rec),
                                   eigen_magnitudes(result.model.w_rec)});

    if (config.clip_norm > 0.0) {
      double total_sq = 0.0;
      if (config.train_w_in) total_sq += g.w_in.squaredNorm();
      if (config.train_w_rec) total_sq += g.w_rec.squaredNorm();
      if (config.train_w_out) total_sq += g.w_out.squaredNorm();
      const double total = std::sqrt(total_sq);
      if (total > config.clip_norm) {
        const double scale = config.clip_norm / total;
        g.w_in *= scale;
        g.w_rec *= scale;
        g.w_out *= scale;
      }
    }

    const int step = epoch + 1;
    if (config.train_w_in) apply_update(result.model.w_in, g.w_in, st_in, config, step);
    if (config.train_w_rec) apply_update(result.model.w_rec, g.w_rec, st_rec, config, step);
    if (config.train_w_out) apply_update(result.model.w_out, g.w_out, st_out, config, step);
  }
  return result;
}

std::vector<double> eigen_magnitudes(const Eigen::MatrixXd& w_rec) {
  if (w_rec.rows() != w_rec.cols()) {
    throw std::invalid_argument("eigen_magnitudes: matrix must be square");
  }
  if (!w_rec.allFinite()) throw std::invalid_argument("eigen_magnitudes: non-finite entries");
  const Eigen::EigenSolver<Eigen::MatrixXd> eig(w_rec, /*computeEigenvectors=*/false);
  std::vector<double> mags(w_rec.rows());
  for (Eigen::Index i = 0; i < w_rec.rows(); ++i) mags[i] = std::abs(eig.eigenvalues()[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return mags;
}

double condition_number(const Eigen::MatrixXd& m) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double s_max = svd.singularValues()(0);
  const double s_min = svd.singularValues()(svd.singularValues().size() - 1);
  if (s_min == 0.0) return std::numeric_limits<double>::infinity();
  return s_max / s_min;
}

void write_trace_csv(const TrainingTrace& trace, std::ostream& out) {
  out << "epoch,loss,grad_norm_rec,cond_w_rec\n";
  for (std::size_t e = 0; e < trace.epochs.size(); ++e) {
    const auto& rec = trace.epochs[e];
    out << e << ',' << format_double(rec.loss) << ',' << format_double(rec.grad_norm_rec) << ','
        << format_double(rec.cond_w_rec) << '\n';
  }
}

void write_eigen_csv(const TrainingTrace& trace, std::ostream& out) {
  out << "epoch,index,magnitude\n";
  for (std::size_t e = 0; e < trace.epochs.size(); ++e) {
    for (std::size_t i = 0; i < trace.epochs[e].eig_mags.size(); ++i) {
      out << e << ',' << i << ',' << format_double(trace.epochs[e].eig_mags[i]) << '\n';
    }
  }
}

}  // namespace polebench::rnn
