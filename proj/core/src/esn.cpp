#include "polebench/esn.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace polebench::esn {

namespace {

constexpr double kDegenerateRadius = 1e-12;
constexpr double kRealPoleTol = 1e-12;
constexpr double kSvdTruncation = 1e-12;  // relative singular-value cutoff for the pseudo-inverse

double spectral_radius(const Eigen::MatrixXd& m) {
  const Eigen::EigenSolver<Eigen::MatrixXd> eig(m, /*computeEigenvectors=*/false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd draw_input_weights(std::mt19937& rng, int rows, int cols, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::MatrixXd w(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) w(i, j) = dist(rng);
  }
  return w;
}

void validate_spec(const ReservoirSpec& spec) {
  if (spec.n_hidden < 1 || spec.n_in < 1 || spec.n_out < 1) {
    throw std::invalid_argument("ReservoirSpec: dimensions must be positive");
  }
  if (!(spec.input_scale > 0.0)) {
    throw std::invalid_argument("ReservoirSpec: input_scale must be positive");
  }
}

}  // namespace

rnn::ReservoirModel init_random_reservoir(const ReservoirSpec& spec) {
  validate_spec(spec);
  if (spec.kind != ReservoirKind::Random) {
    throw std::invalid_argument("init_random_reservoir: spec.kind must be Random");
  }
  if (!(spec.spectral_radius > 0.0 && spec.spectral_radius < 1.0)) {
    throw std::invalid_argument("init_random_reservoir: spectral_radius must lie in (0, 1)");
  }

  unsigned seed = spec.seed;
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd w_rec(spec.n_hidden, spec.n_hidden);
    for (int i = 0; i < spec.n_hidden; ++i) {
      for (int j = 0; j < spec.n_hidden; ++j) w_rec(i, j) = normal(rng);
    }
    const double rho = spectral_radius(w_rec);
    if (rho < kDegenerateRadius) {
      std::cerr << "init_random_reservoir: degenerate draw at seed " << seed
                << ", retrying with seed " << (seed + 1) << "\n";
      ++seed;
      continue;
    }
    w_rec *= spec.spectral_radius / rho;
    rnn::ReservoirModel model;
    model.w_rec = std::move(w_rec);
    model.w_in = draw_input_weights(rng, spec.n_hidden, spec.n_in, spec.input_scale);
    model.w_out = Eigen::MatrixXd::Zero(spec.n_out, spec.n_hidden);
    return model;
  }
  throw DegenerateDraw("init_random_reservoir: no usable draw after 100 seed retries");
}

rnn::ReservoirModel init_configured_reservoir(const ReservoirSpec& spec) {
  validate_spec(spec);
  if (spec.kind != ReservoirKind::Configured) {
    throw std::invalid_argument("init_configured_reservoir: spec.kind must be Configured");
  }
  if (spec.poles.empty()) {
    throw std::invalid_argument("init_configured_reservoir: pole list required");
  }
  if (spec.poles.size() > static_cast<std::size_t>(spec.n_hidden)) {
    throw std::invalid_argument("init_configured_reservoir: more poles than hidden units");
  }
  for (const auto& pole : spec.poles) {
    if (std::abs(pole) >= 1.0) {
      throw PoleOutsideUnitCircle("init_configured_reservoir: poles must satisfy |beta| < 1");
    }
  }
  for (std::size_t i = 0; i < spec.poles.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.poles.size(); ++j) {
      if (std::abs(spec.poles[i] - spec.poles[j]) <= kRealPoleTol) {
        throw DuplicatePoles("init_configured_reservoir: poles must be pairwise distinct");
      }
    }
  }

  Eigen::MatrixXd w_rec = Eigen::MatrixXd::Zero(spec.n_hidden, spec.n_hidden);
  std::vector<bool> consumed(spec.poles.size(), false);
  std::vector<double> placed_real;
  int slot = 0;
  for (std::size_t i = 0; i < spec.poles.size(); ++i) {
    if (consumed[i]) continue;
    const Complex pole = spec.poles[i];
    if (std::abs(pole.imag()) <= kRealPoleTol) {
      w_rec(slot, slot) = pole.real();
      placed_real.push_back(pole.real());
      slot += 1;
      consumed[i] = true;
      continue;
    }
    // find the conjugate partner
    std::size_t partner = spec.poles.size();
    for (std::size_t j = i + 1; j < spec.poles.size(); ++j) {
      if (!consumed[j] && std::abs(spec.poles[j] - std::conj(pole)) <= kRealPoleTol) {
        partner = j;
        break;
      }
    }
    if (partner == spec.poles.size()) {
      throw UnpairedComplexPole("init_configured_reservoir: complex pole lacks its conjugate");
    }
    const double r = std::abs(pole);
    const double theta = std::arg(pole);
    w_rec(slot, slot) = r * std::cos(theta);
    w_rec(slot, slot + 1) = -r * std::sin(theta);
    w_rec(slot + 1, slot) = r * std::sin(theta);
    w_rec(slot + 1, slot + 1) = r * std::cos(theta);
    slot += 2;
    consumed[i] = true;
    consumed[partner] = true;
  }

  // Fillers keep spare units stable and distinct from everything placed so far.
  const int n_fill = spec.n_hidden - slot;
  if (n_fill > 0) {
    const double lo = 0.1;
    const double hi = std::max(lo, spec.spectral_radius);
    const double spacing = n_fill > 1 ? (hi - lo) / (n_fill - 1) : 0.0;
    for (int i = 0; i < n_fill; ++i) {
      double value = n_fill > 1 ? lo + i * spacing : 0.5 * (lo + hi);
      const double nudge = (n_fill > 1 ? spacing : 0.1) / 7.0;
      while (std::any_of(placed_real.begin(), placed_real.end(),
                         [&](double p) { return std::abs(p - value) <= kRealPoleTol; })) {
        value += nudge;
      }
      placed_real.push_back(value);
      w_rec(slot, slot) = value;
      slot += 1;
    }
  }

  std::mt19937 rng(spec.seed);
  rnn::ReservoirModel model;
  model.w_rec = std::move(w_rec);
  model.w_in = draw_input_weights(rng, spec.n_hidden, spec.n_in, spec.input_scale);
  model.w_out = Eigen::MatrixXd::Zero(spec.n_out, spec.n_hidden);
  return model;
}

Eigen::MatrixXd fit_readout(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets,
                            double ridge) {
  if (states.cols() != targets.cols()) {
    throw std::invalid_argument("fit_readout: states and targets must share T");
  }
  if (ridge < 0.0) throw std::invalid_argument("fit_readout: ridge must be >= 0");
  if (ridge > 0.0) {
    const Eigen::MatrixXd gram =
        states * states.transpose() +
        ridge * Eigen::MatrixXd::Identity(states.rows(), states.rows());
    return gram.ldlt().solve(states * targets.transpose()).transpose();
  }
  // Minimum-norm least squares through a truncated SVD pseudo-inverse.
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(states,
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double cutoff = kSvdTruncation * sigma(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) inv(i) = 1.0 / sigma(i);
  }
  const Eigen::MatrixXd pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return targets * pinv;
}

Eigen::MatrixXd esn_predict(const rnn::ReservoirModel& model, const Eigen::MatrixXd& inputs) {
  return rnn::forward(model, inputs).outputs;
}

}  // namespace polebench::esn
