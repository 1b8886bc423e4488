#include "polebench/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace polebench::recovery {

namespace {

Eigen::VectorXcd to_eigen(const Sequence& seq) {
  Eigen::VectorXcd v(seq.size());
  for (std::size_t n = 0; n < seq.size(); ++n) v[n] = seq[n];
  return v;
}

constexpr double kHankelRankTol = 1e-10;   // relative smallest/largest singular value
constexpr double kPoleCoincideTol = 1e-14; // relative machine tolerance for duplicate poles

}  // namespace

ToeplitzSystem::ToeplitzSystem(Sequence x, Sequence y) : input(std::move(x)), output(std::move(y)) {
  if (input.size() != output.size()) {
    throw std::invalid_argument("ToeplitzSystem: input and output lengths must match");
  }
}

VandermondeSystem::VandermondeSystem(std::vector<Complex> p, std::size_t r)
    : poles(std::move(p)), rows(r) {
  if (poles.empty()) throw std::invalid_argument("VandermondeSystem: need at least one pole");
  if (rows < poles.size()) {
    throw std::invalid_argument("VandermondeSystem: rows must be >= number of poles");
  }
  double scale = 1.0;
  for (const auto& pole : poles) scale = std::max(scale, std::abs(pole));
  for (std::size_t i = 0; i < poles.size(); ++i) {
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      if (std::abs(poles[i] - poles[j]) <= kPoleCoincideTol * scale) {
        throw DuplicatePoles("VandermondeSystem: poles coincide to machine tolerance");
      }
    }
  }
}

Eigen::MatrixXcd VandermondeSystem::matrix() const {
  const std::size_t k = poles.size();
  Eigen::MatrixXcd m(rows, k);
  for (std::size_t j = 0; j < k; ++j) {
    Complex power(1.0, 0.0);
    for (std::size_t n = 0; n < rows; ++n) {
      m(n, j) = power;
      power *= poles[j];
    }
  }
  return m;
}

Sequence deconvolve(const ToeplitzSystem& sys) {
  const Sequence& x = sys.input;
  const Sequence& y = sys.output;
  if (std::abs(x[0]) == 0.0) {
    throw ZeroLeadingSample("deconvolve: x[0] must be nonzero (system singular)");
  }
  const std::size_t n_samples = x.size();
  std::vector<Complex> h(n_samples);
  // Forward substitution: h[n] = (y[n] - sum_{m>=1} x[m] h[n-m]) / x[0].
  for (std::size_t n = 0; n < n_samples; ++n) {
    Complex acc = y[n];
    for (std::size_t m = 1; m <= n; ++m) {
      acc -= x[m] * h[n - m];
    }
    h[n] = acc / x[0];
  }
  return Sequence(std::move(h));
}

Sequence deconvolve(const Sequence& x, const Sequence& y) {
  return deconvolve(ToeplitzSystem(x, y));
}

std::vector<Complex> solve_gains(const std::vector<Complex>& poles, const Sequence& samples,
                                 double* residual) {
  if (samples.size() < poles.size()) {
    throw std::invalid_argument("solve_gains: need at least K samples");
  }
  const VandermondeSystem sys(poles, samples.size());
  const Eigen::MatrixXcd m = sys.matrix();
  const Eigen::VectorXcd rhs = to_eigen(samples);
  const Eigen::VectorXcd b = m.colPivHouseholderQr().solve(rhs);
  if (residual != nullptr) {
    *residual = (m * b - rhs).norm();
  }
  return {b.data(), b.data() + b.size()};
}

RecoveredSystem prony_recover(const Sequence& samples, std::size_t order) {
  const std::size_t k = order;
  const std::size_t n_samples = samples.size();
  if (k == 0) throw std::invalid_argument("prony_recover: order must be >= 1");
  if (n_samples < 2 * k) {
    throw std::invalid_argument("prony_recover: need at least 2K samples");
  }

  // Numerical rank of the leading K x K Hankel block decides whether an
  // order-K predictor exists; it is singular exactly when the true order is
  // below K.
  Eigen::MatrixXcd hankel(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      hankel(i, j) = samples[i + j];
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(hankel);
  const double s_max = svd.singularValues()(0);
  const double s_min = svd.singularValues()(k - 1);
  if (s_max == 0.0 || s_min < kHankelRankTol * s_max) {
    throw RankDeficient("prony_recover: Hankel block numerically singular; true order is below K");
  }

  // Linear prediction: sum_j c_j h[i+j] = -h[i+K] for all available rows.
  const std::size_t n_rows = n_samples - k;
  Eigen::MatrixXcd lp(n_rows, k);
  Eigen::VectorXcd rhs(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      lp(i, j) = samples[i + j];
    }
    rhs[i] = -samples[i + k];
  }
  const Eigen::VectorXcd coeff = lp.colPivHouseholderQr().solve(rhs);

  // Poles are the companion-matrix eigenvalues of z^K + c_{K-1} z^{K-1} + ... + c_0.
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(k, k);
  for (std::size_t i = 0; i + 1 < k; ++i) companion(i + 1, i) = 1.0;
  for (std::size_t i = 0; i < k; ++i) companion(i, k - 1) = -coeff[i];
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(companion, /*computeEigenvectors=*/false);
  std::vector<Complex> poles(eig.eigenvalues().data(), eig.eigenvalues().data() + k);

  std::vector<Complex> gains;
  try {
    gains = solve_gains(poles, samples);
  } catch (const DuplicatePoles&) {
    throw RankDeficient("prony_recover: predictor roots collide; true order is below K");
  }

  std::vector<GainPole> pairs(k);
  for (std::size_t i = 0; i < k; ++i) pairs[i] = {gains[i], poles[i]};
  ParamSet params(std::move(pairs));
  const Sequence fit = impulse_response(params, n_samples);
  double residual = 0.0;
  for (std::size_t n = 0; n < n_samples; ++n) {
    residual += std::norm(fit[n] - samples[n]);
  }
  return {std::move(params), std::sqrt(residual)};
}

PoleGrid PoleGrid::real_axis(double lo, double hi, double step) {
  if (step <= 0.0 || hi < lo) throw std::invalid_argument("PoleGrid: bad range");
  PoleGrid grid;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  for (std::size_t i = 0; i < count; ++i) grid.poles.emplace_back(lo + static_cast<double>(i) * step, 0.0);
  return grid;
}

PoleGrid PoleGrid::complex_rect(double re_lo, double re_hi, double im_lo, double im_hi,
                                double step) {
  if (step <= 0.0 || re_hi < re_lo || im_hi < im_lo) {
    throw std::invalid_argument("PoleGrid: bad range");
  }
  PoleGrid grid;
  const auto n_re = static_cast<std::size_t>(std::floor((re_hi - re_lo) / step + 0.5)) + 1;
  const auto n_im = static_cast<std::size_t>(std::floor((im_hi - im_lo) / step + 0.5)) + 1;
  for (std::size_t i = 0; i < n_re; ++i) {
    for (std::size_t j = 0; j < n_im; ++j) {
      grid.poles.emplace_back(re_lo + static_cast<double>(i) * step,
                              im_lo + static_cast<double>(j) * step);
    }
  }
  return grid;
}

RecoveredSystem brute_force_recover(const Sequence& samples, std::size_t order,
                                    const PoleGrid& grid) {
  const std::size_t k = order;
  if (k == 0) throw std::invalid_argument("brute_force_recover: order must be >= 1");
  if (grid.poles.size() < k) {
    throw std::invalid_argument("brute_force_recover: grid smaller than requested order");
  }
  if (samples.size() < 2 * k) {
    throw std::invalid_argument("brute_force_recover: need at least 2K samples");
  }

  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;

  double best_residual = std::numeric_limits<double>::infinity();
  std::vector<Complex> best_poles;
  std::vector<Complex> best_gains;

  // Enumerate K-subsets in lexicographic index order; strict improvement
  // keeps the first (lexicographically smallest) candidate on ties.
  while (true) {
    std::vector<Complex> poles(k);
    for (std::size_t i = 0; i < k; ++i) poles[i] = grid.poles[idx[i]];
    double residual = 0.0;
    std::vector<Complex> gains = solve_gains(poles, samples, &residual);
    if (residual < best_residual) {
      best_residual = residual;
      best_poles = std::move(poles);
      best_gains = std::move(gains);
    }

    // next combination
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (idx[i] != i + grid.poles.size() - k) break;
      if (i == 0) {
        i = k;
        break;
      }
    }
    if (i == k) break;
    ++idx[i];
    for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }

  std::vector<GainPole> pairs(k);
  for (std::size_t i = 0; i < k; ++i) pairs[i] = {best_gains[i], best_poles[i]};
  return {ParamSet(std::move(pairs)), best_residual};
}

RecoveredSystem recover_from_io(const Sequence& x, const Sequence& y, std::size_t order) {
  if (x.size() < 2 * order) {
    throw std::invalid_argument("recover_from_io: need at least 2K samples");
  }
  const Sequence h = deconvolve(x, y);
  return prony_recover(h, order);
}

}  // namespace polebench::recovery
