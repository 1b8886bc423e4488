#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "polebench/signal.hpp"

namespace polebench::recovery {

/// Lower-triangular Toeplitz system L h = y built from the first N samples of
/// an input-output pair. Nonsingular exactly when x[0] != 0
/// (det L = x[0]^N).
struct ToeplitzSystem {
  Sequence input;
  Sequence output;

  ToeplitzSystem(Sequence x, Sequence y);
};

/// Transposed Vandermonde system on K distinct poles: row n is
/// [beta_1^n ... beta_K^n], n = 0 .. rows-1. Nonsingular for rows == K since
/// the Vandermonde determinant prod_{k<k'} (beta_k' - beta_k) is nonzero.
struct VandermondeSystem {
  std::vector<Complex> poles;
  std::size_t rows;

  VandermondeSystem(std::vector<Complex> poles, std::size_t rows);
  Eigen::MatrixXcd matrix() const;
};

/// Recovers h[0..N-1] from (x, y) by forward substitution on the triangular
/// system. Throws ZeroLeadingSample when |x[0]| == 0.
Sequence deconvolve(const ToeplitzSystem& sys);
Sequence deconvolve(const Sequence& x, const Sequence& y);

/// Solves sum_k b_k beta_k^n = samples[n] for the gains. Exact when
/// N == K; least squares for N > K (pass `residual` to read back the residual
/// norm). Throws DuplicatePoles if two poles coincide to machine tolerance.
std::vector<Complex> solve_gains(const std::vector<Complex>& poles, const Sequence& samples,
                                 double* residual = nullptr);

/// A recovered parameter set together with the l2 norm of the fit residual
/// over the samples it was recovered from.
struct RecoveredSystem {
  ParamSet params;
  double residual;
};

/// Prony's method: fits the order-K linear prediction over a Hankel matrix of
/// the samples, reads the poles off the companion matrix of the predictor
/// polynomial, then solves the gains. Needs N >= 2K samples; with exactly K
/// distinct nonzero-gain generator terms the answer is the unique one.
/// Throws RankDeficient when the K x K Hankel block is numerically singular
/// (true order < K; retry with smaller K).
RecoveredSystem prony_recover(const Sequence& samples, std::size_t order);

/// Finite candidate pole grid for exhaustive recovery.
struct PoleGrid {
  std::vector<Complex> poles;

  static PoleGrid real_axis(double lo, double hi, double step);
  static PoleGrid complex_rect(double re_lo, double re_hi, double im_lo, double im_hi,
                               double step);
};

/// Exhaustive search over all K-subsets of grid poles; gains are solved per
/// subset and the minimum-residual candidate wins (ties broken by
/// lexicographic grid index, so the result is deterministic). Best-effort:
/// always returns the best grid candidate with its residual. Cost is
/// combinatorial in K; intended for K <= 3.
RecoveredSystem brute_force_recover(const Sequence& samples, std::size_t order,
                                    const PoleGrid& grid);

/// Deconvolve then Prony: the unique parameter set consistent with the first
/// N >= 2K samples of an I/O pair with x[0] != 0.
RecoveredSystem recover_from_io(const Sequence& x, const Sequence& y, std::size_t order);

}  // namespace polebench::recovery
