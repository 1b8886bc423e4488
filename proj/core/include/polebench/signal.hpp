#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "polebench/errors.hpp"

namespace polebench {

using Complex = std::complex<double>;

/// One term b * beta^n of an exponential-sum impulse response.
struct GainPole {
  Complex gain;
  Complex pole;
};

/// Unordered set {(b_k, beta_k)} in fully simplified form: poles pairwise
/// distinct, all gains nonzero, at least one term. Construction merges terms
/// with equal poles and drops zero-gain terms; the identically-zero system has
/// no valid ParamSet and is rejected.
///
/// Pairs are stored in insertion order, but that order carries no meaning;
/// set comparison goes through params_equal().
class ParamSet {
 public:
  /// Simplifies `raw` and validates the invariants. Pole equality is exact
  /// unless merge_tol > 0, in which case poles within merge_tol of an earlier
  /// term are combined into it.
  /// Throws EmptyAfterSimplification if every term cancels.
  explicit ParamSet(std::vector<GainPole> raw, double merge_tol = 0.0);
  ParamSet(std::initializer_list<GainPole> raw) : ParamSet(std::vector<GainPole>(raw)) {}

  std::size_t size() const { return pairs_.size(); }
  const std::vector<GainPole>& pairs() const { return pairs_; }

  /// Largest pole magnitude.
  double max_pole_magnitude() const;

 private:
  std::vector<GainPole> pairs_;
};

/// Alias for the ParamSet constructor, kept as a named operation.
ParamSet simplify(std::vector<GainPole> raw, double merge_tol = 0.0);

/// Ordered list ((b_k, beta_k)) of fixed length K. Unlike ParamSet there is
/// no distinctness requirement: gradient iterates may collide. Viewable as a
/// real vector of dimension 4K via the cartesian (re/im split) or polar
/// (poles as magnitude/phase) coordinate maps.
class OrderedParams {
 public:
  explicit OrderedParams(std::vector<GainPole> entries);
  OrderedParams(std::initializer_list<GainPole> entries)
      : OrderedParams(std::vector<GainPole>(entries)) {}
  static OrderedParams from_set(const ParamSet& set);

  std::size_t size() const { return entries_.size(); }
  const std::vector<GainPole>& entries() const { return entries_; }

  /// [Re b, Im b, Re beta, Im beta] per term.
  Eigen::VectorXd cartesian() const;
  static OrderedParams from_cartesian(const Eigen::VectorXd& v);

  /// [Re b, Im b, |beta|, arg beta] per term.
  Eigen::VectorXd polar() const;
  static OrderedParams from_polar(const Eigen::VectorXd& v);

  /// Entry k of the result is entry perm[k] of *this.
  OrderedParams permuted(const std::vector<std::size_t>& perm) const;

 private:
  std::vector<GainPole> entries_;
};

/// Finite causal complex-valued signal, sample index starting at 0
/// (implicit zeros for n < 0). Length >= 1, all samples finite.
class Sequence {
 public:
  explicit Sequence(std::vector<Complex> samples);
  Sequence(std::initializer_list<Complex> samples)
      : Sequence(std::vector<Complex>(samples)) {}

  std::size_t size() const { return samples_.size(); }
  const Complex& operator[](std::size_t n) const { return samples_[n]; }
  const std::vector<Complex>& samples() const { return samples_; }

 private:
  std::vector<Complex> samples_;
};

/// h[n] = sum_k b_k beta_k^n for 0 <= n < length.
Sequence impulse_response(const ParamSet& params, std::size_t length);
Sequence impulse_response(const OrderedParams& params, std::size_t length);

/// First min(len(h), len(x)) samples of the causal convolution
/// y[n] = sum_{m=0}^{n} h[m] x[n-m].
Sequence convolve(const Sequence& h, const Sequence& x);

/// Closed-form DTFT H(e^{iw}) = sum_k b_k / (1 - beta_k e^{-iw}).
/// Throws UnstablePole unless every pole is strictly inside the unit circle.
Complex dtft(const ParamSet& params, double omega);
Complex dtft(const OrderedParams& params, double omega);

/// Set equality up to `tol` on both gains and poles: greedy nearest-pole
/// matching, then every matched pair is verified. Exact whenever the minimum
/// pole separation within each set is at least 2*tol.
bool params_equal(const ParamSet& a, const ParamSet& b, double tol);

// JSON forms: {"pairs":[{"gain":[re,im],"pole":[re,im]},...]} and
// {"samples":[[re,im],...]}.
nlohmann::json param_set_to_json(const ParamSet& set);
ParamSet param_set_from_json(const nlohmann::json& j);
nlohmann::json sequence_to_json(const Sequence& seq);
Sequence sequence_from_json(const nlohmann::json& j);

}  // namespace polebench
