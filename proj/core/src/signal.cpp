#include "polebench/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace polebench {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

Complex complex_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument("complex value must be a [re, im] array");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json complex_to_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

}  // namespace

ParamSet::ParamSet(std::vector<GainPole> raw, double merge_tol) {
  if (raw.empty()) {
    throw std::invalid_argument("ParamSet: need at least one (gain, pole) term");
  }
  for (const auto& gp : raw) {
    if (!finite(gp.gain) || !finite(gp.pole)) {
      throw std::invalid_argument("ParamSet: non-finite gain or pole");
    }
  }
  // Combine terms with the same pole (exactly, or within merge_tol of an
  // earlier term), then drop zero coefficients.
  for (const auto& gp : raw) {
    bool merged = false;
    for (auto& existing : pairs_) {
      const bool same = merge_tol > 0.0 ? std::abs(gp.pole - existing.pole) <= merge_tol
                                        : gp.pole == existing.pole;
      if (same) {
        existing.gain += gp.gain;
        merged = true;
        break;
      }
    }
    if (!merged) {
      pairs_.push_back(gp);
    }
  }
  std::erase_if(pairs_, [](const GainPole& gp) { return gp.gain == Complex(0.0, 0.0); });
  if (pairs_.empty()) {
    throw EmptyAfterSimplification("ParamSet: all terms cancelled; the zero system has no parameter-set form");
  }
}

double ParamSet::max_pole_magnitude() const {
  double m = 0.0;
  for (const auto& gp : pairs_) m = std::max(m, std::abs(gp.pole));
  return m;
}

ParamSet simplify(std::vector<GainPole> raw, double merge_tol) {
  return ParamSet(std::move(raw), merge_tol);
}

OrderedParams::OrderedParams(std::vector<GainPole> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) {
    throw std::invalid_argument("OrderedParams: need at least one entry");
  }
}

OrderedParams OrderedParams::from_set(const ParamSet& set) { return OrderedParams(set.pairs()); }

Eigen::VectorXd OrderedParams::cartesian() const {
  Eigen::VectorXd v(4 * entries_.size());
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    v[4 * k + 0] = entries_[k].gain.real();
    v[4 * k + 1] = entries_[k].gain.imag();
    v[4 * k + 2] = entries_[k].pole.real();
    v[4 * k + 3] = entries_[k].pole.imag();
  }
  return v;
}

OrderedParams OrderedParams::from_cartesian(const Eigen::VectorXd& v) {
  if (v.size() == 0 || v.size() % 4 != 0) {
    throw std::invalid_argument("from_cartesian: dimension must be a positive multiple of 4");
  }
  std::vector<GainPole> entries(v.size() / 4);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    entries[k].gain = {v[4 * k + 0], v[4 * k + 1]};
    entries[k].pole = {v[4 * k + 2], v[4 * k + 3]};
  }
  return OrderedParams(std::move(entries));
}

Eigen::VectorXd OrderedParams::polar() const {
  Eigen::VectorXd v(4 * entries_.size());
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    v[4 * k + 0] = entries_[k].gain.real();
    v[4 * k + 1] = entries_[k].gain.imag();
    v[4 * k + 2] = std::abs(entries_[k].pole);
    v[4 * k + 3] = std::arg(entries_[k].pole);
  }
  return v;
}

OrderedParams OrderedParams::from_polar(const Eigen::VectorXd& v) {
  if (v.size() == 0 || v.size() % 4 != 0) {
    throw std::invalid_argument("from_polar: dimension must be a positive multiple of 4");
  }
  std::vector<GainPole> entries(v.size() / 4);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    entries[k].gain = {v[4 * k + 0], v[4 * k + 1]};
    entries[k].pole = std::polar(v[4 * k + 2], v[4 * k + 3]);
  }
  return OrderedParams(std::move(entries));
}

OrderedParams OrderedParams::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != entries_.size()) {
    throw std::invalid_argument("permuted: permutation length mismatch");
  }
  std::vector<bool> seen(perm.size(), false);
  std::vector<GainPole> out(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    if (perm[k] >= perm.size() || seen[perm[k]]) {
      throw std::invalid_argument("permuted: not a permutation");
    }
    seen[perm[k]] = true;
    out[k] = entries_[perm[k]];
  }
  return OrderedParams(std::move(out));
}

Sequence::Sequence(std::vector<Complex> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw std::invalid_argument("Sequence: length must be >= 1");
  }
  for (const auto& s : samples_) {
    if (!finite(s)) throw std::invalid_argument("Sequence: non-finite sample");
  }
}

namespace {

template <typename Pairs>
Sequence impulse_response_impl(const Pairs& pairs, std::size_t length) {
  if (length == 0) throw std::invalid_argument("impulse_response: length must be >= 1");
  std::vector<Complex> h(length, Complex(0.0, 0.0));
  for (const auto& gp : pairs) {
    Complex power(1.0, 0.0);  // beta^0 == 1 exactly, so h[0] is the exact gain sum
    for (std::size_t n = 0; n < length; ++n) {
      h[n] += gp.gain * power;
      power *= gp.pole;
    }
  }
  return Sequence(std::move(h));
}

template <typename Pairs>
Complex dtft_impl(const Pairs& pairs, double omega) {
  for (const auto& gp : pairs) {
    if (std::abs(gp.pole) >= 1.0) {
      throw UnstablePole("dtft: pole magnitude must be < 1");
    }
  }
  const Complex z = std::exp(Complex(0.0, -omega));
  Complex acc(0.0, 0.0);
  for (const auto& gp : pairs) {
    acc += gp.gain / (Complex(1.0, 0.0) - gp.pole * z);
  }
  return acc;
}

}  // namespace

Sequence impulse_response(const ParamSet& params, std::size_t length) {
  return impulse_response_impl(params.pairs(), length);
}

Sequence impulse_response(const OrderedParams& params, std::size_t length) {
  return impulse_response_impl(params.entries(), length);
}

Sequence convolve(const Sequence& h, const Sequence& x) {
  const std::size_t n_out = std::min(h.size(), x.size());
  std::vector<Complex> y(n_out, Complex(0.0, 0.0));
  for (std::size_t n = 0; n < n_out; ++n) {
    Complex acc(0.0, 0.0);
    for (std::size_t m = 0; m <= n; ++m) {
      acc += h[m] * x[n - m];
    }
    y[n] = acc;
  }
  return Sequence(std::move(y));
}

Complex dtft(const ParamSet& params, double omega) { return dtft_impl(params.pairs(), omega); }

Complex dtft(const OrderedParams& params, double omega) {
  return dtft_impl(params.entries(), omega);
}

bool params_equal(const ParamSet& a, const ParamSet& b, double tol) {
  if (tol < 0.0) throw std::invalid_argument("params_equal: tol must be >= 0");
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& pa : a.pairs()) {
    std::size_t best = b.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double dist = std::abs(pa.pole - b.pairs()[j].pole);
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    if (best == b.size()) return false;
    used[best] = true;
    if (best_dist > tol || std::abs(pa.gain - b.pairs()[best].gain) > tol) {
      return false;
    }
  }
  return true;
}

nlohmann::json param_set_to_json(const ParamSet& set) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& gp : set.pairs()) {
    pairs.push_back({{"gain", complex_to_json(gp.gain)}, {"pole", complex_to_json(gp.pole)}});
  }
  return {{"pairs", pairs}};
}

ParamSet param_set_from_json(const nlohmann::json& j) {
  if (!j.contains("pairs")) throw std::invalid_argument("ParamSet JSON: missing \"pairs\"");
  std::vector<GainPole> raw;
  for (const auto& item : j.at("pairs")) {
    raw.push_back({complex_from_json(item.at("gain")), complex_from_json(item.at("pole"))});
  }
  return ParamSet(std::move(raw));
}

nlohmann::json sequence_to_json(const Sequence& seq) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : seq.samples()) samples.push_back(complex_to_json(s));
  return {{"samples", samples}};
}

Sequence sequence_from_json(const nlohmann::json& j) {
  if (!j.contains("samples")) throw std::invalid_argument("Sequence JSON: missing \"samples\"");
  std::vector<Complex> samples;
  for (const auto& item : j.at("samples")) samples.push_back(complex_from_json(item));
  return Sequence(std::move(samples));
}

}  // namespace polebench
