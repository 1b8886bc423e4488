#include "polebench/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

namespace polebench::landscape {

namespace {

constexpr int kQuadraturePoints = 4096;          // uniform grid over [-pi, pi)
constexpr double kTailBound = 1e-14;             // infinite-horizon truncation target
constexpr std::size_t kMaxHorizon = 100000;      // hard cap on the summed horizon
constexpr double kStabilityMargin = 1e-9;        // candidate poles must satisfy |b| < 1 - margin
constexpr double kCondFiniteTol = 1e-12;         // eigen_min below this (relative) flags infinity
constexpr double kMinTruthResponse = 1e-9;       // lower bound for |H| in the ratio objective

double quadrature_omega(int j) {
  return -std::numbers::pi + 2.0 * std::numbers::pi * j / kQuadraturePoints;
}

void require_stable_candidate(const OrderedParams& candidate) {
  for (const auto& gp : candidate.entries()) {
    if (std::abs(gp.pole) >= 1.0 - kStabilityMargin) {
      throw UnstableCandidate("objective: candidate pole magnitude must be < 1");
    }
  }
}

double gain_magnitude_sum(const std::vector<GainPole>& pairs) {
  double acc = 0.0;
  for (const auto& gp : pairs) acc += std::abs(gp.gain);
  return acc;
}

double max_pole(const std::vector<GainPole>& pairs) {
  double acc = 0.0;
  for (const auto& gp : pairs) acc = std::max(acc, std::abs(gp.pole));
  return acc;
}

/// Horizon M such that sum_{n>M} (sum_k |b_k| |beta_k|^n)^2 < kTailBound,
/// capped at kMaxHorizon.
std::size_t infinite_horizon(const ParamSet& truth, const OrderedParams& candidate) {
  const double c = gain_magnitude_sum(truth.pairs()) + gain_magnitude_sum(candidate.entries());
  const double beta = std::max(max_pole(truth.pairs()), max_pole(candidate.entries()));
  if (beta <= 0.0 || c <= 0.0) return 1;
  const double beta2 = beta * beta;
  // c^2 beta2^{M+1} / (1 - beta2) < kTailBound
  const double rhs = kTailBound * (1.0 - beta2) / (c * c);
  if (rhs >= 1.0) return 1;
  const double m = std::log(rhs) / std::log(beta2);
  if (!std::isfinite(m) || m >= static_cast<double>(kMaxHorizon)) return kMaxHorizon;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(m)));
}

double eval_time_domain_infinite(const ParamSet& truth, const OrderedParams& candidate) {
  require_stable_candidate(candidate);
  const std::size_t horizon = infinite_horizon(truth, candidate);
  double acc = 0.0;
  std::vector<Complex> truth_pow(truth.size(), Complex(1.0, 0.0));
  std::vector<Complex> cand_pow(candidate.size(), Complex(1.0, 0.0));
  for (std::size_t n = 0; n <= horizon; ++n) {
    Complex diff(0.0, 0.0);
    for (std::size_t k = 0; k < candidate.size(); ++k) {
      diff += candidate.entries()[k].gain * cand_pow[k];
      cand_pow[k] *= candidate.entries()[k].pole;
    }
    for (std::size_t k = 0; k < truth.size(); ++k) {
      diff -= truth.pairs()[k].gain * truth_pow[k];
      truth_pow[k] *= truth.pairs()[k].pole;
    }
    acc += std::norm(diff);
  }
  return acc;
}

double eval_time_domain_data(const Objective& obj, const OrderedParams& candidate,
                             const Sequence& x, const Sequence& y) {
  (void)obj;
  const std::size_t n = std::min(x.size(), y.size());
  const Sequence h = impulse_response(candidate, n);
  const Sequence fit = convolve(h, x);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::norm(y[i] - fit[i]);
  return acc;
}

double eval_freq_quadrature(const Objective& obj, const OrderedParams& candidate) {
  require_stable_candidate(candidate);
  double acc = 0.0;
  for (int j = 0; j < kQuadraturePoints; ++j) {
    const double w = quadrature_omega(j);
    const Complex h_truth = dtft(obj.ground_truth(), w);
    const Complex h_cand = dtft(candidate, w);
    if (obj.kind() == ObjectiveKind::FreqMse) {
      acc += std::norm(h_cand - h_truth);
    } else {
      acc += std::norm(Complex(1.0, 0.0) - h_cand / h_truth);
    }
  }
  return acc / kQuadraturePoints;
}

Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& m, const std::vector<int>& subset) {
  Eigen::MatrixXd out(subset.size(), subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for (std::size_t j = 0; j < subset.size(); ++j) {
      out(i, j) = m(subset[i], subset[j]);
    }
  }
  return out;
}

HessianReport report_from_matrix(Eigen::MatrixXd h) {
  HessianReport report;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  report.eigen_min = eig.eigenvalues().minCoeff();
  report.eigen_max = eig.eigenvalues().maxCoeff();
  report.matrix = std::move(h);
  if (report.eigen_min > kCondFiniteTol * std::abs(report.eigen_max)) {
    report.condition_finite = true;
    report.condition = report.eigen_max / report.eigen_min;
  }
  return report;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Objective::Objective(ObjectiveKind kind, ParamSet truth) : kind_(kind), truth_(std::move(truth)) {}

Objective Objective::time_domain(ParamSet truth) {
  if (truth.max_pole_magnitude() >= 1.0) {
    throw UnstablePole("time_domain: infinite-horizon objective needs a stable ground truth");
  }
  return Objective(ObjectiveKind::TimeDomain, std::move(truth));
}

Objective Objective::time_domain(ParamSet truth, Sequence x, Sequence y) {
  Objective obj(ObjectiveKind::TimeDomain, std::move(truth));
  obj.data_.emplace(std::move(x), std::move(y));
  return obj;
}

Objective Objective::freq_mse(ParamSet truth) {
  if (truth.max_pole_magnitude() >= 1.0) {
    throw UnstablePole("freq_mse: ground-truth poles must be inside the unit circle");
  }
  return Objective(ObjectiveKind::FreqMse, std::move(truth));
}

Objective Objective::equalization_ratio(ParamSet truth) {
  if (truth.max_pole_magnitude() >= 1.0) {
    throw UnstablePole("equalization_ratio: ground-truth poles must be inside the unit circle");
  }
  Objective obj(ObjectiveKind::EqualizationRatio, std::move(truth));
  for (int j = 0; j < kQuadraturePoints; ++j) {
    if (std::abs(dtft(obj.truth_, quadrature_omega(j))) < kMinTruthResponse) {
      throw ZeroFrequencyResponse(
          "equalization_ratio: |H| falls below 1e-9 on the quadrature grid");
    }
  }
  return obj;
}

Objective Objective::weighted_freq(ParamSet truth, std::function<double(double)> weight) {
  if (truth.max_pole_magnitude() >= 1.0) {
    throw UnstablePole("weighted_freq: ground-truth poles must be inside the unit circle");
  }
  if (!weight) throw std::invalid_argument("weighted_freq: weight function required");
  Objective obj(ObjectiveKind::WeightedFreq, std::move(truth));
  obj.weight_ = std::move(weight);
  return obj;
}

Objective Objective::two_pole(double c, double d) {
  if (!(c > 0.0 && c < 1.0 && d > 0.0 && d < 1.0)) {
    throw DomainError("two_pole: c and d must lie in (0, 1)");
  }
  return Objective(ObjectiveKind::TwoPoleClosedForm,
                   ParamSet({{Complex(1.0, 0.0), Complex(c, 0.0)},
                             {Complex(1.0, 0.0), Complex(d, 0.0)}}));
}

std::size_t Objective::dimension() const {
  return kind_ == ObjectiveKind::TwoPoleClosedForm ? 2 : 4 * truth_.size();
}

double eval_objective(const Objective& obj, const OrderedParams& candidate) {
  if (obj.kind() != ObjectiveKind::TwoPoleClosedForm &&
      candidate.size() != obj.ground_truth().size()) {
    throw std::invalid_argument("eval_objective: candidate length must match ground-truth K");
  }
  switch (obj.kind()) {
    case ObjectiveKind::TimeDomain:
      if (obj.data().has_value()) {
        return eval_time_domain_data(obj, candidate, obj.data()->first, obj.data()->second);
      }
      return eval_time_domain_infinite(obj.ground_truth(), candidate);
    case ObjectiveKind::FreqMse:
    case ObjectiveKind::EqualizationRatio:
      return eval_freq_quadrature(obj, candidate);
    case ObjectiveKind::WeightedFreq: {
      require_stable_candidate(candidate);
      double acc = 0.0;
      for (int j = 0; j < kQuadraturePoints; ++j) {
        const double w = quadrature_omega(j);
        acc += obj.weight_(w) * std::norm(dtft(candidate, w) - dtft(obj.ground_truth(), w));
      }
      return acc / kQuadraturePoints;
    }
    case ObjectiveKind::TwoPoleClosedForm: {
      if (candidate.size() != 2) {
        throw std::invalid_argument("eval_objective: two-pole candidate must have two terms");
      }
      for (const auto& gp : candidate.entries()) {
        if (gp.gain != Complex(1.0, 0.0) || std::abs(gp.pole.imag()) > 1e-12) {
          throw DomainError("eval_objective: two-pole candidates have unit gains and real poles");
        }
      }
      const double c = obj.ground_truth().pairs()[0].pole.real();
      const double d = obj.ground_truth().pairs()[1].pole.real();
      return two_pole_f(candidate.entries()[0].pole.real(), candidate.entries()[1].pole.real(),
                        c, d);
    }
  }
  throw std::logic_error("eval_objective: unhandled kind");
}

Eigen::VectorXd objective_coords(const Objective& obj, const OrderedParams& params,
                                 CoordSystem cs) {
  if (obj.kind() == ObjectiveKind::TwoPoleClosedForm) {
    if (params.size() != 2) {
      throw std::invalid_argument("objective_coords: two-pole point must have two terms");
    }
    Eigen::VectorXd v(2);
    v << params.entries()[0].pole.real(), params.entries()[1].pole.real();
    return v;
  }
  return cs == CoordSystem::Cartesian ? params.cartesian() : params.polar();
}

OrderedParams objective_params(const Objective& obj, const Eigen::VectorXd& coords,
                               CoordSystem cs) {
  if (obj.kind() == ObjectiveKind::TwoPoleClosedForm) {
    if (coords.size() != 2) {
      throw std::invalid_argument("objective_params: two-pole coordinates have dimension 2");
    }
    return OrderedParams({{Complex(1.0, 0.0), Complex(coords[0], 0.0)},
                          {Complex(1.0, 0.0), Complex(coords[1], 0.0)}});
  }
  return cs == CoordSystem::Cartesian ? OrderedParams::from_cartesian(coords)
                                      : OrderedParams::from_polar(coords);
}

nlohmann::json hessian_report_to_json(const HessianReport& report) {
  nlohmann::json matrix = nlohmann::json::array();
  for (Eigen::Index i = 0; i < report.matrix.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < report.matrix.cols(); ++j) row.push_back(report.matrix(i, j));
    matrix.push_back(row);
  }
  nlohmann::json j{{"matrix", matrix},
                   {"eigen_min", report.eigen_min},
                   {"eigen_max", report.eigen_max},
                   {"condition_finite", report.condition_finite}};
  j["condition"] = report.condition_finite ? nlohmann::json(report.condition) : nlohmann::json();
  if (report.gamma) j["gamma"] = *report.gamma;
  if (report.det_half) j["D"] = *report.det_half;
  if (report.trace_half) j["T"] = *report.trace_half;
  return j;
}

double two_pole_f(double x, double y, double c, double d) {
  for (double arg : {x, y, c, d}) {
    if (!(std::abs(arg) < 1.0)) {
      throw DomainError("two_pole_f: all arguments must satisfy |arg| < 1");
    }
  }
  const auto s = [](double a, double b) { return 1.0 / (1.0 - a * b); };
  return s(x, x) + s(y, y) + s(c, c) + s(d, d) + 2.0 * s(x, y) + 2.0 * s(c, d) -
         2.0 * s(x, c) - 2.0 * s(x, d) - 2.0 * s(y, c) - 2.0 * s(y, d);
}

HessianReport two_pole_hessian(double c, double d) {
  if (!(c > 0.0 && c < 1.0 && d > 0.0 && d < 1.0)) {
    throw DomainError("two_pole_hessian: c and d must lie in (0, 1)");
  }
  // <u_a, u_b> = sum (n+1)^2 (ab)^n = (1 + ab) / (1 - ab)^3 for u_a[n] = (n+1) a^n.
  const auto inner = [](double a, double b) {
    const double t = a * b;
    const double omt = 1.0 - t;
    return (1.0 + t) / (omt * omt * omt);
  };
  const double ucc = inner(c, c);
  const double udd = inner(d, d);
  const double ucd = inner(c, d);

  HessianReport report;
  report.matrix = Eigen::MatrixXd(2, 2);
  report.matrix << 2.0 * ucc, 2.0 * ucd, 2.0 * ucd, 2.0 * udd;

  const double det_half = ucc * udd - ucd * ucd;  // 0 exactly iff c == d
  const double trace_half = ucc + udd;
  const double gamma = std::sqrt(std::max(0.0, 1.0 - 4.0 * det_half / (trace_half * trace_half)));
  report.det_half = det_half;
  report.trace_half = trace_half;
  report.gamma = gamma;
  report.eigen_min = trace_half * (1.0 - gamma);
  report.eigen_max = trace_half * (1.0 + gamma);
  if (1.0 - gamma > kCondFiniteTol) {
    report.condition_finite = true;
    report.condition = (1.0 + gamma) / (1.0 - gamma);
  }
  return report;
}

HessianReport numerical_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& point, double step) {
  if (step <= 0.0) throw std::invalid_argument("numerical_hessian: step must be > 0");
  const auto eval = [&](const Eigen::VectorXd& v) {
    const double value = f(v);
    if (!std::isfinite(value)) {
      throw NonFiniteValue("numerical_hessian: non-finite stencil evaluation");
    }
    return value;
  };

  const Eigen::Index dim = point.size();
  Eigen::MatrixXd h(dim, dim);
  const double f0 = eval(point);
  for (Eigen::Index i = 0; i < dim; ++i) {
    Eigen::VectorXd up = point, down = point;
    up[i] += step;
    down[i] -= step;
    h(i, i) = (eval(up) - 2.0 * f0 + eval(down)) / (step * step);
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      Eigen::VectorXd pp = point, pm = point, mp = point, mm = point;
      pp[i] += step; pp[j] += step;
      pm[i] += step; pm[j] -= step;
      mp[i] -= step; mp[j] += step;
      mm[i] -= step; mm[j] -= step;
      const double mixed = (eval(pp) - eval(pm) - eval(mp) + eval(mm)) / (4.0 * step * step);
      h(i, j) = mixed;
      h(j, i) = mixed;
    }
  }
  return report_from_matrix(0.5 * (h + h.transpose()));
}

HessianReport numerical_hessian(const Objective& obj, const OrderedParams& point, double step) {
  const auto f = [&](const Eigen::VectorXd& v) {
    return eval_objective(obj, objective_params(obj, v));
  };
  return numerical_hessian(f, objective_coords(obj, point), step);
}

double midpoint_gap(const Objective& obj, const OrderedParams& ordering,
                    const std::vector<std::size_t>& perm, double lambda, CoordSystem cs) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("midpoint_gap: lambda must lie in (0, 1)");
  }
  bool identity = true;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    if (perm[k] != k) {
      identity = false;
      break;
    }
  }
  if (identity) {
    throw IdentityPermutation("midpoint_gap: permutation must move at least one entry");
  }
  const OrderedParams permuted = ordering.permuted(perm);
  const Eigen::VectorXd mix = lambda * objective_coords(obj, ordering, cs) +
                              (1.0 - lambda) * objective_coords(obj, permuted, cs);
  return eval_objective(obj, objective_params(obj, mix, cs));
}

RestrictionBound restriction_condition_bound(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& point,
    const std::vector<int>& coord_subset, double step) {
  if (coord_subset.empty()) {
    throw std::invalid_argument("restriction_condition_bound: empty coordinate subset");
  }
  for (int idx : coord_subset) {
    if (idx < 0 || idx >= point.size()) {
      throw std::invalid_argument("restriction_condition_bound: coordinate index out of range");
    }
  }
  RestrictionBound bound;
  bound.full = numerical_hessian(f, point, step);
  if (bound.full.eigen_min < -1e-6 * std::abs(bound.full.eigen_max)) {
    throw NotPSD("restriction_condition_bound: full Hessian is not PSD within tolerance");
  }
  bound.restricted = report_from_matrix(principal_submatrix(bound.full.matrix, coord_subset));
  return bound;
}

RestrictionBound restriction_condition_bound(const Objective& obj, const OrderedParams& point,
                                             const std::vector<int>& coord_subset, double step) {
  const auto f = [&](const Eigen::VectorXd& v) {
    return eval_objective(obj, objective_params(obj, v));
  };
  return restriction_condition_bound(f, objective_coords(obj, point), coord_subset, step);
}

LossSurfaceGrid surface_grid(const Objective& obj, const SurfaceAxis& axis_x,
                             const SurfaceAxis& axis_y, const OrderedParams& fixed) {
  const auto axis_values = [](const SurfaceAxis& axis) {
    if (axis.step <= 0.0 || axis.hi < axis.lo) {
      throw std::invalid_argument("surface_grid: bad axis range");
    }
    const auto count = static_cast<std::size_t>(std::floor((axis.hi - axis.lo) / axis.step + 0.5)) + 1;
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) values[i] = axis.lo + static_cast<double>(i) * axis.step;
    return values;
  };

  LossSurfaceGrid grid;
  grid.xs = axis_values(axis_x);
  grid.ys = axis_values(axis_y);
  const Eigen::VectorXd base = objective_coords(obj, fixed);
  if (axis_x.coord_index < 0 || axis_x.coord_index >= base.size() || axis_y.coord_index < 0 ||
      axis_y.coord_index >= base.size() || axis_x.coord_index == axis_y.coord_index) {
    throw std::invalid_argument("surface_grid: bad coordinate indices");
  }
  grid.values = Eigen::MatrixXd::Constant(grid.ys.size(), grid.xs.size(),
                                          std::numeric_limits<double>::quiet_NaN());
  for (std::size_t iy = 0; iy < grid.ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < grid.xs.size(); ++ix) {
      Eigen::VectorXd v = base;
      v[axis_x.coord_index] = grid.xs[ix];
      v[axis_y.coord_index] = grid.ys[iy];
      try {
        const double value = eval_objective(obj, objective_params(obj, v));
        if (std::isfinite(value)) grid.values(iy, ix) = value;
      } catch (const Error&) {
        // out-of-domain cell stays missing
      }
    }
  }
  if (obj.kind() == ObjectiveKind::TwoPoleClosedForm) {
    const double c = obj.ground_truth().pairs()[0].pole.real();
    const double d = obj.ground_truth().pairs()[1].pole.real();
    grid.optima.push_back({c, d});
    if (c != d) grid.optima.push_back({d, c});
  }
  return grid;
}

void write_surface_csv(const LossSurfaceGrid& grid, std::ostream& out) {
  out << "x,y,f\n";
  for (std::size_t iy = 0; iy < grid.ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < grid.xs.size(); ++ix) {
      const double v = grid.values(iy, ix);
      out << format_double(grid.xs[ix]) << ',' << format_double(grid.ys[iy]) << ',';
      if (std::isfinite(v)) out << format_double(v);
      out << '\n';
    }
  }
}

}  // namespace polebench::landscape
