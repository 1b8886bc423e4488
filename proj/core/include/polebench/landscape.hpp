#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "polebench/signal.hpp"

namespace polebench::landscape {

enum class ObjectiveKind {
  TimeDomain,         // squared l2 distance between y and h~ * x (or between impulse
                      // responses over an effectively infinite horizon when no data is given)
  FreqMse,            // (1/2pi) integral |H~ - H|^2
  EqualizationRatio,  // (1/2pi) integral |1 - H~/H|^2
  WeightedFreq,       // (1/2pi) integral w(omega) |H~ - H|^2, w > 0
  TwoPoleClosedForm,  // f(x, y) = sum_n (x^n + y^n - c^n - d^n)^2 in closed form
};

/// A scalar objective over ordered candidate parameters, anchored to a
/// ground-truth parameter set. Zero exactly when the candidate equals the
/// truth as an unordered set (given enough data).
class Objective {
 public:
  /// Infinite-horizon impulse-response comparison; the truth must be stable.
  static Objective time_domain(ParamSet truth);
  /// Finite-data comparison d(y, h~ * x) over the first min-length samples.
  static Objective time_domain(ParamSet truth, Sequence x, Sequence y);
  static Objective freq_mse(ParamSet truth);
  /// Requires |H| bounded away from zero on the quadrature grid; throws
  /// ZeroFrequencyResponse otherwise.
  static Objective equalization_ratio(ParamSet truth);
  static Objective weighted_freq(ParamSet truth, std::function<double(double)> weight);
  /// Real two-pole example with unit gains and truth poles (c, d).
  static Objective two_pole(double c, double d);

  ObjectiveKind kind() const { return kind_; }
  const ParamSet& ground_truth() const { return truth_; }
  const std::optional<std::pair<Sequence, Sequence>>& data() const { return data_; }

  /// Coordinate dimension: 2 for the two-pole closed form, 4K otherwise.
  std::size_t dimension() const;

 private:
  Objective(ObjectiveKind kind, ParamSet truth);

  ObjectiveKind kind_;
  ParamSet truth_;
  std::optional<std::pair<Sequence, Sequence>> data_;
  std::function<double(double)> weight_;

  friend double eval_objective(const Objective&, const OrderedParams&);
};

double eval_objective(const Objective& obj, const OrderedParams& candidate);

/// Coordinate maps between ordered parameters and the real optimization
/// vector an objective is differentiated in. For the two-pole closed form the
/// coordinates are just the two real pole locations; otherwise they are the
/// 4K cartesian (or pole-polar) components.
enum class CoordSystem { Cartesian, Polar };

Eigen::VectorXd objective_coords(const Objective& obj, const OrderedParams& params,
                                 CoordSystem cs = CoordSystem::Cartesian);
OrderedParams objective_params(const Objective& obj, const Eigen::VectorXd& coords,
                               CoordSystem cs = CoordSystem::Cartesian);

/// Symmetric second-derivative snapshot. `condition` is only meaningful when
/// condition_finite; serialized output carries the flag, never an IEEE
/// infinity. det_half/trace_half/gamma are filled by the two-pole closed form.
struct HessianReport {
  Eigen::MatrixXd matrix;
  double eigen_min = 0.0;
  double eigen_max = 0.0;
  bool condition_finite = false;
  double condition = 0.0;
  std::optional<double> gamma;
  std::optional<double> det_half;
  std::optional<double> trace_half;
};

nlohmann::json hessian_report_to_json(const HessianReport& report);

/// Closed form of sum_{n>=0} (x^n + y^n - c^n - d^n)^2 via geometric sums
/// S(a,b) = 1/(1-ab). All arguments must lie strictly inside (-1, 1).
double two_pole_f(double x, double y, double c, double d);

/// Analytic Hessian of the two-pole objective at its optimum (c, d), with
/// D = det(H/2), T = tr(H/2), gamma = sqrt(1 - 4D/T^2) and
/// kappa = (1 + gamma)/(1 - gamma). Positive definite iff c != d; at c == d
/// the condition number is flagged infinite.
HessianReport two_pole_hessian(double c, double d);

/// Central-difference Hessian, symmetrized as (H + H^T)/2.
HessianReport numerical_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& point, double step);
HessianReport numerical_hessian(const Objective& obj, const OrderedParams& point, double step);

/// Objective value at the convex combination lambda * B_ord +
/// (1 - lambda) * perm(B_ord) taken in the requested coordinates. With
/// B_ord a global optimum and a non-identity permutation that moves at least
/// one pole, this is strictly positive: the segment between two equivalent
/// optima leaves the zero set.
double midpoint_gap(const Objective& obj, const OrderedParams& ordering,
                    const std::vector<std::size_t>& perm, double lambda,
                    CoordSystem cs = CoordSystem::Cartesian);

struct RestrictionBound {
  HessianReport full;
  HessianReport restricted;
};

/// Condition numbers of the full Hessian and of its principal submatrix on
/// `coord_subset` (the Hessian of the restriction of f to those coordinates).
/// The full Hessian must be PSD within tolerance; by eigenvalue interlacing
/// full kappa >= restricted kappa.
RestrictionBound restriction_condition_bound(const std::function<double(const Eigen::VectorXd&)>& f,
                                             const Eigen::VectorXd& point,
                                             const std::vector<int>& coord_subset, double step);
RestrictionBound restriction_condition_bound(const Objective& obj, const OrderedParams& point,
                                             const std::vector<int>& coord_subset, double step);

struct SurfaceAxis {
  int coord_index = 0;
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
};

struct LossSurfaceGrid {
  std::vector<double> xs;
  std::vector<double> ys;
  Eigen::MatrixXd values;  // values(iy, ix); NaN marks a missing cell
  std::vector<std::array<double, 2>> optima;
};

/// Dense objective slice over two coordinates, the rest held at `fixed`.
/// Non-finite or out-of-domain evaluations become missing cells.
LossSurfaceGrid surface_grid(const Objective& obj, const SurfaceAxis& axis_x,
                             const SurfaceAxis& axis_y, const OrderedParams& fixed);

/// CSV with header "x,y,f"; missing cells have an empty value field.
void write_surface_csv(const LossSurfaceGrid& grid, std::ostream& out);

}  // namespace polebench::landscape
