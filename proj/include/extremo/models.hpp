#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extremo/domain.hpp"

namespace extremo {

enum class Family {
  ISO_FRAC,            // C1 ||h||^a1 + C2 |u|^a2
  ISO_FRAC_GEO_ANISO,  // same with h replaced by T(c) R(phi) h, spatial dim 2
  AXIS_ANISO,          // sum_j C_j |h_j|^a_j + C_d |u|^a_d
  AXIS_ANISO_ROT,      // axis-anisotropic with rotated spatial axes, spatial dim 2
  TIME_SHIFTED,        // sum_i C_i |h_i - u tau_i|^a_i + C_d |u|^a_d
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct ParamInterval {
  double lo;
  double hi;
};

/// Parametric dependence-function (semivariogram) family with a named
/// parameter vector and per-parameter box constraints.
class DependenceModel {
 public:
  /// `dim` is the total lag dimension d (spatial dims + 1 time dim).
  /// Families with rotation fix the spatial dimension to 2 (d = 3).
  DependenceModel(Family family, int dim, std::vector<double> params);

  static int param_count(Family family, int dim);
  static std::vector<std::string> param_names(Family family, int dim);
  /// Default box constraints: C in [1e-3, 50], alpha in (0, 2] as [1e-3, 2],
  /// c in [1e-3, 50], phi in [0, pi/2), tau in [-5, 5].
  static std::vector<ParamInterval> default_box(Family family, int dim);

  Family family() const { return family_; }
  int dim() const { return dim_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<ParamInterval>& box() const { return box_; }
  void set_box(std::vector<ParamInterval> box);
  /// Same family/dim/box with a different parameter vector.
  DependenceModel with_params(std::vector<double> params) const;

  /// delta_theta(h, u), the dependence function at a full d-dim lag.
  double dependence(std::span<const double> lag) const;
  double dependence(const Lag& lag) const;

  std::string to_json() const;
  static DependenceModel from_json(const std::string& json_text);

 private:
  Family family_;
  int dim_;
  std::vector<double> params_;
  std::vector<std::string> names_;
  std::vector<ParamInterval> box_;
  void validate() const;
};

/// Open interval (lower, upper) with 0 < lower < upper <= infinity.
/// upper == infinity gives a ray set.
struct IntervalSet {
  double lower;
  double upper = std::numeric_limits<double>::infinity();

  bool is_ray() const { return !std::isfinite(upper); }
  bool operator==(const IntervalSet&) const = default;
};

/// Standard normal CDF via the complementary error function.
double norm_cdf(double x);
double norm_pdf(double x);

/// Phi(log(ratio)/sqrt(2 delta) + sqrt(delta/2)). delta = 0 is singular
/// unless ratio = 1, where the limit 1/2 is returned.
double tilde_phi(double delta, double ratio);

/// Bivariate exponent measure V2(h; y1, y2); infinite arguments are taken
/// as limits (V2(inf, y) = 1/y).
double exponent_measure_v2(double delta, double y1, double y2);

/// Extremogram rho_AB(h) of a Brown-Resnick process with dependence value
/// delta at the lag. Handles ray and bounded interval sets.
double true_extremogram(double delta, const IntervalSet& A, const IntervalSet& B);

/// 2 (1 - Phi(sqrt(delta/2))), the extremogram for A = B = (1, inf).
double tail_dependence(double delta);

/// Pairwise extremal coefficient 2 Phi(sqrt(delta/2)) in [1, 2].
double extremal_coefficient(double delta);

/// Exact conditional exceedance probability at finite threshold a:
/// P(X(h)/a in B | X(0)/a in A) from bivariate Frechet rectangle
/// probabilities.
double pre_asymptotic_extremogram(double delta, const IntervalSet& A,
                                  const IntervalSet& B, double threshold);

// Model-level wrappers; lag 0 with A = B returns 1 by convention.
double true_extremogram(const DependenceModel& model, std::span<const double> lag,
                        const IntervalSet& A, const IntervalSet& B);
double tail_dependence(const DependenceModel& model, std::span<const double> lag);
double extremal_coefficient(const DependenceModel& model, std::span<const double> lag);
double pre_asymptotic_extremogram(const DependenceModel& model,
                                  std::span<const double> lag, const IntervalSet& A,
                                  const IntervalSet& B, double threshold);

enum class LagNorm { L1, L2, LINF };
double lag_norm(std::span<const double> v, LagNorm norm = LagNorm::L2);

/// Checks the growth condition delta(v) >= C ||v_I||^alpha over all lags
/// v = (v_F, v_I) with v_F in `fixed_lags` and v_I in the integer ball of
/// the given radius (norm applies to v_I).
struct GrowthCheck {
  bool pass;
  Lag worst_lag;          // lag attaining the smallest margin
  double worst_margin;    // min of delta(v) - C ||v_I||^alpha
};
GrowthCheck check_variogram_growth(const DependenceModel& model, double C,
                                   double alpha, const std::vector<Coord>& fixed_lags,
                                   std::int64_t radius, LagNorm norm = LagNorm::L2);

}  // namespace extremo
