#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaitvibe/geometry.hpp"

namespace gaitvibe
{

inline constexpr int kProfileDegree = 4;
inline constexpr int kProfileTerms = 15;
inline constexpr double kDefaultVMin = 30.0;
inline constexpr double kDefaultVMax = 300.0;

// Monomial order, u and w being x and y mapped onto [-1, 1] over the bounds.
inline const std::array<const char*, kProfileTerms> kMonomialOrder = {
    "1",     "u",      "w",       "u^2",    "u*w", "w^2",     "u^3", "u^2*w",
    "u*w^2", "w^3",    "u^4",     "u^3*w",  "u^2*w^2", "u*w^3", "w^4"};

std::array<double, kProfileTerms> monomials(double u, double w);

/// Degree-4 bivariate polynomial wave-speed field over a floor rectangle.
struct VelocityProfile
{
  std::array<double, kProfileTerms> coefficients{};
  Rect bounds{0.0, 7.0, -1.0, 1.0};
  double v_min = kDefaultVMin;
  double v_max = kDefaultVMax;

  static VelocityProfile constant(double v, Rect bounds, double v_min = kDefaultVMin,
                                  double v_max = kDefaultVMax);

  Point2 normalize(Point2 p) const;
  // Polynomial value at p, no clamping.
  double raw(Point2 p) const;
  // Evaluates at p clamped into the bounds, then clamps to [v_min, v_max].
  double operator()(Point2 p) const;
};

struct VelocitySample
{
  Point2 location;
  double v = 0.0;
  int trial_id = 0;
  double strike_time = 0.0;
  int sensor_id = 0;
};

struct VelocityFit
{
  VelocityProfile profile;
  double rmse = 0.0;
  // Residual standard error and (X^T X + lambda I)^-1 for prediction intervals.
  double residual_sigma = 0.0;
  Eigen::MatrixXd covariance_unscaled;
  double condition_number = 0.0;
  bool ridge_fallback = false;
  std::vector<std::string> warnings;

  // Width of the 95% confidence interval of the fitted mean at p.
  double ci_width(Point2 p) const;
};

inline constexpr double kRidgeLambda = 1e-6;
inline constexpr double kMaxConditionNumber = 1e8;

// Least squares over the 15 monomials. Throws CalibrationError with fewer than
// 15 samples or fewer than 5 distinct locations; ill-conditioned designs get a
// 1e-6 ridge penalty and a warning.
VelocityFit fit_velocity_profile(const std::vector<VelocitySample>& samples, Rect bounds,
                                 double v_min = kDefaultVMin, double v_max = kDefaultVMax);

} // namespace gaitvibe
