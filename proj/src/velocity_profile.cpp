#include "gaitvibe/velocity_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <utility>

#include "gaitvibe/errors.hpp"

namespace gaitvibe
{

std::array<double, kProfileTerms> monomials(double u, double w)
{
  const double u2 = u * u, w2 = w * w;
  return {1.0,     u,          w,          u2,     u * w,  w2,         u2 * u, u2 * w,
          u * w2,  w2 * w,     u2 * u2,    u2 * u * w, u2 * w2, u * w2 * w, w2 * w2};
}

VelocityProfile VelocityProfile::constant(double v, Rect bounds, double v_min, double v_max)
{
  VelocityProfile p;
  p.coefficients[0] = v;
  p.bounds = bounds;
  p.v_min = v_min;
  p.v_max = v_max;
  return p;
}

Point2 VelocityProfile::normalize(Point2 p) const
{
  const double sx = bounds.width() > 0.0 ? bounds.width() : 1.0;
  const double sy = bounds.height() > 0.0 ? bounds.height() : 1.0;
  return {2.0 * (p.x - bounds.x_min) / sx - 1.0, 2.0 * (p.y - bounds.y_min) / sy - 1.0};
}

double VelocityProfile::raw(Point2 p) const
{
  const Point2 n = normalize(p);
  const auto m = monomials(n.x, n.y);
  double v = 0.0;
  for (int k = 0; k < kProfileTerms; ++k)
    v += coefficients[k] * m[k];
  return v;
}

double VelocityProfile::operator()(Point2 p) const
{
  return std::clamp(raw(bounds.clamp(p)), v_min, v_max);
}

double VelocityFit::ci_width(Point2 p) const
{
  const Point2 n = profile.normalize(p);
  const auto m = monomials(n.x, n.y);
  const Eigen::Map<const Eigen::VectorXd> a(m.data(), kProfileTerms);
  const double q = std::max(0.0, a.dot(covariance_unscaled * a));
  return 2.0 * 1.96 * residual_sigma * std::sqrt(q);
}

VelocityFit fit_velocity_profile(const std::vector<VelocitySample>& samples, Rect bounds,
                                 double v_min, double v_max)
{
  if (samples.size() < static_cast<std::size_t>(kProfileTerms))
    throw CalibrationError("velocity fit needs at least 15 samples, got " +
                           std::to_string(samples.size()));
  std::set<std::pair<double, double>> locations;
  for (const auto& s : samples)
    locations.insert({s.location.x, s.location.y});
  if (locations.size() < 5)
    throw CalibrationError("velocity samples cover " + std::to_string(locations.size()) +
                           " distinct locations, need 5");

  VelocityFit fit;
  fit.profile.bounds = bounds;
  fit.profile.v_min = v_min;
  fit.profile.v_max = v_max;

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd X(n, kProfileTerms);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const Point2 q = fit.profile.normalize(samples[i].location);
    const auto m = monomials(q.x, q.y);
    for (int k = 0; k < kProfileTerms; ++k)
      X(i, k) = m[k];
    y(i) = samples[i].v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  fit.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

  double lambda = 0.0;
  if (!(fit.condition_number <= kMaxConditionNumber))
  {
    lambda = kRidgeLambda;
    fit.ridge_fallback = true;
    fit.warnings.push_back("velocity design is ill-conditioned (cond " +
                           std::to_string(fit.condition_number) + "); ridge penalty 1e-6 applied");
  }

  // Solve (S^2 + lambda) c' = S U^T y in the SVD basis.
  const Eigen::VectorXd uty = svd.matrixU().transpose() * y;
  Eigen::VectorXd scaled(sv.size());
  Eigen::VectorXd inv_sq(sv.size());
  for (Eigen::Index k = 0; k < sv.size(); ++k)
  {
    const double den = sv(k) * sv(k) + lambda;
    scaled(k) = den > 0.0 ? sv(k) * uty(k) / den : 0.0;
    inv_sq(k) = den > 0.0 ? 1.0 / den : 0.0;
  }
  const Eigen::VectorXd c = svd.matrixV() * scaled;
  for (int k = 0; k < kProfileTerms; ++k)
    fit.profile.coefficients[k] = c(k);
  fit.covariance_unscaled = svd.matrixV() * inv_sq.asDiagonal() * svd.matrixV().transpose();

  const Eigen::VectorXd r = y - X * c;
  const double ssr = r.squaredNorm();
  fit.rmse = std::sqrt(ssr / static_cast<double>(n));
  const auto dof = n - kProfileTerms;
  fit.residual_sigma = dof > 0 ? std::sqrt(ssr / static_cast<double>(dof)) : fit.rmse;
  return fit;
}

} // namespace gaitvibe
