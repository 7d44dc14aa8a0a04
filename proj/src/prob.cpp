#include "cenal/prob.hpp"

#include <limits>

namespace cenal::prob {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// log(Q(z)) for z >= 6 via the Laplace continued fraction of the Mills
// ratio R(z) = Q(z)/phi(z) = 1/(z + 1/(z + 2/(z + ...))).  24 levels are
// converged to double precision for z >= 6.
double log_upper_tail_cf(double z) noexcept {
  double t = z;
  for (int k = 24; k >= 1; --k) {
    t = z + static_cast<double>(k) / t;
  }
  // log Q = log phi + log R
  return -0.5 * z * z - kLogSqrt2Pi - std::log(t);
}

// Q(z) for z >= 0, exact enough in relative terms across the whole range.
double upper_tail(double z) noexcept {
  if (z <= 6.0) return 0.5 * std::erfc(z * kInvSqrt2);
  return std::exp(log_upper_tail_cf(z));
}

}  // namespace

double std_normal_log_pdf(double z) noexcept { return -kLogSqrt2Pi - 0.5 * z * z; }

double std_normal_log_survival(double z) noexcept {
  if (z < 0.0) {
    // Survival close to 1: log1p of the mirrored tail keeps full relative
    // accuracy, and the clamp keeps the result strictly negative once the
    // mirrored tail underflows (|z| beyond ~38.5).
    const double r = std::log1p(-upper_tail(-z));
    return std::fmin(r, -std::numeric_limits<double>::denorm_min());
  }
  if (z <= 6.0) return std::log(0.5 * std::erfc(z * kInvSqrt2));
  return log_upper_tail_cf(z);
}

double std_normal_log_cdf(double z) noexcept { return std_normal_log_survival(-z); }

double gaussian_log_pdf(double y, const GaussianParams& p) {
  if (!std::isfinite(y)) throw std::domain_error("gaussian_log_pdf: y must be finite");
  const double z = (y - p.mu) / p.sigma;
  return -std::log(p.sigma) - kLogSqrt2Pi - 0.5 * z * z;
}

double gaussian_log_survival(double y, const GaussianParams& p) {
  if (!std::isfinite(y)) throw std::domain_error("gaussian_log_survival: y must be finite");
  return std_normal_log_survival((y - p.mu) / p.sigma);
}

double gaussian_log_cdf(double y, const GaussianParams& p) {
  if (!std::isfinite(y)) throw std::domain_error("gaussian_log_cdf: y must be finite");
  return std_normal_log_cdf((y - p.mu) / p.sigma);
}

double binary_entropy(const BernoulliParam& p) {
  // Canonicalize on the larger of {p, 1-p}.  The complement of the larger
  // one is exact (Sterbenz), which makes H(p) == H(1-p) hold bitwise.
  const double big = std::fmax(p.lambda, 1.0 - p.lambda);
  const double small = 1.0 - big;
  double h = 0.0;
  if (big < 1.0) h -= big * std::log(big);
  if (small > 0.0) h -= small * std::log(small);
  return h;
}

double softplus(double x) noexcept {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double gaussian_entropy_closed_form(const GaussianParams& p) {
  return 0.5 + kLogSqrt2Pi + std::log(p.sigma);
}

}  // namespace cenal::prob
