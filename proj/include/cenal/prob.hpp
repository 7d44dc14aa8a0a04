#pragma once

#include <cmath>
#include <stdexcept>

namespace cenal::prob {

// Scale floor applied after softplus when a network head produces a
// standard deviation; keeps degenerate fits from dividing by ~0.
inline constexpr double kSigmaFloor = 1e-6;

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5*ln(2*pi)
inline constexpr double kLn2 = 0.69314718055994530942;

/// Location/scale of a Gaussian.  sigma must be finite and > 0.
struct GaussianParams {
  double mu;
  double sigma;

  GaussianParams(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || sigma <= 0.0) {
      throw std::domain_error("GaussianParams: sigma must be finite and positive");
    }
  }
};

/// Probability that an observation is uncensored, lambda in [0, 1].
struct BernoulliParam {
  double lambda;

  explicit BernoulliParam(double lambda_) : lambda(lambda_) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      throw std::domain_error("BernoulliParam: lambda must lie in [0, 1]");
    }
  }
};

// Standard-normal building blocks.  The survival tail goes through a Mills
// ratio continued fraction above z = 6; a naive 1 - Phi subtraction
// underflows there and would silence the censored loss term.
double std_normal_log_pdf(double z) noexcept;
double std_normal_log_survival(double z) noexcept;
double std_normal_log_cdf(double z) noexcept;

/// log N(y | mu, sigma^2) = -0.5*ln(2*pi*sigma^2) - (y-mu)^2 / (2*sigma^2).
double gaussian_log_pdf(double y, const GaussianParams& p);

/// log(1 - Phi((y-mu)/sigma)); finite and strictly negative for all finite
/// inputs, accurate deep into both tails.
double gaussian_log_survival(double y, const GaussianParams& p);

/// log Phi((y-mu)/sigma), the mirror of the survival routine.
double gaussian_log_cdf(double y, const GaussianParams& p);

/// Binary entropy in nats with the 0*ln(0) = 0 convention.
double binary_entropy(const BernoulliParam& p);

/// ln(1 + e^x), overflow-safe; strictly positive.
double softplus(double x) noexcept;

/// 1 / (1 + e^-x).
double logistic(double x) noexcept;

/// Differential entropy 0.5*ln(2*pi*e*sigma^2).
double gaussian_entropy_closed_form(const GaussianParams& p);

}  // namespace cenal::prob
