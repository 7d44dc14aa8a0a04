#include "cenal/losses.hpp"

#include <cmath>
#include <limits>

#include "cenal/errors.hpp"
#include "cenal/prob.hpp"

namespace cenal::losses {

namespace {

// d/dz of -log(1 - Phi(z)) is the hazard phi(z)/(1 - Phi(z)); evaluated as
// exp(log phi - log survival) so it stays finite far into the tail.
double std_normal_hazard(double z) {
  return std::exp(prob::std_normal_log_pdf(z) - prob::std_normal_log_survival(z));
}

}  // namespace

double censored_nll_term(const nn::HeadOutput& h, const data::CensoredSample& s) {
  const double z = (s.y - h.mu_star) / h.sigma_star;
  if (s.uncensored) {
    return std::log(h.sigma_star) + prob::kLogSqrt2Pi + 0.5 * z * z;
  }
  return -prob::std_normal_log_survival(z);
}

double observed_nll_term(const nn::HeadOutput& h, const data::CensoredSample& s) {
  const double z = (s.y - h.mu_obs) / h.sigma_obs;
  return std::log(h.sigma_obs) + prob::kLogSqrt2Pi + 0.5 * z * z;
}

double bce_term(const nn::HeadOutput& h, const data::CensoredSample& s) {
  // softplus(logit) - l*logit == -[l ln(lambda) + (1-l) ln(1-lambda)]
  const double logit = h.lambda_logit;
  const double target = s.uncensored ? 1.0 : 0.0;
  if (std::isinf(logit)) {
    // Degenerate lambda in {0,1}: zero loss when it matches the label.
    const bool match = (logit > 0.0) == s.uncensored;
    return match ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return prob::softplus(logit) - target * logit;
}

LossBreakdown total_loss(
    std::span<const std::pair<nn::HeadOutput, data::CensoredSample>> batch) {
  if (batch.empty()) throw ConfigError("total_loss: empty batch");
  LossBreakdown b;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& [h, s] = batch[i];
    const double c = censored_nll_term(h, s);
    const double o = observed_nll_term(h, s);
    const double e = bce_term(h, s);
    if (!std::isfinite(c) || !std::isfinite(o) || !std::isfinite(e)) {
      throw TrainingError("total_loss: non-finite term", static_cast<std::ptrdiff_t>(i));
    }
    b.censored_nll += c;
    b.observed_nll += o;
    b.bce += e;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  b.censored_nll *= inv;
  b.observed_nll *= inv;
  b.bce *= inv;
  b.total = b.censored_nll + b.observed_nll + b.bce;
  return b;
}

double CensoredNll::value(const nn::HeadOutput& h, const data::CensoredSample& s) const {
  return censored_nll_term(h, s);
}

LossGrad5 CensoredNll::grad(const nn::HeadOutput& h, const data::CensoredSample& s) const {
  LossGrad5 g;
  const double sig = h.sigma_star;
  const double z = (s.y - h.mu_star) / sig;
  if (s.uncensored) {
    g.d_mu_star = -z / sig;
    g.d_sigma_star = (1.0 - z * z) / sig;
  } else {
    const double hz = std_normal_hazard(z);
    g.d_mu_star = -hz / sig;
    g.d_sigma_star = -hz * z / sig;
  }
  return g;
}

double ObservedNll::value(const nn::HeadOutput& h, const data::CensoredSample& s) const {
  return observed_nll_term(h, s);
}

LossGrad5 ObservedNll::grad(const nn::HeadOutput& h, const data::CensoredSample& s) const {
  LossGrad5 g;
  const double sig = h.sigma_obs;
  const double z = (s.y - h.mu_obs) / sig;
  g.d_mu_obs = -z / sig;
  g.d_sigma_obs = (1.0 - z * z) / sig;
  return g;
}

double CensoringBce::value(const nn::HeadOutput& h, const data::CensoredSample& s) const {
  return bce_term(h, s);
}

LossGrad5 CensoringBce::grad(const nn::HeadOutput& h, const data::CensoredSample& s) const {
  LossGrad5 g;
  g.d_lambda_logit = h.lambda - (s.uncensored ? 1.0 : 0.0);
  return g;
}

double TotalLoss::value(const nn::HeadOutput& h, const data::CensoredSample& s) const {
  return censored_nll_term(h, s) + observed_nll_term(h, s) + bce_term(h, s);
}

LossGrad5 TotalLoss::grad(const nn::HeadOutput& h, const data::CensoredSample& s) const {
  const LossGrad5 a = CensoredNll{}.grad(h, s);
  const LossGrad5 b = ObservedNll{}.grad(h, s);
  const LossGrad5 c = CensoringBce{}.grad(h, s);
  LossGrad5 g;
  g.d_mu_star = a.d_mu_star;
  g.d_sigma_star = a.d_sigma_star;
  g.d_mu_obs = b.d_mu_obs;
  g.d_sigma_obs = b.d_sigma_obs;
  g.d_lambda_logit = c.d_lambda_logit;
  return g;
}

}  // namespace cenal::losses
