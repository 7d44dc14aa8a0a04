#pragma once

#include <span>
#include <utility>

#include "cenal/data.hpp"
#include "cenal/network.hpp"

namespace cenal::losses {

struct LossBreakdown {
  double censored_nll = 0.0;
  double observed_nll = 0.0;
  double bce = 0.0;
  double total = 0.0;  // always the exact sum of the three components
};

/// Gradient of a per-sample loss with respect to the head parameters.  The
/// lambda component is taken with respect to the pre-squash logit, which is
/// also how the BCE itself is computed.
struct LossGrad5 {
  double d_mu_star = 0.0;
  double d_sigma_star = 0.0;
  double d_mu_obs = 0.0;
  double d_sigma_obs = 0.0;
  double d_lambda_logit = 0.0;
};

/// A differentiable per-sample training objective.
class PerSampleLoss {
 public:
  virtual ~PerSampleLoss() = default;
  virtual double value(const nn::HeadOutput& h, const data::CensoredSample& s) const = 0;
  virtual LossGrad5 grad(const nn::HeadOutput& h, const data::CensoredSample& s) const = 0;
};

/// Right-censored NLL on the true head: -log phi for uncensored samples,
/// -log(1 - Phi) at the recorded threshold for censored ones.
double censored_nll_term(const nn::HeadOutput& h, const data::CensoredSample& s);

/// Plain Gaussian NLL of y under the observed head, censored or not.
double observed_nll_term(const nn::HeadOutput& h, const data::CensoredSample& s);

/// Binary cross entropy of the censoring indicator, computed on logits.
double bce_term(const nn::HeadOutput& h, const data::CensoredSample& s);

/// Batch means of the three terms; total is their sum.
LossBreakdown total_loss(
    std::span<const std::pair<nn::HeadOutput, data::CensoredSample>> batch);

class CensoredNll final : public PerSampleLoss {
 public:
  double value(const nn::HeadOutput& h, const data::CensoredSample& s) const override;
  LossGrad5 grad(const nn::HeadOutput& h, const data::CensoredSample& s) const override;
};

class ObservedNll final : public PerSampleLoss {
 public:
  double value(const nn::HeadOutput& h, const data::CensoredSample& s) const override;
  LossGrad5 grad(const nn::HeadOutput& h, const data::CensoredSample& s) const override;
};

class CensoringBce final : public PerSampleLoss {
 public:
  double value(const nn::HeadOutput& h, const data::CensoredSample& s) const override;
  LossGrad5 grad(const nn::HeadOutput& h, const data::CensoredSample& s) const override;
};

/// The training objective: censored NLL + observed NLL + BCE, unit weights.
class TotalLoss final : public PerSampleLoss {
 public:
  double value(const nn::HeadOutput& h, const data::CensoredSample& s) const override;
  LossGrad5 grad(const nn::HeadOutput& h, const data::CensoredSample& s) const override;
};

}  // namespace cenal::losses
