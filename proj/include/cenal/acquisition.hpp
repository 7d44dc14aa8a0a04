#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cenal/network.hpp"
#include "cenal/rng.hpp"

namespace cenal::acq {

enum class Function { random = 0, entropy = 1, bald = 2, cbald = 3 };

const char* function_name(Function f);
Function function_from_name(const std::string& name);
/// Canonical ordering used for reports and seed derivation.
const std::vector<Function>& all_functions();

struct AcquisitionScore {
  std::size_t pool_index = 0;
  double score = 0.0;
  Function function = Function::random;
};

// Monte Carlo estimators for the censored-entropy objectives.  The sample
// streams are shared between the marginal and conditional terms (common
// random numbers), which makes the zero-disagreement case cancel exactly
// and cuts the estimator variance.

/// Per-draw entropy estimate: y-hat sampled from the observed head, the
/// integrand weighing log phi and log survival of the true head by lambda.
double censored_entropy_conditional(const nn::HeadOutput& h, std::size_t S,
                                    rng::RandomStream& rs);

/// Mixture entropy across draws: pooled y-hat samples, mixture densities
/// evaluated by log-sum-exp over per-draw log terms, mean-lambda weights.
double censored_entropy_marginal(const nn::PosteriorPredictive& pp, std::size_t S,
                                 rng::RandomStream& rs);

/// I[y; theta | l, x]: marginal minus mean conditional, common random numbers.
double mi_label(const nn::PosteriorPredictive& pp, std::size_t S, rng::RandomStream& rs);

/// I[l; theta | x]: closed form, H(mean lambda) - mean H(lambda_t).
double mi_censor(const nn::PosteriorPredictive& pp);

/// mi_label + mi_censor (computed as that sum).
double cbald_score(const nn::PosteriorPredictive& pp, std::size_t S,
                   rng::RandomStream& rs);

/// Uncensored BALD on the true head, stratified mixture samples with
/// common random numbers.
double bald_score(const nn::PosteriorPredictive& pp, std::size_t S,
                  rng::RandomStream& rs);

/// Total predictive variance of the true head (law of total variance,
/// population variance over draws).
double entropy_baseline_score(const nn::PosteriorPredictive& pp);

/// Scores one pool point with the given function; rs is the point's stream.
double score_point(Function f, const nn::PosteriorPredictive& pp, std::size_t S,
                   rng::RandomStream& rs);

/// Scores the whole pool with shared masks and per-point deterministic
/// streams derived from (seed, pool index).  Parallel and serial runs give
/// identical scores.
std::vector<AcquisitionScore> score_pool(const std::vector<std::vector<double>>& pool_x,
                                         const nn::Weights& w, Function f, std::size_t T,
                                         std::size_t S, std::uint64_t seed,
                                         unsigned threads = 1);

/// Indices of the k largest scores; ties broken by lowest pool index.
std::vector<std::size_t> select_top_k(const std::vector<AcquisitionScore>& scores,
                                      std::size_t k);

}  // namespace cenal::acq
