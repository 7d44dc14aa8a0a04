#include "cenal/acquisition.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "cenal/errors.hpp"
#include "cenal/kernels.hpp"
#include "cenal/prob.hpp"

namespace cenal::acq {

const char* function_name(Function f) {
  switch (f) {
    case Function::random: return "random";
    case Function::entropy: return "entropy";
    case Function::bald: return "bald";
    case Function::cbald: return "cbald";
  }
  return "?";
}

Function function_from_name(const std::string& name) {
  for (Function f : all_functions()) {
    if (name == function_name(f)) return f;
  }
  throw ConfigError("unknown acquisition function '" + name + "'");
}

const std::vector<Function>& all_functions() {
  static const std::vector<Function> fns{Function::random, Function::entropy,
                                         Function::bald, Function::cbald};
  return fns;
}

namespace {

// Reused per-thread buffers for the estimator matrices (T x T*S doubles).
struct Scratch {
  std::vector<double> samples;  // T*S pooled y-hat draws, draw-major
  std::vector<double> lp;       // per-draw log pdf rows
  std::vector<double> ls;       // per-draw log survival rows
  std::vector<double> lse_p;
  std::vector<double> lse_s;
  std::vector<double> cond;
};

thread_local Scratch tls_scratch;

// Draw-major sample matrix from the observed heads; the same stream order
// is used by the standalone conditional estimator, so shared-sample
// identities hold exactly.
void draw_samples(const nn::PosteriorPredictive& pp, std::size_t S,
                  rng::RandomStream& rs, std::vector<double>& out) {
  const std::size_t T = pp.draws.size();
  out.resize(T * S);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& h = pp.draws[t];
    for (std::size_t s = 0; s < S; ++s) {
      out[t * S + s] = rs.normal(h.mu_obs, h.sigma_obs);
    }
  }
}

double conditional_on_block(const nn::HeadOutput& h, const double* lp_row,
                            const double* ls_row, std::size_t S) {
  double acc = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    acc += h.lambda * lp_row[s] + (1.0 - h.lambda) * ls_row[s];
  }
  return -acc / static_cast<double>(S);
}

struct EntropyTerms {
  double marginal = 0.0;
  double mean_conditional = 0.0;
};

// Computes both censored-entropy terms on one shared sample matrix.
EntropyTerms censored_entropy_terms(const nn::PosteriorPredictive& pp, std::size_t S,
                                    rng::RandomStream& rs, Scratch& sc) {
  const std::size_t T = pp.draws.size();
  const std::size_t N = T * S;
  draw_samples(pp, S, rs, sc.samples);

  const auto& k = kernels::ops();
  sc.lp.resize(T * N);
  sc.ls.resize(T * N);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& h = pp.draws[t];
    k.gaussian_log_pdf(sc.samples.data(), N, h.mu_star, h.sigma_star,
                       sc.lp.data() + t * N);
    k.gaussian_log_survival(sc.samples.data(), N, h.mu_star, h.sigma_star,
                            sc.ls.data() + t * N);
  }

  double lambda_bar = 0.0;
  for (const auto& h : pp.draws) lambda_bar += h.lambda;
  lambda_bar /= static_cast<double>(T);

  EntropyTerms out;
  double cond_sum = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    cond_sum += conditional_on_block(pp.draws[t], sc.lp.data() + t * N + t * S,
                                     sc.ls.data() + t * N + t * S, S);
  }
  out.mean_conditional = cond_sum / static_cast<double>(T);

  if (T == 1) {
    // Degenerate mixture: the marginal is the conditional of the single
    // draw, bitwise.
    out.marginal = out.mean_conditional;
    return out;
  }

  sc.lse_p.resize(N);
  sc.lse_s.resize(N);
  k.logsumexp_cols(sc.lp.data(), T, N, sc.lse_p.data());
  k.logsumexp_cols(sc.ls.data(), T, N, sc.lse_s.data());
  const double log_t = std::log(static_cast<double>(T));
  double acc = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    acc += lambda_bar * (sc.lse_p[j] - log_t) + (1.0 - lambda_bar) * (sc.lse_s[j] - log_t);
  }
  out.marginal = -acc / static_cast<double>(N);
  return out;
}

void require_draws(const nn::PosteriorPredictive& pp) {
  if (pp.draws.empty()) throw ConfigError("posterior must hold at least one draw");
}

}  // namespace

double censored_entropy_conditional(const nn::HeadOutput& h, std::size_t S,
                                    rng::RandomStream& rs) {
  if (S == 0) throw ConfigError("censored_entropy_conditional: S must be >= 1");
  auto& sc = tls_scratch;
  sc.samples.resize(S);
  for (std::size_t s = 0; s < S; ++s) sc.samples[s] = rs.normal(h.mu_obs, h.sigma_obs);
  const auto& k = kernels::ops();
  sc.lp.resize(S);
  sc.ls.resize(S);
  k.gaussian_log_pdf(sc.samples.data(), S, h.mu_star, h.sigma_star, sc.lp.data());
  k.gaussian_log_survival(sc.samples.data(), S, h.mu_star, h.sigma_star, sc.ls.data());
  return conditional_on_block(h, sc.lp.data(), sc.ls.data(), S);
}

double censored_entropy_marginal(const nn::PosteriorPredictive& pp, std::size_t S,
                                 rng::RandomStream& rs) {
  require_draws(pp);
  if (S == 0) throw ConfigError("censored_entropy_marginal: S must be >= 1");
  return censored_entropy_terms(pp, S, rs, tls_scratch).marginal;
}

double mi_label(const nn::PosteriorPredictive& pp, std::size_t S, rng::RandomStream& rs) {
  require_draws(pp);
  if (S == 0) throw ConfigError("mi_label: S must be >= 1");
  const EntropyTerms t = censored_entropy_terms(pp, S, rs, tls_scratch);
  return t.marginal - t.mean_conditional;
}

double mi_censor(const nn::PosteriorPredictive& pp) {
  require_draws(pp);
  double lambda_bar = 0.0;
  double mean_h = 0.0;
  for (const auto& h : pp.draws) {
    lambda_bar += h.lambda;
    mean_h += prob::binary_entropy(prob::BernoulliParam(h.lambda));
  }
  const double t = static_cast<double>(pp.draws.size());
  lambda_bar /= t;
  mean_h /= t;
  return prob::binary_entropy(prob::BernoulliParam(lambda_bar)) - mean_h;
}

double cbald_score(const nn::PosteriorPredictive& pp, std::size_t S,
                   rng::RandomStream& rs) {
  return mi_label(pp, S, rs) + mi_censor(pp);
}

double bald_score(const nn::PosteriorPredictive& pp, std::size_t S,
                  rng::RandomStream& rs) {
  require_draws(pp);
  if (S == 0) throw ConfigError("bald_score: S must be >= 1");
  const std::size_t T = pp.draws.size();
  const std::size_t N = T * S;
  auto& sc = tls_scratch;

  // Stratified mixture samples: S per true-head component.
  sc.samples.resize(N);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& h = pp.draws[t];
    for (std::size_t s = 0; s < S; ++s) {
      sc.samples[t * S + s] = rs.normal(h.mu_star, h.sigma_star);
    }
  }
  const auto& k = kernels::ops();
  sc.lp.resize(T * N);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& h = pp.draws[t];
    k.gaussian_log_pdf(sc.samples.data(), N, h.mu_star, h.sigma_star, sc.lp.data() + t * N);
  }
  if (T == 1) return 0.0;

  sc.lse_p.resize(N);
  k.logsumexp_cols(sc.lp.data(), T, N, sc.lse_p.data());
  const double log_t = std::log(static_cast<double>(T));
  // Mean of log p_t(y) - log pbar(y) over each component's own samples:
  // the mixture entropy minus the mean component entropy, with the
  // component entropies estimated on the same samples so identical draws
  // cancel to zero.
  double acc = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double* lp_row = sc.lp.data() + t * N + t * S;
    const double* mix = sc.lse_p.data() + t * S;
    for (std::size_t s = 0; s < S; ++s) {
      acc += lp_row[s] - (mix[s] - log_t);
    }
  }
  return acc / static_cast<double>(N);
}

double entropy_baseline_score(const nn::PosteriorPredictive& pp) {
  require_draws(pp);
  const double t = static_cast<double>(pp.draws.size());
  double mean_mu = 0.0;
  for (const auto& h : pp.draws) mean_mu += h.mu_star;
  mean_mu /= t;
  double var_mu = 0.0;
  double mean_var = 0.0;
  for (const auto& h : pp.draws) {
    const double d = h.mu_star - mean_mu;
    var_mu += d * d;
    mean_var += h.sigma_star * h.sigma_star;
  }
  return var_mu / t + mean_var / t;
}

double score_point(Function f, const nn::PosteriorPredictive& pp, std::size_t S,
                   rng::RandomStream& rs) {
  switch (f) {
    case Function::random: return rs.uniform();
    case Function::entropy: return entropy_baseline_score(pp);
    case Function::bald: return bald_score(pp, S, rs);
    case Function::cbald: return cbald_score(pp, S, rs);
  }
  throw ConfigError("score_point: bad function");
}

std::vector<AcquisitionScore> score_pool(const std::vector<std::vector<double>>& pool_x,
                                         const nn::Weights& w, Function f, std::size_t T,
                                         std::size_t S, std::uint64_t seed,
                                         unsigned threads) {
  if (pool_x.empty()) throw ConfigError("score_pool: empty pool");
  std::vector<AcquisitionScore> scores(pool_x.size());

  const bool needs_model = f != Function::random;
  const std::vector<nn::DropoutMask> masks =
      needs_model ? nn::make_masks(w.cfg, T, rng::derive(seed, {rng::tag::masks}))
                  : std::vector<nn::DropoutMask>{};

  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      rng::RandomStream rs(rng::derive(seed, {rng::tag::point, i}));
      double value = 0.0;
      if (f == Function::random) {
        value = rs.uniform();
      } else {
        const nn::PosteriorPredictive pp = nn::posterior_with_masks(w, masks, pool_x[i]);
        value = score_point(f, pp, S, rs);
      }
      scores[i] = AcquisitionScore{i, value, f};
    }
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(pool_x.size())));
  if (workers == 1) {
    score_range(0, pool_x.size());
  } else {
    std::atomic<std::size_t> next{0};
    constexpr std::size_t kChunk = 64;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t begin = next.fetch_add(kChunk);
          if (begin >= pool_x.size()) return;
          score_range(begin, std::min(begin + kChunk, pool_x.size()));
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return scores;
}

std::vector<std::size_t> select_top_k(const std::vector<AcquisitionScore>& scores,
                                      std::size_t k) {
  if (k > scores.size()) throw ConfigError("select_top_k: k exceeds pool size");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].score != scores[b].score) return scores[a].score > scores[b].score;
    return scores[a].pool_index < scores[b].pool_index;
  });
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t i = 0; i < k; ++i) picked.push_back(scores[order[i]].pool_index);
  return picked;
}

}  // namespace cenal::acq
