#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cenal/rng.hpp"

namespace cenal::nn {

enum class Activation { relu, gelu };

Activation activation_from_name(const std::string& name);
const char* activation_name(Activation a);

/// Head width is fixed: mu*, raw sigma*, mu, raw sigma, raw lambda.
inline constexpr std::size_t kHeadWidth = 5;

struct NetworkConfig {
  std::size_t input_dim = 1;
  std::size_t hidden_layers = 3;
  std::size_t hidden_units = 128;
  double dropout_p = 0.25;
  Activation activation = Activation::relu;
  std::uint64_t init_seed = 0;
};

/// Flat parameter vector with a per-layer (W row-major, then bias) layout;
/// the optimizer works on the flat view.
struct Weights {
  NetworkConfig cfg;
  std::vector<double> params;

  std::size_t layer_count() const { return cfg.hidden_layers + 1; }
  std::size_t rows(std::size_t layer) const;
  std::size_t cols(std::size_t layer) const;
  std::size_t w_offset(std::size_t layer) const;
  std::size_t b_offset(std::size_t layer) const;

  const double* w(std::size_t layer) const { return params.data() + w_offset(layer); }
  const double* b(std::size_t layer) const { return params.data() + b_offset(layer); }
};

/// Inverted-dropout keep scales for each hidden layer: 0 for dropped units,
/// 1/(1-p) for kept ones.  A mask is one posterior draw; it is held fixed
/// across all inputs scored within that draw.
struct DropoutMask {
  std::vector<std::vector<double>> scale;
  std::uint64_t draw_id = 0;
};

/// The five predictive parameters produced by one forward pass, plus the
/// raw head values needed for stable losses and exact gradients.
struct HeadOutput {
  double mu_star = 0.0;
  double sigma_star = 1.0;
  double mu_obs = 0.0;
  double sigma_obs = 1.0;
  double lambda = 0.5;

  double lambda_logit = 0.0;
  double raw_sigma_star = 0.0;
  double raw_sigma_obs = 0.0;

  static HeadOutput from_raw(const double raw[kHeadWidth]);
  /// Build from the five canonical parameters (tests, hand-made posteriors).
  static HeadOutput from_params(double mu_star, double sigma_star, double mu_obs,
                                double sigma_obs, double lambda);
};

/// T head outputs for one input, realizing draws theta ~ p(theta | D).
struct PosteriorPredictive {
  std::vector<HeadOutput> draws;
};

/// Deterministic fan-in-scaled uniform initialization.
Weights init_weights(const NetworkConfig& cfg);

DropoutMask sample_mask(const NetworkConfig& cfg, rng::RandomStream& rs,
                        std::uint64_t draw_id = 0);

/// The T consistent masks used for one acquisition step; deterministic in
/// seed and shared across every pool point of that step.
std::vector<DropoutMask> make_masks(const NetworkConfig& cfg, std::size_t T,
                                    std::uint64_t seed);

/// Forward pass.  mask == nullptr runs the deterministic expectation
/// network (inverted dropout needs no rescaling there).
HeadOutput forward(const Weights& w, const DropoutMask* mask, std::span<const double> x);

/// Per-layer buffers captured during a forward pass, for backprop.
struct ForwardTrace {
  std::vector<std::vector<double>> pre;   // pre-activation per layer
  std::vector<std::vector<double>> post;  // activation (after mask) per hidden layer
};

HeadOutput forward_traced(const Weights& w, const DropoutMask* mask,
                          std::span<const double> x, ForwardTrace& trace);

PosteriorPredictive posterior_with_masks(const Weights& w,
                                         const std::vector<DropoutMask>& masks,
                                         std::span<const double> x);

/// T draws with fresh consistent masks derived from seed.
PosteriorPredictive sample_posterior(const Weights& w, std::span<const double> x,
                                     std::size_t T, std::uint64_t seed);

}  // namespace cenal::nn
