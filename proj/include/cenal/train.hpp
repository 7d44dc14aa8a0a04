#pragma once

#include <cstdint>
#include <vector>

#include "cenal/data.hpp"
#include "cenal/losses.hpp"
#include "cenal/network.hpp"

namespace cenal::nn {

struct TrainConfig {
  std::size_t max_epochs = 1000;
  /// Stop once the count of consecutive non-improving validation epochs
  /// reaches patience (0 stops after the first evaluation).
  std::size_t patience = 20;
  /// 0 selects the default policy: full batch up to 1024 training samples,
  /// minibatches of 256 beyond that.
  std::size_t batch_size = 0;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

/// One bias-corrected Adam update, in place.  Throws TrainingError on a
/// non-finite gradient.
void adam_step(Weights& w, const std::vector<double>& g, AdamState& state,
               const TrainConfig& cfg);

struct BatchGrad {
  std::vector<double> grad;  // flat, same layout as Weights::params
  double loss = 0.0;         // mean per-sample loss
};

/// Exact reverse-mode gradient of the mean per-sample loss over the batch.
/// mask == nullptr differentiates the deterministic network.
BatchGrad grad_batch(const losses::PerSampleLoss& loss, const Weights& w,
                     const data::CensoredSample* const* batch, std::size_t n,
                     const DropoutMask* mask);

BatchGrad grad_batch(const losses::PerSampleLoss& loss, const Weights& w,
                     const data::Dataset& batch, const DropoutMask* mask);

/// Mean censored NLL of a dataset under the deterministic network.
double dataset_censored_nll(const Weights& w, const data::Dataset& d);

/// Adam on the total loss with early stopping on the validation censored
/// NLL (deterministic network); returns the best-validation snapshot.
/// With warm_start the optimization continues from the given weights (and
/// the snapshot can be the starting point itself if nothing improves);
/// otherwise training begins from a fresh seeded initialization.
Weights train(const data::Dataset& train_set, const data::Dataset& val_set,
              const NetworkConfig& net_cfg, const TrainConfig& train_cfg,
              const Weights* warm_start = nullptr);

}  // namespace cenal::nn
