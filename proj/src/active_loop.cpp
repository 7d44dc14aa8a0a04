#include "cenal/active_loop.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "cenal/errors.hpp"
#include "cenal/log.hpp"
#include "cenal/rng.hpp"

namespace cenal::loop {

void validate(const ExperimentConfig& cfg) {
  if (cfg.repetitions == 0) throw ConfigError("config: repetitions must be >= 1");
  if (cfg.functions.empty()) throw ConfigError("config: no acquisition functions");
  if (cfg.posterior_draws == 0) throw ConfigError("config: posterior_draws must be >= 1");
  if (cfg.mc_samples == 0) throw ConfigError("config: mc_samples must be >= 1");
  if (cfg.sizes.n0 == 0) throw ConfigError("config: n0 must be >= 1");
  if (cfg.sizes.val == 0 || cfg.sizes.test == 0) {
    throw ConfigError("config: val and test sizes must be >= 1");
  }
  if (cfg.steps * cfg.acquisition_size > cfg.sizes.pool) {
    throw ConfigError("config: steps * acquisition_size exceeds the pool");
  }
  if (cfg.source == ExperimentConfig::Source::csv && cfg.csv_path.empty()) {
    throw ConfigError("config: csv dataset needs a path");
  }
}

data::Dataset load_experiment_data(const ExperimentConfig& cfg) {
  if (cfg.source == ExperimentConfig::Source::synthetic) {
    // Train, pool and val come from the training distribution; the test
    // set is generated separately on the uniform extension so the fit is
    // evaluated across the whole input range.
    const std::size_t n = cfg.sizes.n0 + cfg.sizes.pool + cfg.sizes.val;
    return data::to_dataset(
        data::generate_synthetic(n, rng::derive(cfg.master_seed, {rng::tag::dataset})));
  }
  return data::load_csv(cfg.csv_path, cfg.schema, cfg.log_transform);
}

namespace {

std::vector<std::vector<double>> pool_features(const data::Dataset& pool,
                                               const data::FeatureTransform* tf) {
  std::vector<std::vector<double>> xs;
  xs.reserve(pool.size());
  for (const auto& s : pool) {
    xs.push_back(s.x);
    if (tf != nullptr) {
      for (std::size_t j = 0; j < xs.back().size(); ++j) {
        xs.back()[j] = (xs.back()[j] - tf->mean[j]) / tf->stddev[j];
      }
    }
  }
  return xs;
}

}  // namespace

RepetitionOutcome run_repetition(const ExperimentConfig& cfg, const data::Dataset& data,
                                 acq::Function function, std::size_t repetition) {
  validate(cfg);
  const std::uint64_t rep_seed =
      rng::derive(cfg.master_seed, {rng::tag::repetition, repetition});

  // Splits are derived from the repetition seed only, so all functions of
  // one repetition score against identical initial sets.
  data::SplitSizes split_sizes = cfg.sizes;
  const bool synthetic = cfg.source == ExperimentConfig::Source::synthetic;
  if (synthetic) split_sizes.test = 0;
  data::DatasetSplits splits = data::split(data, split_sizes, rep_seed);
  if (synthetic) {
    splits.test = data::to_dataset(data::generate_synthetic_test(
        cfg.sizes.test, rng::derive(rep_seed, {rng::tag::dataset, 2})));
  }
  data::Dataset& train_set = splits.train;
  data::Dataset& pool = splits.pool;

  const std::size_t input_dim = train_set.front().x.size();
  const std::uint64_t fn_tag = static_cast<std::uint64_t>(function);

  RepetitionOutcome out;
  out.curve.function = function;
  out.curve.repetition = repetition;

  nn::Weights model;
  data::FeatureTransform tf;
  bool tf_fitted = false;
  bool model_valid = false;

  for (std::size_t step = 0; step <= cfg.steps; ++step) {
    if (!model_valid) {
      // Step 0 seeds are function-independent (paired design); later steps
      // mix in the function so mask randomness does not leak across arms.
      const std::uint64_t model_seed =
          step == 0 ? rng::derive(rep_seed, {rng::tag::model, 0})
                    : rng::derive(rep_seed, {rng::tag::model, step, fn_tag});
      nn::NetworkConfig net = cfg.network;
      net.input_dim = input_dim;
      net.init_seed = model_seed;
      nn::TrainConfig tcfg = cfg.train;
      tcfg.seed = model_seed;

      const nn::Weights* warm =
          cfg.warm_start && step > 0 ? &model : nullptr;
      if (warm != nullptr) {
        tcfg.max_epochs = cfg.warm_epochs;
        tcfg.patience = cfg.warm_epochs;  // run the whole warm window
      }
      if (cfg.standardize) {
        // Warmed weights live in the step-0 feature space, so the
        // transform is frozen once when warm-starting.
        if (!tf_fitted || !cfg.warm_start) {
          tf = data::fit_standardizer(train_set);
          tf_fitted = true;
        }
        data::Dataset train_std = train_set;
        data::Dataset val_std = splits.val;
        tf.apply(train_std);
        tf.apply(val_std);
        model = nn::train(train_std, val_std, net, tcfg, warm);
      } else {
        model = nn::train(train_set, splits.val, net, tcfg, warm);
      }
      model_valid = true;
    }

    double nll = 0.0;
    if (cfg.standardize) {
      data::Dataset test_std = splits.test;
      tf.apply(test_std);
      nll = report::test_censored_nll(model, test_std);
    } else {
      nll = report::test_censored_nll(model, splits.test);
    }
    out.curve.points.push_back({step, train_set.size(), nll});

    if (step == cfg.steps) break;

    const auto xs = pool_features(pool, cfg.standardize ? &tf : nullptr);
    const std::uint64_t score_seed =
        rng::derive(rep_seed, {rng::tag::score, step, fn_tag});
    const auto scores = acq::score_pool(xs, model, function, cfg.posterior_draws,
                                        cfg.mc_samples, score_seed);
    auto picked = acq::select_top_k(scores, cfg.acquisition_size);

    // Move the acquired points (now revealing y and the indicator) from the
    // pool into the training set.
    std::sort(picked.begin(), picked.end(), std::greater<std::size_t>());
    for (std::size_t idx : picked) {
      train_set.push_back(pool[idx]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
    }
    if (!picked.empty()) model_valid = false;
  }

  if (cfg.score_profile && repetition == 0 && input_dim == 1 &&
      function != acq::Function::random) {
    const auto xs = pool_features(pool, cfg.standardize ? &tf : nullptr);
    const std::uint64_t score_seed =
        rng::derive(rep_seed, {rng::tag::score, cfg.steps, fn_tag});
    const auto scores = acq::score_pool(xs, model, function, cfg.posterior_draws,
                                        cfg.mc_samples, score_seed);
    out.profile.reserve(scores.size());
    for (const auto& sc : scores) {
      out.profile.push_back({function, pool[sc.pool_index].x[0], sc.score});
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned jobs,
                                const UnitFilter& filter, const UnitSink& sink) {
  validate(cfg);
  const data::Dataset data = load_experiment_data(cfg);

  struct Unit {
    acq::Function function;
    std::size_t repetition;
  };
  std::vector<Unit> units;
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    for (acq::Function f : cfg.functions) {
      if (!filter || filter(f, rep)) units.push_back({f, rep});
    }
  }

  ExperimentResult result;
  std::mutex mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= units.size()) return;
      const Unit u = units[i];
      RepetitionOutcome outcome;
      UnitStatus status;
      status.function = u.function;
      status.repetition = u.repetition;
      try {
        outcome = run_repetition(cfg, data, u.function, u.repetition);
        status.ok = true;
      } catch (const TrainingError& e) {
        status.ok = false;
        status.error = e.what();
        log::warn("repetition ", u.repetition, " (", acq::function_name(u.function),
                  ") failed: ", e.what());
      }
      std::lock_guard<std::mutex> lock(mu);
      if (status.ok) {
        result.curves.push_back(outcome.curve);
        result.profile.insert(result.profile.end(), outcome.profile.begin(),
                              outcome.profile.end());
      }
      result.statuses.push_back(status);
      if (sink) sink(outcome, status);
    }
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(units.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Canonical order regardless of completion order.
  auto unit_key = [](acq::Function f, std::size_t rep) {
    return std::pair<int, std::size_t>(static_cast<int>(f), rep);
  };
  std::sort(result.curves.begin(), result.curves.end(),
            [&](const LearningCurve& a, const LearningCurve& b) {
              return unit_key(a.function, a.repetition) < unit_key(b.function, b.repetition);
            });
  std::sort(result.statuses.begin(), result.statuses.end(),
            [&](const UnitStatus& a, const UnitStatus& b) {
              return unit_key(a.function, a.repetition) < unit_key(b.function, b.repetition);
            });
  return result;
}

}  // namespace cenal::loop
