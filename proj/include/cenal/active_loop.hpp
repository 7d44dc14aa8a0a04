#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cenal/acquisition.hpp"
#include "cenal/data.hpp"
#include "cenal/eval.hpp"
#include "cenal/network.hpp"
#include "cenal/train.hpp"

namespace cenal::loop {

/// Every protocol knob of one experiment; mirrors the JSON config.
struct ExperimentConfig {
  std::string dataset_id = "synthetic";
  enum class Source { synthetic, csv } source = Source::synthetic;

  // csv datasets
  std::string csv_path;
  data::CsvSchema schema;
  bool log_transform = true;
  bool standardize = false;

  data::SplitSizes sizes{10, 9000, 250, 500};
  std::size_t acquisition_size = 3;  // k
  std::size_t steps = 150;
  std::size_t repetitions = 50;
  std::vector<acq::Function> functions = acq::all_functions();
  std::size_t posterior_draws = 25;  // T
  std::size_t mc_samples = 64;       // S

  nn::NetworkConfig network;  // input_dim filled from the data
  nn::TrainConfig train;      // seed filled per training
  /// Continue optimizing the previous step's weights instead of retraining
  /// from a fresh initialization after each acquisition.
  bool warm_start = false;
  /// Fixed epoch budget for warm-started steps (no early stopping; the
  /// best-validation snapshot over the window, including the starting
  /// weights, is kept).
  std::size_t warm_epochs = 300;

  std::uint64_t master_seed = 1;
  /// For 1-D datasets, dump score-vs-x profiles from repetition 0.
  bool score_profile = false;
};

void validate(const ExperimentConfig& cfg);

/// Generates the synthetic set (n0+pool+val+test points) or loads the CSV.
data::Dataset load_experiment_data(const ExperimentConfig& cfg);

struct RepetitionOutcome {
  LearningCurve curve;
  std::vector<ProfileRow> profile;
};

/// One (function, repetition) unit: paired splits from the repetition seed,
/// a shared step-0 model seed across functions, fresh re-initialisation
/// per step, greedy top-k acquisition revealing y and the indicator.
/// Deterministic in (master_seed, repetition, function).
RepetitionOutcome run_repetition(const ExperimentConfig& cfg, const data::Dataset& data,
                                 acq::Function function, std::size_t repetition);

struct UnitStatus {
  acq::Function function = acq::Function::random;
  std::size_t repetition = 0;
  bool ok = false;
  std::string error;
};

struct ExperimentResult {
  std::vector<LearningCurve> curves;  // successful units only
  std::vector<ProfileRow> profile;
  std::vector<UnitStatus> statuses;   // every executed unit
};

/// Invoked (serialized) after each finished unit; used for incremental
/// persistence.
using UnitSink =
    std::function<void(const RepetitionOutcome& outcome, const UnitStatus& status)>;
/// Returns false to skip a unit (resume support).
using UnitFilter = std::function<bool(acq::Function, std::size_t repetition)>;

/// functions x repetitions, distributed over `jobs` workers.  A failed
/// repetition is recorded and excluded from the curve set.  Results are
/// identical for any job count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned jobs = 1,
                                const UnitFilter& filter = {}, const UnitSink& sink = {});

}  // namespace cenal::loop
