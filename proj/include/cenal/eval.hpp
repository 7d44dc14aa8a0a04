#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cenal/acquisition.hpp"
#include "cenal/data.hpp"
#include "cenal/network.hpp"

namespace cenal {

struct CurvePoint {
  std::size_t step = 0;
  std::size_t n_train = 0;
  double test_nll = 0.0;
};

/// Per-(function, repetition) test-NLL trajectory; step 0 is the model
/// trained on the initial n0 samples, before any acquisition.
struct LearningCurve {
  acq::Function function = acq::Function::random;
  std::size_t repetition = 0;
  std::vector<CurvePoint> points;
};

/// One row of a 1-D score-versus-x dump.
struct ProfileRow {
  acq::Function function = acq::Function::random;
  double x = 0.0;
  double score = 0.0;
};

}  // namespace cenal

namespace cenal::report {

/// Mean right-censored NLL on the test set under the deterministic network.
double test_censored_nll(const nn::Weights& w, const data::Dataset& test);

struct RdAucSummary {
  std::string dataset;
  acq::Function function = acq::Function::random;
  double mean_pct = 0.0;
  double se_pct = 0.0;
  std::size_t repetitions = 0;
};

/// Smallest test NLL across every curve point (the metric's lower bound).
double global_min_nll(const std::vector<LearningCurve>& curves);

/// RD-AUC of function s against random under a given shift: per repetition
/// the step-mean of (NLL'_random - NLL'_s) / max(NLL'_random, eps), then
/// mean +- standard error over repetitions, in percent.
RdAucSummary rd_auc_pair(const std::vector<LearningCurve>& curve_s,
                         const std::vector<LearningCurve>& curve_random, double shift,
                         const std::string& dataset);

/// Pair form with the shift taken over the union of the two curve sets.
RdAucSummary rd_auc(const std::vector<LearningCurve>& curve_s,
                    const std::vector<LearningCurve>& curve_random,
                    const std::string& dataset);

/// Summaries for every function present, under the one global shift.
std::vector<RdAucSummary> rd_auc_all(const std::vector<LearningCurve>& curves,
                                     const std::string& dataset, double* shift_out = nullptr);

struct ReportMeta {
  std::string config_hash;
  std::uint64_t master_seed = 0;
  double shift = 0.0;
  std::string version;
};

/// Emits learning_curves.csv, rd_auc.csv, scores_profile.csv and the JSON
/// metadata sidecar; 9 significant digits, stable row order.
void write_reports(const std::string& out_dir, const std::string& dataset,
                   const std::vector<LearningCurve>& curves,
                   const std::vector<RdAucSummary>& summaries,
                   const std::vector<ProfileRow>& profile, const ReportMeta& meta);

void write_curves_csv(const std::string& path, const std::string& dataset,
                      const std::vector<LearningCurve>& curves);

/// Reads any CSV in the learning_curves.csv schema.
std::vector<LearningCurve> read_curves_csv(const std::string& path);

void write_profile_csv(const std::string& path, const std::string& dataset,
                       const std::vector<ProfileRow>& rows);

std::vector<ProfileRow> read_profile_csv(const std::string& path);

}  // namespace cenal::report
