#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cenal::data {

/// One observation: features, observed target y = min(y*, z) and the
/// censoring indicator (true means uncensored, y* <= z).
struct CensoredSample {
  std::vector<double> x;
  double y = 0.0;
  bool uncensored = true;
};

using Dataset = std::vector<CensoredSample>;

/// A generated point with its latent true value and threshold kept around
/// for oracle checks.
struct SyntheticPoint {
  double x = 0.0;
  double y_star = 0.0;
  double z = 0.0;
  double y = 0.0;
  bool uncensored = true;
};

/// Training-distribution generator: x ~ N(5,1), a sine response and a
/// cosine threshold on the centred input, with two independent noise draws
/// of variance 0.01*|x|.
std::vector<SyntheticPoint> generate_synthetic(std::size_t n, std::uint64_t seed);

/// Same response with x ~ U(1.5, 8.5); used for test sets so the fit is
/// probed across the whole input range.
std::vector<SyntheticPoint> generate_synthetic_test(std::size_t n, std::uint64_t seed);

Dataset to_dataset(const std::vector<SyntheticPoint>& pts);

struct CsvSchema {
  std::vector<std::string> features;
  std::string target = "y";
  std::string event = "event";
};

/// Strict comma-separated numeric CSV with a header row.  event must be 0
/// or 1 (1 = uncensored); with log_transform the target must be positive
/// and is stored as ln(target).
Dataset load_csv(const std::string& path, const CsvSchema& schema, bool log_transform);

/// Writes the same schema (9 significant digits, '.' decimal point).
void save_csv(const std::string& path, const CsvSchema& schema, const Dataset& data);

struct SplitSizes {
  std::size_t n0 = 0;
  std::size_t pool = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

struct DatasetSplits {
  Dataset train, pool, val, test;
  std::uint64_t seed = 0;
};

/// Uniform partition without replacement; deterministic in seed.
DatasetSplits split(const Dataset& data, const SplitSizes& sizes, std::uint64_t seed);

struct FeatureTransform {
  std::vector<double> mean;
  std::vector<double> stddev;  // floored at 1e-8

  void apply(Dataset& d) const;
  void invert(Dataset& d) const;
};

/// Fit a per-dimension affine map on train features; targets untouched.
FeatureTransform fit_standardizer(const Dataset& train);

}  // namespace cenal::data
