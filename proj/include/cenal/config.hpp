#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cenal/active_loop.hpp"

namespace cenal::config {

/// Strict JSON load: unknown keys are rejected, defaults fill the rest.
loop::ExperimentConfig load_experiment(const std::string& path);
loop::ExperimentConfig experiment_from_json_text(const std::string& text);

/// Canonical serialization (sorted keys, defaults filled); two configs hash
/// equal iff they are semantically equal.
std::string canonical_json(const loop::ExperimentConfig& cfg);
std::string config_hash(const loop::ExperimentConfig& cfg);

struct GenerateConfig {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  /// "synthetic" (x ~ N(5,1)) or "synthetic_test" (x ~ U(1.5, 8.5)).
  std::string kind = "synthetic";
};

GenerateConfig load_generate(const std::string& path);

struct ManifestUnit {
  acq::Function function = acq::Function::random;
  std::size_t repetition = 0;
  std::string status;  // "done" | "failed"
  std::string file;    // curve CSV, relative to the run directory
  std::string error;
};

struct Manifest {
  std::string version;
  std::string config_hash;
  std::string dataset;
  std::uint64_t master_seed = 0;
  std::string created;
  std::vector<ManifestUnit> units;
};

Manifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const Manifest& m);

}  // namespace cenal::config
