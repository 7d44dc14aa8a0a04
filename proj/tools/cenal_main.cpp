#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cenal/active_loop.hpp"
#include "cenal/config.hpp"
#include "cenal/data.hpp"
#include "cenal/errors.hpp"
#include "cenal/eval.hpp"
#include "cenal/kernels.hpp"
#include "cenal/log.hpp"
#include "cenal/version.hpp"

namespace fs = std::filesystem;
using namespace cenal;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string unit_file(acq::Function f, std::size_t rep) {
  std::ostringstream os;
  os << "curves/" << acq::function_name(f) << "_rep" << rep << ".csv";
  return os.str();
}

int cmd_generate(const std::string& config_path, const std::string& out_path) {
  const config::GenerateConfig gen = config::load_generate(config_path);
  const auto pts = gen.kind == "synthetic"
                       ? data::generate_synthetic(gen.n, gen.seed)
                       : data::generate_synthetic_test(gen.n, gen.seed);
  data::CsvSchema schema;
  schema.features = {"x"};
  data::save_csv(out_path, schema, data::to_dataset(pts));
  log::info("wrote ", pts.size(), " points to ", out_path);
  return kExitOk;
}

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  unsigned jobs = 1;
  bool resume = false;
  std::string functions;
  std::size_t steps = 0;
  std::size_t repetitions = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

loop::ExperimentConfig load_with_overrides(const RunOptions& opt) {
  loop::ExperimentConfig cfg = config::load_experiment(opt.config_path);
  if (!opt.functions.empty()) {
    cfg.functions.clear();
    std::stringstream ss(opt.functions);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) cfg.functions.push_back(acq::function_from_name(name));
    }
    if (cfg.functions.empty()) throw ConfigError("--functions: empty list");
  }
  if (opt.steps != 0) cfg.steps = opt.steps;
  if (opt.repetitions != 0) cfg.repetitions = opt.repetitions;
  if (opt.seed_set) cfg.master_seed = opt.seed;
  loop::validate(cfg);
  return cfg;
}

int cmd_run(const RunOptions& opt) {
  const loop::ExperimentConfig cfg = load_with_overrides(opt);
  const std::string hash = config::config_hash(cfg);

  fs::create_directories(fs::path(opt.out_dir) / "curves");
  const std::string manifest_path = (fs::path(opt.out_dir) / "manifest.json").string();

  std::map<std::pair<int, std::size_t>, config::ManifestUnit> done;
  if (opt.resume && fs::exists(manifest_path)) {
    const config::Manifest prev = config::read_manifest(manifest_path);
    if (prev.config_hash != hash) {
      throw ConfigError("resume: config hash mismatch (" + prev.config_hash + " vs " +
                        hash + ")");
    }
    for (const auto& u : prev.units) {
      if (u.status == "done") {
        done[{static_cast<int>(u.function), u.repetition}] = u;
      }
    }
    log::info("resume: ", done.size(), " units already done");
  }

  config::Manifest manifest;
  manifest.version = kVersion;
  manifest.config_hash = hash;
  manifest.dataset = cfg.dataset_id;
  manifest.master_seed = cfg.master_seed;
  manifest.created = timestamp();
  for (const auto& [key, u] : done) manifest.units.push_back(u);
  config::write_manifest(manifest_path, manifest);

  auto filter = [&](acq::Function f, std::size_t rep) {
    return done.find({static_cast<int>(f), rep}) == done.end();
  };

  auto sink = [&](const loop::RepetitionOutcome& outcome, const loop::UnitStatus& status) {
    config::ManifestUnit mu;
    mu.function = status.function;
    mu.repetition = status.repetition;
    if (status.ok) {
      mu.status = "done";
      mu.file = unit_file(status.function, status.repetition);
      report::write_curves_csv((fs::path(opt.out_dir) / mu.file).string(), cfg.dataset_id,
                               {outcome.curve});
      if (!outcome.profile.empty()) {
        const std::string pf =
            "curves/profile_" + std::string(acq::function_name(status.function)) + ".csv";
        report::write_profile_csv((fs::path(opt.out_dir) / pf).string(), cfg.dataset_id,
                                  outcome.profile);
      }
    } else {
      mu.status = "failed";
      mu.error = status.error;
    }
    manifest.units.push_back(mu);
    config::write_manifest(manifest_path, manifest);
  };

  const loop::ExperimentResult result = loop::run_experiment(cfg, opt.jobs, filter, sink);

  std::size_t failed = 0;
  for (const auto& s : result.statuses) failed += s.ok ? 0 : 1;
  const std::size_t expected = cfg.functions.size() * cfg.repetitions;
  std::size_t done_count = 0;
  for (const auto& u : manifest.units) done_count += u.status == "done" ? 1 : 0;
  log::info("run finished: ", done_count, "/", expected, " units done");
  if (failed > 0) {
    log::error(failed, " repetition(s) failed; see manifest");
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_report(const std::string& out_dir) {
  const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
  if (!fs::exists(manifest_path)) throw IoError("no manifest in " + out_dir);
  const config::Manifest manifest = config::read_manifest(manifest_path);

  std::vector<LearningCurve> curves;
  std::size_t incomplete = 0;
  for (const auto& u : manifest.units) {
    if (u.status != "done") {
      ++incomplete;
      continue;
    }
    const auto loaded = report::read_curves_csv((fs::path(out_dir) / u.file).string());
    curves.insert(curves.end(), loaded.begin(), loaded.end());
  }
  if (incomplete > 0) {
    log::warn(incomplete, " unit(s) incomplete or failed; reporting the rest");
  }
  if (curves.empty()) throw ConfigError("report: no completed curves in " + out_dir);

  std::vector<ProfileRow> profile;
  for (acq::Function f : acq::all_functions()) {
    const fs::path pf = fs::path(out_dir) / ("curves/profile_" +
                                             std::string(acq::function_name(f)) + ".csv");
    if (fs::exists(pf)) {
      const auto rows = report::read_profile_csv(pf.string());
      profile.insert(profile.end(), rows.begin(), rows.end());
    }
  }

  report::ReportMeta meta;
  meta.config_hash = manifest.config_hash;
  meta.master_seed = manifest.master_seed;
  meta.version = kVersion;

  double shift = 0.0;
  const auto summaries = report::rd_auc_all(curves, manifest.dataset, &shift);
  meta.shift = shift;
  report::write_reports(out_dir, manifest.dataset, curves, summaries, profile, meta);
  log::info("reports written to ", out_dir);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning benchmark for censored regression"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string gen_config, gen_out;
  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic dataset CSV");
  gen->add_option("--config", gen_config, "generator config JSON")->required();
  gen->add_option("--out", gen_out, "output CSV path")->required();

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run the acquisition experiment");
  run->add_option("--config", run_opt.config_path, "experiment config JSON")->required();
  run->add_option("--out", run_opt.out_dir, "output directory")->required();
  run->add_option("--jobs", run_opt.jobs, "worker threads over repetitions");
  run->add_flag("--resume", run_opt.resume, "skip units already done in the manifest");
  run->add_option("--functions", run_opt.functions, "comma-separated function override");
  run->add_option("--steps", run_opt.steps, "acquisition steps override");
  run->add_option("--repetitions", run_opt.repetitions, "repetitions override");
  CLI::Option* seed_opt = run->add_option("--seed", run_opt.seed, "master seed override");

  std::string report_dir;
  CLI::App* rep = app.add_subcommand("report", "Aggregate curves into RD-AUC reports");
  rep->add_option("--out", report_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  run_opt.seed_set = seed_opt->count() > 0;

  try {
    if (gen->parsed()) return cmd_generate(gen_config, gen_out);
    if (run->parsed()) return cmd_run(run_opt);
    if (rep->parsed()) return cmd_report(report_dir);
  } catch (const ConfigError& e) {
    log::error(e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log::error(e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
