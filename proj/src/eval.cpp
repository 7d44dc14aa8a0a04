#include "cenal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "cenal/errors.hpp"
#include "cenal/train.hpp"

namespace cenal::report {

namespace {

constexpr double kEps = 1e-8;

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Canonical row order: function (canonical), repetition, step.
std::vector<const LearningCurve*> sorted_view(const std::vector<LearningCurve>& curves) {
  std::vector<const LearningCurve*> v;
  v.reserve(curves.size());
  for (const auto& c : curves) v.push_back(&c);
  std::sort(v.begin(), v.end(), [](const LearningCurve* a, const LearningCurve* b) {
    if (a->function != b->function) {
      return static_cast<int>(a->function) < static_cast<int>(b->function);
    }
    return a->repetition < b->repetition;
  });
  return v;
}

}  // namespace

double test_censored_nll(const nn::Weights& w, const data::Dataset& test) {
  if (test.empty()) throw ConfigError("test_censored_nll: empty test set");
  const double nll = nn::dataset_censored_nll(w, test);
  if (!std::isfinite(nll)) throw TrainingError("test_censored_nll: non-finite NLL");
  return nll;
}

double global_min_nll(const std::vector<LearningCurve>& curves) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : curves) {
    for (const auto& p : c.points) m = std::min(m, p.test_nll);
  }
  return m;
}

RdAucSummary rd_auc_pair(const std::vector<LearningCurve>& curve_s,
                         const std::vector<LearningCurve>& curve_random, double shift,
                         const std::string& dataset) {
  std::map<std::size_t, const LearningCurve*> random_by_rep;
  for (const auto& c : curve_random) random_by_rep[c.repetition] = &c;

  std::vector<double> per_rep;
  for (const auto& c : curve_s) {
    const auto it = random_by_rep.find(c.repetition);
    if (it == random_by_rep.end()) continue;  // unpaired repetition
    const LearningCurve& r = *it->second;
    if (r.points.size() != c.points.size()) {
      throw ConfigError("rd_auc: misaligned step counts");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      if (r.points[i].step != c.points[i].step) {
        throw ConfigError("rd_auc: misaligned steps");
      }
      const double nr = r.points[i].test_nll - shift;
      const double ns = c.points[i].test_nll - shift;
      acc += (nr - ns) / std::max(nr, kEps);
    }
    per_rep.push_back(acc / static_cast<double>(c.points.size()));
  }

  RdAucSummary out;
  out.dataset = dataset;
  out.function = curve_s.empty() ? acq::Function::random : curve_s.front().function;
  out.repetitions = per_rep.size();
  if (per_rep.empty()) return out;

  double mean = 0.0;
  for (double v : per_rep) mean += v;
  mean /= static_cast<double>(per_rep.size());
  double var = 0.0;
  for (double v : per_rep) var += (v - mean) * (v - mean);
  const double se = per_rep.size() > 1
                        ? std::sqrt(var / static_cast<double>(per_rep.size() - 1)) /
                              std::sqrt(static_cast<double>(per_rep.size()))
                        : 0.0;
  out.mean_pct = 100.0 * mean;
  out.se_pct = 100.0 * se;
  return out;
}

RdAucSummary rd_auc(const std::vector<LearningCurve>& curve_s,
                    const std::vector<LearningCurve>& curve_random,
                    const std::string& dataset) {
  std::vector<LearningCurve> all = curve_s;
  all.insert(all.end(), curve_random.begin(), curve_random.end());
  return rd_auc_pair(curve_s, curve_random, global_min_nll(all), dataset);
}

std::vector<RdAucSummary> rd_auc_all(const std::vector<LearningCurve>& curves,
                                     const std::string& dataset, double* shift_out) {
  const double shift = global_min_nll(curves);
  if (shift_out != nullptr) *shift_out = shift;

  std::map<acq::Function, std::vector<LearningCurve>> by_fn;
  for (const auto& c : curves) by_fn[c.function].push_back(c);

  std::vector<RdAucSummary> out;
  const auto rnd = by_fn.find(acq::Function::random);
  if (rnd == by_fn.end()) {
    throw ConfigError("rd_auc: no random baseline curves present");
  }
  for (acq::Function f : acq::all_functions()) {
    const auto it = by_fn.find(f);
    if (it == by_fn.end()) continue;
    RdAucSummary s = rd_auc_pair(it->second, rnd->second, shift, dataset);
    s.function = f;
    out.push_back(s);
  }
  return out;
}

void write_curves_csv(const std::string& path, const std::string& dataset,
                      const std::vector<LearningCurve>& curves) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "dataset,function,repetition,step,n_train,test_nll\n";
  for (const LearningCurve* c : sorted_view(curves)) {
    for (const auto& p : c->points) {
      out << dataset << ',' << acq::function_name(c->function) << ',' << c->repetition
          << ',' << p.step << ',' << p.n_train << ',' << fmt9(p.test_nll) << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path);
}

std::vector<LearningCurve> read_curves_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw CsvError("empty curve file: " + path);

  std::map<std::pair<int, std::size_t>, LearningCurve> by_key;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string dataset, fn, cell;
    if (!std::getline(ss, dataset, ',') || !std::getline(ss, fn, ',')) {
      throw CsvError("bad curve row", row);
    }
    CurvePoint p;
    std::size_t rep = 0;
    try {
      std::getline(ss, cell, ',');
      rep = std::stoul(cell);
      std::getline(ss, cell, ',');
      p.step = std::stoul(cell);
      std::getline(ss, cell, ',');
      p.n_train = std::stoul(cell);
      std::getline(ss, cell, ',');
      p.test_nll = std::stod(cell);
    } catch (const std::exception&) {
      throw CsvError("bad curve row", row);
    }
    const acq::Function f = acq::function_from_name(fn);
    auto& curve = by_key[{static_cast<int>(f), rep}];
    curve.function = f;
    curve.repetition = rep;
    curve.points.push_back(p);
  }

  std::vector<LearningCurve> out;
  out.reserve(by_key.size());
  for (auto& [key, curve] : by_key) {
    std::sort(curve.points.begin(), curve.points.end(),
              [](const CurvePoint& a, const CurvePoint& b) { return a.step < b.step; });
    out.push_back(std::move(curve));
  }
  return out;
}

void write_profile_csv(const std::string& path, const std::string& dataset,
                       const std::vector<ProfileRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "dataset,function,x,score\n";
  std::vector<const ProfileRow*> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(&r);
  std::stable_sort(v.begin(), v.end(), [](const ProfileRow* a, const ProfileRow* b) {
    if (a->function != b->function) {
      return static_cast<int>(a->function) < static_cast<int>(b->function);
    }
    return a->x < b->x;
  });
  for (const ProfileRow* r : v) {
    out << dataset << ',' << acq::function_name(r->function) << ',' << fmt9(r->x) << ','
        << fmt9(r->score) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

std::vector<ProfileRow> read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<ProfileRow> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string dataset, fn, cell;
    ProfileRow r;
    try {
      std::getline(ss, dataset, ',');
      std::getline(ss, fn, ',');
      r.function = acq::function_from_name(fn);
      std::getline(ss, cell, ',');
      r.x = std::stod(cell);
      std::getline(ss, cell, ',');
      r.score = std::stod(cell);
    } catch (const std::exception&) {
      throw CsvError("bad profile row", row);
    }
    rows.push_back(r);
  }
  return rows;
}

void write_reports(const std::string& out_dir, const std::string& dataset,
                   const std::vector<LearningCurve>& curves,
                   const std::vector<RdAucSummary>& summaries,
                   const std::vector<ProfileRow>& profile, const ReportMeta& meta) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  write_curves_csv((fs::path(out_dir) / "learning_curves.csv").string(), dataset, curves);

  {
    const std::string path = (fs::path(out_dir) / "rd_auc.csv").string();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "dataset,function,mean,se,n_reps\n";
    for (const auto& s : summaries) {
      out << s.dataset << ',' << acq::function_name(s.function) << ',' << fmt9(s.mean_pct)
          << ',' << fmt9(s.se_pct) << ',' << s.repetitions << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
  }

  write_profile_csv((fs::path(out_dir) / "scores_profile.csv").string(), dataset, profile);

  {
    nlohmann::json j;
    j["config_hash"] = meta.config_hash;
    j["master_seed"] = meta.master_seed;
    j["nll_shift"] = meta.shift;
    j["version"] = meta.version;
    const std::string path = (fs::path(out_dir) / "report_meta.json").string();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
  }
}

}  // namespace cenal::report
