#include "cenal/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cenal/errors.hpp"
#include "cenal/rng.hpp"

namespace cenal::data {

namespace {

// Response family shared by both generators.  The sine/cosine phase is
// centred on the mean input so the censored and uncensored bands sit where
// the training distribution actually has mass.
SyntheticPoint make_point(double x, rng::RandomStream& rs) {
  const double u = x - 5.0;
  const double noise_sd = std::sqrt(0.01 * std::fabs(x));
  const double eps_y = rs.normal(0.0, noise_sd);
  const double eps_z = rs.normal(0.0, noise_sd);  // independent draw
  SyntheticPoint p;
  p.x = x;
  p.y_star = 0.5 * std::sin(2.0 * u) + 2.0 + eps_y;
  p.z = 0.5 * std::cos(2.0 * u) + 2.0 + eps_z;
  p.uncensored = p.y_star <= p.z;
  p.y = std::min(p.y_star, p.z);
  return p;
}

}  // namespace

std::vector<SyntheticPoint> generate_synthetic(std::size_t n, std::uint64_t seed) {
  rng::RandomStream rs(rng::derive(seed, {rng::tag::dataset}));
  std::vector<SyntheticPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(make_point(rs.normal(5.0, 1.0), rs));
  return pts;
}

std::vector<SyntheticPoint> generate_synthetic_test(std::size_t n, std::uint64_t seed) {
  rng::RandomStream rs(rng::derive(seed, {rng::tag::dataset, 1}));
  std::vector<SyntheticPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(make_point(rs.uniform(1.5, 8.5), rs));
  return pts;
}

Dataset to_dataset(const std::vector<SyntheticPoint>& pts) {
  Dataset out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back({{p.x}, p.y, p.uncensored});
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_number(const std::string& cell, std::size_t row) {
  if (cell.empty()) throw CsvError("missing value", row);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw CsvError("non-numeric value '" + cell + "'", row);
  }
  if (used != cell.size()) throw CsvError("non-numeric value '" + cell + "'", row);
  if (!std::isfinite(v)) throw CsvError("non-finite value '" + cell + "'", row);
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema, bool log_transform) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw CsvError("empty file: " + path);
  const auto header = split_line(line);

  auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw CsvError("column '" + name + "' not found in " + path);
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  std::vector<std::size_t> feat_cols;
  feat_cols.reserve(schema.features.size());
  for (const auto& f : schema.features) feat_cols.push_back(column(f));
  const std::size_t target_col = column(schema.target);
  const std::size_t event_col = column(schema.event);

  Dataset out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) throw CsvError("wrong column count", row);

    CensoredSample s;
    s.x.reserve(feat_cols.size());
    for (std::size_t c : feat_cols) s.x.push_back(parse_number(cells[c], row));
    double target = parse_number(cells[target_col], row);
    if (log_transform) {
      if (target <= 0.0) throw CsvError("nonpositive target under log transform", row);
      target = std::log(target);
    }
    s.y = target;
    const double ev = parse_number(cells[event_col], row);
    if (ev != 0.0 && ev != 1.0) throw CsvError("event must be 0 or 1", row);
    s.uncensored = ev == 1.0;
    out.push_back(std::move(s));
  }
  return out;
}

void save_csv(const std::string& path, const CsvSchema& schema, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t i = 0; i < schema.features.size(); ++i) {
    out << schema.features[i] << ',';
  }
  out << schema.target << ',' << schema.event << '\n';
  // 17 significant digits round-trip doubles exactly.
  char buf[64];
  for (const auto& s : data) {
    if (s.x.size() != schema.features.size()) {
      throw IoError("feature width mismatch while writing " + path);
    }
    for (double v : s.x) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", s.y);
    out << buf << ',' << (s.uncensored ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

DatasetSplits split(const Dataset& data, const SplitSizes& sizes, std::uint64_t seed) {
  const std::size_t need = sizes.n0 + sizes.pool + sizes.val + sizes.test;
  if (need > data.size()) {
    throw ConfigError("split: need " + std::to_string(need) + " samples, have " +
                      std::to_string(data.size()));
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng::RandomStream rs(rng::derive(seed, {rng::tag::split}));
  // Fisher-Yates with our own stream; std::shuffle is implementation-defined.
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rs.below(i)]);
  }

  DatasetSplits out;
  out.seed = seed;
  std::size_t k = 0;
  auto take = [&](std::size_t count) {
    Dataset part;
    part.reserve(count);
    for (std::size_t i = 0; i < count; ++i) part.push_back(data[order[k++]]);
    return part;
  };
  out.train = take(sizes.n0);
  out.pool = take(sizes.pool);
  out.val = take(sizes.val);
  out.test = take(sizes.test);
  return out;
}

void FeatureTransform::apply(Dataset& d) const {
  for (auto& s : d) {
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      s.x[j] = (s.x[j] - mean[j]) / stddev[j];
    }
  }
}

void FeatureTransform::invert(Dataset& d) const {
  for (auto& s : d) {
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      s.x[j] = s.x[j] * stddev[j] + mean[j];
    }
  }
}

FeatureTransform fit_standardizer(const Dataset& train) {
  if (train.empty()) throw ConfigError("fit_standardizer: empty train set");
  const std::size_t d = train.front().x.size();
  FeatureTransform t;
  t.mean.assign(d, 0.0);
  t.stddev.assign(d, 0.0);
  for (const auto& s : train) {
    for (std::size_t j = 0; j < d; ++j) t.mean[j] += s.x[j];
  }
  for (double& m : t.mean) m /= static_cast<double>(train.size());
  for (const auto& s : train) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = s.x[j] - t.mean[j];
      t.stddev[j] += c * c;
    }
  }
  for (double& v : t.stddev) {
    v = std::sqrt(v / static_cast<double>(train.size()));
    if (v < 1e-8) v = 1e-8;
  }
  return t;
}

}  // namespace cenal::data
