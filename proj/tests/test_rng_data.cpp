#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

#include "cenal/data.hpp"
#include "cenal/errors.hpp"
#include "cenal/rng.hpp"

using namespace cenal;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "cenal_tests";
  fs::create_directories(dir);
  return dir / name;
}

// Independent re-simulation of the generator's response family using std
// distributions (different sampling transforms than the library's stream).
struct Resim {
  double mean_y = 0.0;
  double censored_frac = 0.0;
};

Resim resimulate(std::size_t n, unsigned seed, bool uniform_x) {
  std::mt19937 eng(seed);
  std::normal_distribution<double> stdn(0.0, 1.0);
  std::uniform_real_distribution<double> unif(1.5, 8.5);
  Resim r;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = uniform_x ? unif(eng) : 5.0 + stdn(eng);
    const double u = x - 5.0;
    const double sd = std::sqrt(0.01 * std::fabs(x));
    const double ystar = 0.5 * std::sin(2.0 * u) + 2.0 + sd * stdn(eng);
    const double z = 0.5 * std::cos(2.0 * u) + 2.0 + sd * stdn(eng);
    r.mean_y += std::min(ystar, z);
    r.censored_frac += ystar > z ? 1.0 : 0.0;
  }
  r.mean_y /= static_cast<double>(n);
  r.censored_frac /= static_cast<double>(n);
  return r;
}

}  // namespace

TEST_SUITE("rng_data") {

TEST_CASE("derive gives stable, distinct streams") {
  const auto a = rng::derive(42, {rng::tag::model, 3});
  const auto b = rng::derive(42, {rng::tag::model, 3});
  const auto c = rng::derive(42, {rng::tag::model, 4});
  const auto d = rng::derive(43, {rng::tag::model, 3});
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a != d);
}

TEST_CASE("random stream basics") {
  rng::RandomStream rs(7);
  double mn = 1.0, mx = 0.0, sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rs.uniform();
    mn = std::min(mn, u);
    mx = std::max(mx, u);
    sum += u;
  }
  CHECK(mn >= 0.0);
  CHECK(mx < 1.0);
  CHECK(sum / 20000.0 == doctest::Approx(0.5).epsilon(0.02));

  rng::RandomStream rs2(7);
  rng::RandomStream rs3(7);
  for (int i = 0; i < 100; ++i) CHECK(rs2.normal() == rs3.normal());
}

TEST_CASE("synthetic generator identities hold exactly") {
  const auto pts = data::generate_synthetic(5000, 123);
  REQUIRE(pts.size() == 5000);
  for (const auto& p : pts) {
    CHECK(p.y == std::min(p.y_star, p.z));
    CHECK(p.uncensored == (p.y_star <= p.z));
    CHECK(std::isfinite(p.x));
    CHECK(std::isfinite(p.y));
  }
}

TEST_CASE("synthetic generator is deterministic in the seed") {
  const auto a = data::generate_synthetic(64, 9);
  const auto b = data::generate_synthetic(64, 9);
  const auto c = data::generate_synthetic(64, 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
  }
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) any_diff = any_diff || a[i].x != c[i].x;
  CHECK(any_diff);
}

TEST_CASE("censored fraction matches the reported rate") {
  const auto pts = data::generate_synthetic(10000, 2024);
  double censored = 0.0;
  for (const auto& p : pts) censored += p.uncensored ? 0.0 : 1.0;
  censored /= static_cast<double>(pts.size());
  CHECK(std::fabs(censored - 0.44) < 0.02);
}

TEST_CASE("the two noise draws are independent") {
  const auto pts = data::generate_synthetic(100000, 5);
  // Recover the noise draws from the stored latents.
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& p : pts) {
    const double u = p.x - 5.0;
    const double e1 = p.y_star - (0.5 * std::sin(2.0 * u) + 2.0);
    const double e2 = p.z - (0.5 * std::cos(2.0 * u) + 2.0);
    sx += e1;
    sy += e2;
    sxx += e1 * e1;
    syy += e2 * e2;
    sxy += e1 * e2;
  }
  const double corr = (sxy - sx * sy / n) /
                      std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
  CHECK(std::fabs(corr) < 3.0 / std::sqrt(n));
}

TEST_CASE("mean of y agrees with an independent re-simulation") {
  const auto pts = data::generate_synthetic(100000, 77);
  double mean = 0.0, m2 = 0.0;
  for (const auto& p : pts) mean += p.y;
  mean /= static_cast<double>(pts.size());
  for (const auto& p : pts) m2 += (p.y - mean) * (p.y - mean);
  const double se = std::sqrt(m2 / pts.size()) / std::sqrt(static_cast<double>(pts.size()));

  const Resim r = resimulate(400000, 99, false);
  CHECK(std::fabs(mean - r.mean_y) < 3.5 * se);
}

TEST_CASE("test-set generator support and statistics") {
  const auto pts = data::generate_synthetic_test(50000, 11);
  double mean_x = 0.0, censored = 0.0;
  for (const auto& p : pts) {
    CHECK(p.x >= 1.5);
    CHECK(p.x <= 8.5);
    mean_x += p.x;
    censored += p.uncensored ? 0.0 : 1.0;
  }
  mean_x /= static_cast<double>(pts.size());
  censored /= static_cast<double>(pts.size());
  const double se_x = (7.0 / std::sqrt(12.0)) / std::sqrt(50000.0);
  CHECK(std::fabs(mean_x - 5.0) < 3.0 * se_x);

  const Resim r = resimulate(400000, 101, true);
  CHECK(std::fabs(censored - r.censored_frac) < 0.02);
}

TEST_CASE("split sizes, determinism, partition") {
  const auto pts = data::to_dataset(data::generate_synthetic(9760, 3));
  const data::SplitSizes sizes{10, 9000, 250, 500};
  const auto s1 = data::split(pts, sizes, 42);
  const auto s2 = data::split(pts, sizes, 42);
  CHECK(s1.train.size() == 10);
  CHECK(s1.pool.size() == 9000);
  CHECK(s1.val.size() == 250);
  CHECK(s1.test.size() == 500);
  for (std::size_t i = 0; i < s1.train.size(); ++i) {
    CHECK(s1.train[i].x[0] == s2.train[i].x[0]);
  }

  // Partition: the union of the splits is the dataset as a multiset.
  auto key = [](const data::CensoredSample& s) { return std::pair(s.x[0], s.y); };
  std::vector<std::pair<double, double>> all, orig;
  for (const auto* part : {&s1.train, &s1.pool, &s1.val, &s1.test}) {
    for (const auto& s : *part) all.push_back(key(s));
  }
  for (const auto& s : pts) orig.push_back(key(s));
  std::sort(all.begin(), all.end());
  std::sort(orig.begin(), orig.end());
  CHECK(all == orig);

  CHECK_THROWS_AS(data::split(pts, {10, 9800, 250, 500}, 1), ConfigError);
}

TEST_CASE("standardize") {
  auto pts = data::to_dataset(data::generate_synthetic(400, 21));
  const auto tf = data::fit_standardizer(pts);
  auto std_pts = pts;
  tf.apply(std_pts);
  double mean = 0.0, var = 0.0;
  for (const auto& s : std_pts) mean += s.x[0];
  mean /= static_cast<double>(std_pts.size());
  for (const auto& s : std_pts) var += (s.x[0] - mean) * (s.x[0] - mean);
  var /= static_cast<double>(std_pts.size());
  CHECK(std::fabs(mean) < 1e-10);
  CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-10);

  tf.invert(std_pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(std_pts[i].x[0] == doctest::Approx(pts[i].x[0]).epsilon(1e-10));
  }

  data::Dataset flat(50, data::CensoredSample{{3.25}, 1.0, true});
  const auto tf2 = data::fit_standardizer(flat);
  tf2.apply(flat);
  for (const auto& s : flat) CHECK(s.x[0] == 0.0);
}

TEST_CASE("csv parse fidelity") {
  const auto path = temp_file("parse.csv");
  {
    std::ofstream out(path);
    out << "age,bmi,y,event\n";
    out << "63,21.5,4.25,1\n";
    out << "41,30.125,2,0\n";
    out << "55,28,1.0,1\n";
  }
  data::CsvSchema schema;
  schema.features = {"age", "bmi"};
  const auto d = data::load_csv(path.string(), schema, false);
  REQUIRE(d.size() == 3);
  CHECK(d[0].x == std::vector<double>{63.0, 21.5});
  CHECK(d[0].y == 4.25);
  CHECK(d[0].uncensored);
  CHECK(d[1].x == std::vector<double>{41.0, 30.125});
  CHECK_FALSE(d[1].uncensored);

  const auto logd = data::load_csv(path.string(), schema, true);
  CHECK(logd[2].y == 0.0);  // ln(1.0)
  std::size_t censored = 0;
  for (const auto& s : logd) censored += s.uncensored ? 0 : 1;
  CHECK(censored == 1);
}

TEST_CASE("csv error reporting") {
  const auto path = temp_file("bad.csv");
  data::CsvSchema schema;
  schema.features = {"x"};

  {
    std::ofstream out(path);
    out << "x,y,event\n1.0,-3.0,1\n";
  }
  CHECK_THROWS_AS(data::load_csv(path.string(), schema, true), CsvError);

  {
    std::ofstream out(path);
    out << "x,y,event\n1.0,abc,1\n";
  }
  try {
    data::load_csv(path.string(), schema, false);
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(e.row() == 2);
  }

  {
    std::ofstream out(path);
    out << "x,target,event\n1.0,2.0,1\n";
  }
  CHECK_THROWS_AS(data::load_csv(path.string(), schema, false), CsvError);
}

TEST_CASE("csv round trip preserves numbers") {
  const auto pts = data::to_dataset(data::generate_synthetic(200, 8));
  data::CsvSchema schema;
  schema.features = {"x"};
  const auto path = temp_file("roundtrip.csv");
  data::save_csv(path.string(), schema, pts);
  const auto back = data::load_csv(path.string(), schema, false);
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(back[i].x[0] == doctest::Approx(pts[i].x[0]).epsilon(1e-12));
    CHECK(back[i].y == doctest::Approx(pts[i].y).epsilon(1e-12));
    CHECK(back[i].uncensored == pts[i].uncensored);
  }
}

}  // TEST_SUITE
