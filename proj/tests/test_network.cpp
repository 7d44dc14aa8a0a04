#include <cmath>
#include <vector>

#include "doctest.h"

#include "cenal/errors.hpp"
#include "cenal/network.hpp"
#include "cenal/prob.hpp"
#include "cenal/rng.hpp"

using namespace cenal;
using nn::NetworkConfig;

namespace {

// Plain-loop reference forward pass, written without the kernels.
nn::HeadOutput reference_forward(const nn::Weights& w, const nn::DropoutMask* mask,
                                 const std::vector<double>& x) {
  std::vector<double> h = x;
  for (std::size_t l = 0; l < w.layer_count(); ++l) {
    const std::size_t r = w.rows(l);
    const std::size_t c = w.cols(l);
    std::vector<double> next(r);
    for (std::size_t i = 0; i < r; ++i) {
      double acc = w.b(l)[i];
      for (std::size_t j = 0; j < c; ++j) acc += w.w(l)[i * c + j] * h[j];
      next[i] = acc;
    }
    if (l + 1 < w.layer_count()) {
      for (std::size_t i = 0; i < r; ++i) {
        double v = next[i] > 0.0 ? next[i] : 0.0;  // relu nets only
        if (mask != nullptr) v *= mask->scale[l][i];
        next[i] = v;
      }
    }
    h = std::move(next);
  }
  return nn::HeadOutput::from_raw(h.data());
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("init is deterministic and seed-sensitive") {
  NetworkConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden_layers = 2;
  cfg.hidden_units = 8;
  cfg.init_seed = 5;
  const auto a = nn::init_weights(cfg);
  const auto b = nn::init_weights(cfg);
  CHECK(a.params == b.params);

  cfg.init_seed = 6;
  const auto c = nn::init_weights(cfg);
  bool differ = false;
  for (std::size_t i = 0; i < a.params.size(); ++i) differ = differ || a.params[i] != c.params[i];
  CHECK(differ);
  for (double v : a.params) CHECK(std::isfinite(v));
}

TEST_CASE("weight shapes") {
  NetworkConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden_layers = 1;
  cfg.hidden_units = 1;
  const auto w = nn::init_weights(cfg);
  CHECK(w.layer_count() == 2);
  CHECK(w.rows(0) == 1);
  CHECK(w.cols(0) == 4);
  CHECK(w.rows(1) == nn::kHeadWidth);
  CHECK(w.cols(1) == 1);
  CHECK(w.params.size() == (4 + 1) + (5 + 5));

  NetworkConfig bad = cfg;
  bad.input_dim = 0;
  CHECK_THROWS_AS(nn::init_weights(bad), ConfigError);
}

TEST_CASE("zero weights force the canonical head") {
  NetworkConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden_layers = 1;
  cfg.hidden_units = 4;
  auto w = nn::init_weights(cfg);
  std::fill(w.params.begin(), w.params.end(), 0.0);
  const auto h = nn::forward(w, nullptr, std::vector<double>{0.3, -0.2});
  CHECK(h.mu_star == 0.0);
  CHECK(h.mu_obs == 0.0);
  CHECK(h.sigma_star == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(h.sigma_obs == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(h.lambda == 0.5);
}

TEST_CASE("all-keep mask at p=0 equals the deterministic pass") {
  NetworkConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden_layers = 3;
  cfg.hidden_units = 16;
  cfg.dropout_p = 0.0;
  cfg.init_seed = 17;
  const auto w = nn::init_weights(cfg);
  rng::RandomStream rs(3);
  const auto mask = nn::sample_mask(cfg, rs);
  const std::vector<double> x{0.7, -1.1};
  const auto a = nn::forward(w, &mask, x);
  const auto b = nn::forward(w, nullptr, x);
  CHECK(a.mu_star == b.mu_star);
  CHECK(a.sigma_star == b.sigma_star);
  CHECK(a.lambda == b.lambda);
}

TEST_CASE("forward matches an independent reference pass") {
  NetworkConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden_layers = 2;
  cfg.hidden_units = 7;
  cfg.dropout_p = 0.4;
  cfg.init_seed = 23;
  const auto w = nn::init_weights(cfg);
  rng::RandomStream rs(29);
  const auto mask = nn::sample_mask(cfg, rs);
  const std::vector<double> x{0.9, -0.4, 1.6};

  const auto got = nn::forward(w, &mask, x);
  const auto want = reference_forward(w, &mask, x);
  CHECK(got.mu_star == doctest::Approx(want.mu_star).epsilon(1e-10));
  CHECK(got.sigma_star == doctest::Approx(want.sigma_star).epsilon(1e-10));
  CHECK(got.mu_obs == doctest::Approx(want.mu_obs).epsilon(1e-10));
  CHECK(got.sigma_obs == doctest::Approx(want.sigma_obs).epsilon(1e-10));
  CHECK(got.lambda == doctest::Approx(want.lambda).epsilon(1e-10));
}

TEST_CASE("shape errors") {
  NetworkConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden_layers = 1;
  cfg.hidden_units = 4;
  const auto w = nn::init_weights(cfg);
  CHECK_THROWS_AS(nn::forward(w, nullptr, std::vector<double>{1.0, 2.0}), ShapeError);

  nn::DropoutMask bad;
  bad.scale = {{1.0, 1.0}};  // wrong width
  CHECK_THROWS_AS(nn::forward(w, &bad, std::vector<double>{1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("posterior sampling determinism and degenerate dropout") {
  NetworkConfig cfg;
  cfg.input_dim = 1;
  cfg.hidden_layers = 2;
  cfg.hidden_units = 12;
  cfg.init_seed = 3;

  SUBCASE("dropout 0 collapses to the deterministic forward") {
    cfg.dropout_p = 0.0;
    const auto w = nn::init_weights(cfg);
    const std::vector<double> x{0.4};
    const auto pp = nn::sample_posterior(w, x, 5, 999);
    const auto det = nn::forward(w, nullptr, x);
    for (const auto& d : pp.draws) {
      CHECK(d.mu_star == det.mu_star);
      CHECK(d.sigma_obs == det.sigma_obs);
    }
  }
  SUBCASE("T=1 and seed determinism") {
    cfg.dropout_p = 0.25;
    const auto w = nn::init_weights(cfg);
    const std::vector<double> x{0.4};
    const auto one = nn::sample_posterior(w, x, 1, 4);
    CHECK(one.draws.size() == 1);
    const auto a = nn::sample_posterior(w, x, 7, 4);
    const auto b = nn::sample_posterior(w, x, 7, 4);
    for (std::size_t t = 0; t < a.draws.size(); ++t) {
      CHECK(a.draws[t].mu_star == b.draws[t].mu_star);
      CHECK(a.draws[t].lambda == b.draws[t].lambda);
    }
    CHECK_THROWS_AS(nn::sample_posterior(w, x, 0, 4), ConfigError);
  }
}

TEST_CASE("consistent masks are shared across inputs within a draw") {
  NetworkConfig cfg;
  cfg.input_dim = 1;
  cfg.hidden_layers = 2;
  cfg.hidden_units = 6;
  cfg.dropout_p = 0.5;
  const auto masks = nn::make_masks(cfg, 3, 77);
  const auto masks2 = nn::make_masks(cfg, 3, 77);
  for (std::size_t t = 0; t < masks.size(); ++t) {
    CHECK(masks[t].scale == masks2[t].scale);
    for (const auto& layer : masks[t].scale) {
      for (double v : layer) CHECK((v == 0.0 || v == 2.0));
    }
  }
}

TEST_CASE("inverted dropout is calibrated on a one-hidden-layer net") {
  // With one hidden layer the raw outputs are linear in the masked
  // activations, so the mask-averaged mean heads match the deterministic
  // pass up to Monte Carlo error.
  NetworkConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden_layers = 1;
  cfg.hidden_units = 32;
  cfg.dropout_p = 0.25;
  cfg.init_seed = 11;
  const auto w = nn::init_weights(cfg);
  const std::vector<double> x{1.2, -0.6};
  const auto det = nn::forward(w, nullptr, x);

  rng::RandomStream rs(555);
  const std::size_t n = 10000;
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto mask = nn::sample_mask(cfg, rs);
    const double v = nn::forward(w, &mask, x).mu_star;
    const double d = v - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (v - mean);
  }
  const double se = std::sqrt(m2 / (n - 1)) / std::sqrt(static_cast<double>(n));
  CHECK(std::fabs(mean - det.mu_star) < 3.0 * se);
}

}  // TEST_SUITE
