#include "cenal/network.hpp"

#include <cmath>
#include <limits>

#include "cenal/errors.hpp"
#include "cenal/kernels.hpp"
#include "cenal/prob.hpp"

namespace cenal::nn {

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "gelu") return Activation::gelu;
  throw ConfigError("unknown activation '" + name + "'");
}

const char* activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "gelu";
}

namespace {

void validate(const NetworkConfig& cfg) {
  if (cfg.input_dim == 0) throw ConfigError("network: input_dim must be positive");
  if (cfg.hidden_layers == 0) throw ConfigError("network: hidden_layers must be positive");
  if (cfg.hidden_units == 0) throw ConfigError("network: hidden_units must be positive");
  if (!(cfg.dropout_p >= 0.0 && cfg.dropout_p < 1.0)) {
    throw ConfigError("network: dropout_p must lie in [0, 1)");
  }
}

double act(Activation a, double x) {
  if (a == Activation::relu) return x > 0.0 ? x : 0.0;
  // exact GELU: x * Phi(x)
  return 0.5 * x * (1.0 + std::erf(x * 0.70710678118654752440));
}

}  // namespace

std::size_t Weights::rows(std::size_t layer) const {
  return layer == cfg.hidden_layers ? kHeadWidth : cfg.hidden_units;
}

std::size_t Weights::cols(std::size_t layer) const {
  return layer == 0 ? cfg.input_dim : cfg.hidden_units;
}

std::size_t Weights::w_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += rows(l) * cols(l) + rows(l);
  return off;
}

std::size_t Weights::b_offset(std::size_t layer) const {
  return w_offset(layer) + rows(layer) * cols(layer);
}

HeadOutput HeadOutput::from_raw(const double raw[kHeadWidth]) {
  HeadOutput h;
  h.mu_star = raw[0];
  h.raw_sigma_star = raw[1];
  h.sigma_star = std::fmax(prob::softplus(raw[1]), prob::kSigmaFloor);
  h.mu_obs = raw[2];
  h.raw_sigma_obs = raw[3];
  h.sigma_obs = std::fmax(prob::softplus(raw[3]), prob::kSigmaFloor);
  h.lambda_logit = raw[4];
  h.lambda = prob::logistic(raw[4]);
  return h;
}

HeadOutput HeadOutput::from_params(double mu_star, double sigma_star, double mu_obs,
                                   double sigma_obs, double lambda) {
  auto inv_softplus = [](double s) {
    return s > 30.0 ? s : std::log(std::expm1(s));
  };
  HeadOutput h;
  h.mu_star = mu_star;
  h.sigma_star = sigma_star;
  h.raw_sigma_star = inv_softplus(sigma_star);
  h.mu_obs = mu_obs;
  h.sigma_obs = sigma_obs;
  h.raw_sigma_obs = inv_softplus(sigma_obs);
  h.lambda = lambda;
  if (lambda <= 0.0) {
    h.lambda_logit = -std::numeric_limits<double>::infinity();
  } else if (lambda >= 1.0) {
    h.lambda_logit = std::numeric_limits<double>::infinity();
  } else {
    h.lambda_logit = std::log(lambda / (1.0 - lambda));
  }
  return h;
}

Weights init_weights(const NetworkConfig& cfg) {
  validate(cfg);
  Weights w;
  w.cfg = cfg;
  std::size_t total = 0;
  for (std::size_t l = 0; l <= cfg.hidden_layers; ++l) {
    const std::size_t r = l == cfg.hidden_layers ? kHeadWidth : cfg.hidden_units;
    const std::size_t c = l == 0 ? cfg.input_dim : cfg.hidden_units;
    total += r * c + r;
  }
  w.params.resize(total);

  rng::RandomStream rs(rng::derive(cfg.init_seed, {rng::tag::init}));
  for (std::size_t l = 0; l < w.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols(l)));
    double* wp = w.params.data() + w.w_offset(l);
    const std::size_t nw = w.rows(l) * w.cols(l);
    for (std::size_t i = 0; i < nw; ++i) wp[i] = rs.uniform(-bound, bound);
    double* bp = w.params.data() + w.b_offset(l);
    for (std::size_t i = 0; i < w.rows(l); ++i) bp[i] = rs.uniform(-bound, bound);
  }
  return w;
}

DropoutMask sample_mask(const NetworkConfig& cfg, rng::RandomStream& rs,
                        std::uint64_t draw_id) {
  DropoutMask m;
  m.draw_id = draw_id;
  m.scale.resize(cfg.hidden_layers);
  const double keep = 1.0 - cfg.dropout_p;
  const double inv = 1.0 / keep;
  for (auto& layer : m.scale) {
    layer.resize(cfg.hidden_units);
    for (double& v : layer) v = rs.uniform() < keep ? inv : 0.0;
  }
  return m;
}

std::vector<DropoutMask> make_masks(const NetworkConfig& cfg, std::size_t T,
                                    std::uint64_t seed) {
  rng::RandomStream rs(rng::derive(seed, {rng::tag::masks}));
  std::vector<DropoutMask> masks;
  masks.reserve(T);
  for (std::size_t t = 0; t < T; ++t) masks.push_back(sample_mask(cfg, rs, t));
  return masks;
}

namespace {

void check_shapes(const Weights& w, const DropoutMask* mask, std::span<const double> x) {
  if (x.size() != w.cfg.input_dim) {
    throw ShapeError("forward: input has " + std::to_string(x.size()) +
                     " features, network expects " + std::to_string(w.cfg.input_dim));
  }
  if (mask != nullptr) {
    if (mask->scale.size() != w.cfg.hidden_layers) {
      throw ShapeError("forward: mask layer count mismatch");
    }
    for (const auto& layer : mask->scale) {
      if (layer.size() != w.cfg.hidden_units) {
        throw ShapeError("forward: mask width mismatch");
      }
    }
  }
}

}  // namespace

HeadOutput forward(const Weights& w, const DropoutMask* mask, std::span<const double> x) {
  check_shapes(w, mask, x);
  const auto& k = kernels::ops();

  thread_local std::vector<double> h0, h1;
  h0.assign(x.begin(), x.end());
  double raw[kHeadWidth];

  for (std::size_t l = 0; l < w.layer_count(); ++l) {
    const std::size_t r = w.rows(l);
    const bool last = l == w.cfg.hidden_layers;
    double* out = last ? raw : (h1.resize(r), h1.data());
    k.matvec(w.w(l), r, w.cols(l), h0.data(), w.b(l), out);
    if (!last) {
      for (std::size_t i = 0; i < r; ++i) {
        double v = act(w.cfg.activation, out[i]);
        if (mask != nullptr) v *= mask->scale[l][i];
        out[i] = v;
      }
      std::swap(h0, h1);
    }
  }
  return HeadOutput::from_raw(raw);
}

HeadOutput forward_traced(const Weights& w, const DropoutMask* mask,
                          std::span<const double> x, ForwardTrace& trace) {
  check_shapes(w, mask, x);
  const auto& k = kernels::ops();
  const std::size_t layers = w.layer_count();
  trace.pre.resize(layers);
  trace.post.resize(layers - 1);

  const double* input = x.data();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t r = w.rows(l);
    trace.pre[l].resize(r);
    k.matvec(w.w(l), r, w.cols(l), input, w.b(l), trace.pre[l].data());
    if (l + 1 < layers) {
      trace.post[l].resize(r);
      for (std::size_t i = 0; i < r; ++i) {
        double v = act(w.cfg.activation, trace.pre[l][i]);
        if (mask != nullptr) v *= mask->scale[l][i];
        trace.post[l][i] = v;
      }
      input = trace.post[l].data();
    }
  }
  return HeadOutput::from_raw(trace.pre.back().data());
}

PosteriorPredictive posterior_with_masks(const Weights& w,
                                         const std::vector<DropoutMask>& masks,
                                         std::span<const double> x) {
  PosteriorPredictive pp;
  pp.draws.reserve(masks.size());
  for (const auto& m : masks) pp.draws.push_back(forward(w, &m, x));
  return pp;
}

PosteriorPredictive sample_posterior(const Weights& w, std::span<const double> x,
                                     std::size_t T, std::uint64_t seed) {
  if (T == 0) throw ConfigError("sample_posterior: T must be >= 1");
  return posterior_with_masks(w, make_masks(w.cfg, T, seed), x);
}

}  // namespace cenal::nn
