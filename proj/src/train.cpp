#include "cenal/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cenal/errors.hpp"
#include "cenal/kernels.hpp"
#include "cenal/prob.hpp"
#include "cenal/rng.hpp"

namespace cenal::nn {

namespace {

double act_grad(Activation a, double pre) {
  if (a == Activation::relu) return pre > 0.0 ? 1.0 : 0.0;
  // d/dx of x*Phi(x) = Phi(x) + x*phi(x)
  const double cdf = 0.5 * (1.0 + std::erf(pre * 0.70710678118654752440));
  const double pdf = std::exp(-0.5 * pre * pre) * 0.39894228040143267794;
  return cdf + pre * pdf;
}

// Chain rule through the head transforms: softplus (+ floor) for the two
// scales, identity for the means, logit passthrough for lambda.
void head_delta(const losses::LossGrad5& g5, const HeadOutput& h, double out[kHeadWidth]) {
  auto scale_grad = [](double raw) {
    if (prob::softplus(raw) < prob::kSigmaFloor) return 0.0;  // clamped at floor
    return prob::logistic(raw);
  };
  out[0] = g5.d_mu_star;
  out[1] = g5.d_sigma_star * scale_grad(h.raw_sigma_star);
  out[2] = g5.d_mu_obs;
  out[3] = g5.d_sigma_obs * scale_grad(h.raw_sigma_obs);
  out[4] = g5.d_lambda_logit;
}

}  // namespace

void adam_step(Weights& w, const std::vector<double>& g, AdamState& state,
               const TrainConfig& cfg) {
  if (g.size() != w.params.size()) throw ShapeError("adam_step: gradient size mismatch");
  for (double v : g) {
    if (!std::isfinite(v)) throw TrainingError("adam_step: non-finite gradient");
  }
  if (state.m.size() != g.size()) {
    state.m.assign(g.size(), 0.0);
    state.v.assign(g.size(), 0.0);
    state.t = 0;
  }
  ++state.t;
  const double b1 = cfg.beta1;
  const double b2 = cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < g.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g[i] * g[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    w.params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

BatchGrad grad_batch(const losses::PerSampleLoss& loss, const Weights& w,
                     const data::CensoredSample* const* batch, std::size_t n,
                     const DropoutMask* mask) {
  if (n == 0) throw ConfigError("grad_batch: empty batch");
  const auto& k = kernels::ops();
  const std::size_t layers = w.layer_count();

  BatchGrad out;
  out.grad.assign(w.params.size(), 0.0);

  ForwardTrace trace;
  std::vector<double> cur, up;
  for (std::size_t i = 0; i < n; ++i) {
    const data::CensoredSample& s = *batch[i];
    const HeadOutput h = forward_traced(w, mask, s.x, trace);
    const double v = loss.value(h, s);
    if (!std::isfinite(v)) {
      throw TrainingError("grad_batch: non-finite loss", static_cast<std::ptrdiff_t>(i));
    }
    out.loss += v;

    const losses::LossGrad5 g5 = loss.grad(h, s);
    cur.resize(kHeadWidth);
    head_delta(g5, h, cur.data());

    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t r = w.rows(l);
      const std::size_t c = w.cols(l);
      const double* input = l == 0 ? s.x.data() : trace.post[l - 1].data();
      double* gw = out.grad.data() + w.w_offset(l);
      double* gb = out.grad.data() + w.b_offset(l);
      for (std::size_t row = 0; row < r; ++row) {
        if (cur[row] != 0.0) k.axpy(cur[row], input, c, gw + row * c);
        gb[row] += cur[row];
      }
      if (l == 0) break;
      up.assign(c, 0.0);
      const double* wl = w.w(l);
      for (std::size_t row = 0; row < r; ++row) {
        if (cur[row] != 0.0) k.axpy(cur[row], wl + row * c, c, up.data());
      }
      // through the mask and the activation of layer l-1
      cur.resize(c);
      for (std::size_t j = 0; j < c; ++j) {
        double d = up[j];
        if (mask != nullptr) d *= mask->scale[l - 1][j];
        cur[j] = d * act_grad(w.cfg.activation, trace.pre[l - 1][j]);
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : out.grad) v *= inv;
  out.loss *= inv;
  return out;
}

BatchGrad grad_batch(const losses::PerSampleLoss& loss, const Weights& w,
                     const data::Dataset& batch, const DropoutMask* mask) {
  std::vector<const data::CensoredSample*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& s : batch) ptrs.push_back(&s);
  return grad_batch(loss, w, ptrs.data(), ptrs.size(), mask);
}

double dataset_censored_nll(const Weights& w, const data::Dataset& d) {
  if (d.empty()) throw ConfigError("dataset_censored_nll: empty dataset");
  double sum = 0.0;
  for (const auto& s : d) {
    sum += losses::censored_nll_term(forward(w, nullptr, s.x), s);
  }
  return sum / static_cast<double>(d.size());
}

Weights train(const data::Dataset& train_set, const data::Dataset& val_set,
              const NetworkConfig& net_cfg, const TrainConfig& train_cfg,
              const Weights* warm_start) {
  if (train_set.empty()) throw ConfigError("train: empty training set");
  if (val_set.empty()) throw ConfigError("train: empty validation set");

  Weights w = warm_start != nullptr ? *warm_start : init_weights(net_cfg);
  if (w.cfg.input_dim != train_set.front().x.size()) {
    throw ShapeError("train: input_dim does not match data");
  }

  if (warm_start == nullptr) {
    // Start the location heads and the censoring logit at the train-set
    // statistics: at this learning rate the global target offset would
    // otherwise eat thousands of optimizer steps.  The scale heads keep
    // their canonical softplus(~0) start.  Deterministic given the data.
    double mean = 0.0;
    double unc = 0.0;
    for (const auto& s : train_set) {
      mean += s.y;
      unc += s.uncensored ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(train_set.size());
    mean /= n;
    const double p = std::clamp(unc / n, 0.02, 0.98);
    double* head_bias = w.params.data() + w.b_offset(net_cfg.hidden_layers);
    head_bias[0] = mean;
    head_bias[2] = mean;
    head_bias[4] = std::log(p / (1.0 - p));
  }

  AdamState state;
  losses::TotalLoss objective;
  rng::RandomStream rs(rng::derive(train_cfg.seed, {rng::tag::train}));

  const std::size_t n = train_set.size();
  const std::size_t bs = train_cfg.batch_size != 0
                             ? std::min(train_cfg.batch_size, n)
                             : (n <= 1024 ? n : std::size_t{256});

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const data::CensoredSample*> ptrs(n);

  Weights best = w;
  double best_nll = std::numeric_limits<double>::infinity();
  if (warm_start != nullptr) {
    const double initial = dataset_censored_nll(w, val_set);
    if (std::isfinite(initial)) best_nll = initial;
  }
  std::size_t bad = 0;
  std::size_t bad_nonfinite = 0;
  const std::size_t nonfinite_limit = std::max<std::size_t>(train_cfg.patience, 1);

  for (std::size_t epoch = 0; epoch < train_cfg.max_epochs; ++epoch) {
    if (bs < n) {
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rs.below(i)]);
    }
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t count = std::min(bs, n - start);
      for (std::size_t i = 0; i < count; ++i) ptrs[i] = &train_set[order[start + i]];
      const DropoutMask mask = sample_mask(net_cfg, rs, epoch);
      const BatchGrad bg = grad_batch(objective, w, ptrs.data(), count, &mask);
      adam_step(w, bg.grad, state, train_cfg);
    }

    const double val_nll = dataset_censored_nll(w, val_set);
    if (!std::isfinite(val_nll)) {
      if (++bad_nonfinite >= nonfinite_limit) {
        throw TrainingError("train: validation NLL diverged");
      }
      ++bad;
    } else {
      bad_nonfinite = 0;
      if (val_nll < best_nll) {
        best_nll = val_nll;
        best = w;
        bad = 0;
      } else {
        ++bad;
      }
    }
    if (bad >= train_cfg.patience) break;
  }
  return best;
}

}  // namespace cenal::nn
