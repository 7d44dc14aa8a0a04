#include <cmath>
#include <cstddef>

#include "cenal/kernels.hpp"
#include "cenal/prob.hpp"

// Reference lane: straight loops over the scalar primitives.

namespace cenal::kernels {

namespace {

void s_gaussian_log_pdf(const double* y, std::size_t n, double mu, double sigma,
                        double* out) {
  const double c = -std::log(sigma) - prob::kLogSqrt2Pi;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (y[i] - mu) / sigma;
    out[i] = c - 0.5 * z * z;
  }
}

void s_gaussian_log_survival(const double* y, std::size_t n, double mu, double sigma,
                             double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = prob::std_normal_log_survival((y[i] - mu) / sigma);
  }
}

void s_vexp(const double* x, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void s_vlog(const double* x, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::log(x[i]);
}

void s_vlog1p(const double* x, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::log1p(x[i]);
}

void s_matvec(const double* w, std::size_t rows, std::size_t cols, const double* x,
              const double* bias, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    double acc = bias != nullptr ? bias[r] : 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

void s_axpy(double a, const double* x, std::size_t n, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_logsumexp_cols(const double* m, std::size_t rows, std::size_t cols, double* out) {
  for (std::size_t j = 0; j < cols; ++j) {
    double mx = m[j];
    for (std::size_t r = 1; r < rows; ++r) mx = std::fmax(mx, m[r * cols + j]);
    double sum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) sum += std::exp(m[r * cols + j] - mx);
    out[j] = mx + std::log(sum);
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table{
      "scalar",          s_gaussian_log_pdf, s_gaussian_log_survival,
      s_vexp,            s_vlog,             s_vlog1p,
      s_matvec,          s_axpy,             s_logsumexp_cols,
  };
  return table;
}

}  // namespace cenal::kernels
