#pragma once

#include <cstddef>

namespace cenal::kernels {

// Batch kernels behind a runtime-selected lane.  The scalar lane is the
// reference (it maps the cenal::prob scalar routines elementwise); the AVX2
// lane is an intrinsics implementation equivalence-tested against it.
// Selection happens once per process: CENAL_KERNELS=scalar|avx2|auto, or
// select_lane() from code.

enum class Lane { scalar = 0, avx2 = 1 };

struct Ops {
  const char* name;

  // out[i] = log N(y[i] | mu, sigma^2)
  void (*gaussian_log_pdf)(const double* y, std::size_t n, double mu, double sigma,
                           double* out);
  // out[i] = log(1 - Phi((y[i]-mu)/sigma))
  void (*gaussian_log_survival)(const double* y, std::size_t n, double mu, double sigma,
                                double* out);

  void (*vexp)(const double* x, std::size_t n, double* out);
  void (*vlog)(const double* x, std::size_t n, double* out);
  void (*vlog1p)(const double* x, std::size_t n, double* out);

  // out[r] = bias[r] + sum_c w[r*cols + c] * x[c]; bias may be null.
  void (*matvec)(const double* w, std::size_t rows, std::size_t cols, const double* x,
                 const double* bias, double* out);

  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, std::size_t n, double* y);

  // Column-wise log-sum-exp of a row-major rows x cols matrix.
  void (*logsumexp_cols)(const double* m, std::size_t rows, std::size_t cols, double* out);
};

bool lane_available(Lane lane);
const char* lane_name(Lane lane);

Lane active_lane();
void select_lane(Lane lane);

/// Active lane's kernel table.
const Ops& ops();
/// Specific lane's kernel table (for equivalence tests).
const Ops& ops(Lane lane);

}  // namespace cenal::kernels
