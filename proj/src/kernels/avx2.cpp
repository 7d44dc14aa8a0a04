#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstring>
#include <limits>
#include <vector>

#include "cenal/kernels.hpp"
#include "cenal/prob.hpp"

// AVX2+FMA lane.  Compiled with -mavx2 -mfma only for this translation
// unit; the dispatcher keeps it unreachable on CPUs without the features.

namespace cenal::kernels {

namespace {

inline __m256d set1(double v) { return _mm256_set1_pd(v); }

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// ---------------------------------------------------------------------------
// exp, log, log1p (Cephes rational approximations, double precision)
// ---------------------------------------------------------------------------

inline __m256d exp_pd(__m256d x) {
  const __m256d max_in = set1(709.782712893383996843);   // ln(DBL_MAX)
  const __m256d min_in = set1(-745.133219101941108420);  // ln(2^-1075)

  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, set1(-746.0)), set1(710.0));

  // n = round(x / ln 2); r = x - n*ln2 with a two-part ln2 split.
  const __m256d log2e = set1(1.4426950408889634074);
  __m128i n_i32 = _mm256_cvtpd_epi32(_mm256_mul_pd(xc, log2e));
  __m256d n = _mm256_cvtepi32_pd(n_i32);
  __m256d r = _mm256_fnmadd_pd(n, set1(6.93145751953125e-1), xc);
  r = _mm256_fnmadd_pd(n, set1(1.42860682030941723212e-6), r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = set1(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, rr, set1(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, rr, set1(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = set1(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, rr, set1(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, rr, set1(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, rr, set1(2.00000000000000000005e0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(set1(2.0), e, set1(1.0));

  // Scale by 2^n in two steps so gradual underflow still works.
  __m128i k1_32 = _mm_srai_epi32(n_i32, 1);
  __m128i k2_32 = _mm_sub_epi32(n_i32, k1_32);
  __m256i e1 = _mm256_slli_epi64(
      _mm256_add_epi64(_mm256_cvtepi32_epi64(k1_32), _mm256_set1_epi64x(1023)), 52);
  __m256i e2 = _mm256_slli_epi64(
      _mm256_add_epi64(_mm256_cvtepi32_epi64(k2_32), _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(e1));
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(e2));

  e = _mm256_blendv_pd(e, _mm256_setzero_pd(), _mm256_cmp_pd(x, min_in, _CMP_LT_OQ));
  e = _mm256_blendv_pd(e, set1(std::numeric_limits<double>::infinity()),
                       _mm256_cmp_pd(x, max_in, _CMP_GT_OQ));
  return e;
}

// Chebyshev coefficients of (log(1+f) - f + f^2/2) / f^3 on
// [sqrt(1/2)-1, sqrt(2)-1]; assembled log error < 2e-18 abs.
constexpr double kChebLog[] = {
    0x1.5247bea137537p-2,   -0x1.5d46ea44762cdp-4,  0x1.802f50793eebdp-7,
    -0x1.b7e88e1d7cfd8p-10, 0x1.02f60a782989fp-12,  -0x1.372bb9637313ap-15,
    0x1.7bca3691268c1p-18,  -0x1.d54ad9e2f517dp-21, 0x1.24da9a75bccb1p-23,
    -0x1.7087bcda1001ep-26, 0x1.d2fd5a9f4fc47p-29,  -0x1.29a184c681199p-31,
    0x1.7d527a2272befp-34,  -0x1.eab86df95f8ecp-37, 0x1.3cfc92fbecc8ap-39,
    -0x1.9af0c890cf16ap-42, 0x1.0b319989715d0p-44,  -0x1.5c6c08f7a3593p-47,
    0x1.c77aff230e559p-50,  -0x1.2a647dfd80399p-52, 0x1.87c582497afbep-55,
    -0x1.01ac2465832b0p-57, 0x1.5387aba0f726fp-60,  -0x1.bfca262e1a22ap-63,
    0x1.200ade3ac385fp-65,
};
constexpr int kChebLogDeg = 24;
constexpr double kLogA = -0x1.2bec333018867p-2;  // sqrt(1/2) - 1
constexpr double kLogB = 0x1.a827999fcef32p-2;   // sqrt(2) - 1

inline __m256d clenshaw(const double* c, int deg, __m256d t);

inline __m256d log_pd(__m256d x) {
  const __m256d one = set1(1.0);
  const __m256d dbl_min = set1(std::numeric_limits<double>::min());

  // Rescale subnormals so the exponent extraction below is valid.
  const __m256d sub_mask = _mm256_cmp_pd(x, dbl_min, _CMP_LT_OQ);
  const __m256d xs = _mm256_blendv_pd(x, _mm256_mul_pd(x, set1(0x1.0p54)), sub_mask);
  const __m256d e_bias =
      _mm256_blendv_pd(_mm256_setzero_pd(), set1(54.0), sub_mask);

  __m256i bits = _mm256_castpd_si256(xs);
  __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  // int64 lanes hold 0..2046; compact them into int32 lanes for conversion.
  __m256i packed = _mm256_permutevar8x32_epi32(exp_bits,
                                               _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0));
  __m256d e = _mm256_cvtepi32_pd(_mm256_castsi256_si128(packed));
  e = _mm256_sub_pd(e, set1(1023.0));
  e = _mm256_sub_pd(e, e_bias);

  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));  // [1, 2)

  const __m256d sqrt2 = set1(1.41421356237309504880);
  const __m256d hi = _mm256_cmp_pd(m, sqrt2, _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, set1(0.5)), hi);
  e = _mm256_add_pd(e, _mm256_and_pd(hi, one));
  const __m256d f = _mm256_sub_pd(m, one);

  const __m256d t = _mm256_fmadd_pd(f, set1(2.0 / (kLogB - kLogA)),
                                    set1(-(kLogA + kLogB) / (kLogB - kLogA)));
  const __m256d g = clenshaw(kChebLog, kChebLogDeg, t);

  const __m256d z = _mm256_mul_pd(f, f);
  __m256d y = _mm256_mul_pd(_mm256_mul_pd(f, z), g);
  y = _mm256_fnmadd_pd(e, set1(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(set1(0.5), z, y);
  __m256d res = _mm256_add_pd(f, y);
  res = _mm256_fmadd_pd(e, set1(0.693359375), res);

  // x == 0 -> -inf (negative/NaN inputs are out of contract).
  const __m256d zero_mask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ);
  res = _mm256_blendv_pd(res, set1(-std::numeric_limits<double>::infinity()), zero_mask);
  return res;
}

inline __m256d log1p_pd(__m256d x) {
  const __m256d one = set1(1.0);
  const __m256d u = _mm256_add_pd(one, x);
  const __m256d d = _mm256_sub_pd(u, one);
  const __m256d d_zero = _mm256_cmp_pd(d, _mm256_setzero_pd(), _CMP_EQ_OQ);
  // log(u) * x/(u-1) corrects the rounding of 1+x; when u == 1 the true
  // answer is x itself.
  const __m256d safe_d = _mm256_blendv_pd(d, one, d_zero);
  const __m256d corr = _mm256_div_pd(x, safe_d);
  const __m256d res = _mm256_mul_pd(log_pd(u), corr);
  return _mm256_blendv_pd(res, x, d_zero);
}

// ---------------------------------------------------------------------------
// Standard normal log survival
// ---------------------------------------------------------------------------

// Chebyshev coefficients for log R(z) (R the Mills ratio) on z in [0, 6],
// t = z/3 - 1.  Max abs error 1.3e-16 against a 60-digit reference.
constexpr double kChebCore[] = {
    -0x1.00a5efe7bc1dcp+0, -0x1.f2fb8adf4a694p-1, 0x1.9173e65cf8354p-3,
    -0x1.71937644f9e11p-5, 0x1.4be5d463f60abp-7,  -0x1.1084e134bdb16p-9,
    0x1.7cd13698c0531p-12, -0x1.7774f6d3d287bp-15, -0x1.3080dc085c712p-22,
    0x1.43aacafba1309p-19, -0x1.f97e5f9d64fafp-21, 0x1.0414671343508p-22,
    -0x1.747d0f9ddf9c6p-25, 0x1.b6f8fcc7caca2p-29, 0x1.77f9bde7a866bp-30,
    -0x1.ac5b2c4c4f858p-31, 0x1.0a9620ee830b5p-32, -0x1.cf0de30a86afcp-35,
    0x1.d09d55c0932a9p-38, 0x1.6ef69f6e6c5f3p-41, -0x1.9666e09bd17b9p-41,
    0x1.2e2b167ae2bbap-42, -0x1.30541ee98e6a9p-44, 0x1.91556df062945p-47,
    -0x1.16418a197af45p-52, -0x1.7b0c51f43c17fp-51, 0x1.5e842d3b41e62p-52,
    -0x1.95e20d4b9d8b7p-54, 0x1.4ac876afd8bd7p-56,
};
constexpr int kChebCoreDeg = 28;

// Chebyshev coefficients for log(z * R(z)) in w = 1/z on [0, 1/6],
// t = 12w - 1.  Max abs error 7e-19.
constexpr double kChebTail[] = {
    -0x1.45b9f8d463d1ep-7,  -0x1.ae50f7178f126p-7, -0x1.96d29a117e301p-9,
    0x1.999ab449ec4f9p-14,  0x1.2527fbd1594e8p-17, -0x1.f333c7f918d52p-21,
    -0x1.2427cd5447c78p-26, 0x1.3e40b6e6682f3p-27, -0x1.d7b4909167006p-32,
    -0x1.532ea03e1f045p-34, 0x1.969356ea02128p-37, 0x1.09ae1775785a4p-43,
    -0x1.a4d5c6e682690p-43, 0x1.1dd04ef9330b2p-46, 0x1.dea25007ea881p-50,
    -0x1.0e12c5bd30328p-51, 0x1.6a0633931148cp-56, 0x1.0d8313e3db4a0p-57,
    -0x1.88add1fb203f5p-60,
};
constexpr int kChebTailDeg = 18;

inline __m256d clenshaw(const double* c, int deg, __m256d t) {
  const __m256d two_t = _mm256_add_pd(t, t);
  __m256d b1 = _mm256_setzero_pd();
  __m256d b2 = _mm256_setzero_pd();
  for (int k = deg; k >= 1; --k) {
    const __m256d nb = _mm256_fmadd_pd(two_t, b1, _mm256_sub_pd(set1(c[k]), b2));
    b2 = b1;
    b1 = nb;
  }
  return _mm256_fmadd_pd(t, b1, _mm256_sub_pd(set1(c[0]), b2));
}

// log Q(a) for a = |z| >= 0.
inline __m256d log_upper_tail_pd(__m256d a) {
  const __m256d neg_half_sq =
      _mm256_mul_pd(set1(-0.5), _mm256_mul_pd(a, a));
  const __m256d base = _mm256_sub_pd(neg_half_sq, set1(prob::kLogSqrt2Pi));

  const __m256d mid_mask = _mm256_cmp_pd(a, set1(6.0), _CMP_LE_OQ);
  const int mm = _mm256_movemask_pd(mid_mask);

  __m256d core = _mm256_setzero_pd();
  if (mm != 0) {
    const __m256d t = _mm256_fmsub_pd(a, set1(1.0 / 3.0), set1(1.0));
    core = clenshaw(kChebCore, kChebCoreDeg, t);
  }
  __m256d tail = _mm256_setzero_pd();
  if (mm != 0xF) {
    // Keep the reciprocal away from the pole for lanes that take the other
    // branch; they are blended out below.
    const __m256d a_safe = _mm256_max_pd(a, set1(6.0));
    const __m256d w = _mm256_div_pd(set1(1.0), a_safe);
    const __m256d t = _mm256_fmsub_pd(w, set1(12.0), set1(1.0));
    tail = _mm256_sub_pd(clenshaw(kChebTail, kChebTailDeg, t), log_pd(a_safe));
  }
  return _mm256_add_pd(base, _mm256_blendv_pd(tail, core, mid_mask));
}

inline __m256d std_normal_log_survival_pd(__m256d z) {
  const __m256d neg_mask = _mm256_cmp_pd(z, _mm256_setzero_pd(), _CMP_LT_OQ);
  const __m256d a = _mm256_andnot_pd(set1(-0.0), z);  // |z|
  const __m256d pos = log_upper_tail_pd(a);
  if (_mm256_movemask_pd(neg_mask) == 0) return pos;

  // Left side: survival is close to 1, so log1p of the mirrored tail keeps
  // relative accuracy; the clamp keeps it strictly negative after the
  // mirrored tail underflows.
  const __m256d q = exp_pd(pos);
  __m256d left = log1p_pd(_mm256_sub_pd(_mm256_setzero_pd(), q));
  left = _mm256_min_pd(left, set1(-std::numeric_limits<double>::denorm_min()));
  return _mm256_blendv_pd(pos, left, neg_mask);
}

// ---------------------------------------------------------------------------
// Batch wrappers
// ---------------------------------------------------------------------------

// Tail elements run through the same vector path on a padded copy so a
// value's result never depends on its position in the batch.
template <typename F>
inline void map_batch(const double* x, std::size_t n, double* out, F&& fn) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, fn(_mm256_loadu_pd(x + i)));
  }
  if (i < n) {
    alignas(32) double buf[4];
    const std::size_t rem = n - i;
    for (std::size_t k = 0; k < 4; ++k) buf[k] = x[i + (k < rem ? k : rem - 1)];
    alignas(32) double res[4];
    _mm256_store_pd(res, fn(_mm256_load_pd(buf)));
    std::memcpy(out + i, res, rem * sizeof(double));
  }
}

void a_gaussian_log_pdf(const double* y, std::size_t n, double mu, double sigma,
                        double* out) {
  const double c = -std::log(sigma) - prob::kLogSqrt2Pi;
  const double inv = 1.0 / sigma;
  const __m256d vc = set1(c);
  const __m256d vinv = set1(inv);
  const __m256d vmu = set1(mu);
  map_batch(y, n, out, [&](__m256d vy) {
    const __m256d z = _mm256_mul_pd(_mm256_sub_pd(vy, vmu), vinv);
    return _mm256_fnmadd_pd(_mm256_mul_pd(set1(0.5), z), z, vc);
  });
}

void a_gaussian_log_survival(const double* y, std::size_t n, double mu, double sigma,
                             double* out) {
  const __m256d vinv = set1(1.0 / sigma);
  const __m256d vmu = set1(mu);
  map_batch(y, n, out, [&](__m256d vy) {
    return std_normal_log_survival_pd(_mm256_mul_pd(_mm256_sub_pd(vy, vmu), vinv));
  });
}

void a_vexp(const double* x, std::size_t n, double* out) {
  map_batch(x, n, out, [](__m256d v) { return exp_pd(v); });
}

void a_vlog(const double* x, std::size_t n, double* out) {
  map_batch(x, n, out, [](__m256d v) { return log_pd(v); });
}

void a_vlog1p(const double* x, std::size_t n, double* out) {
  map_batch(x, n, out, [](__m256d v) { return log1p_pd(v); });
}

void a_matvec(const double* w, std::size_t rows, std::size_t cols, const double* x,
              const double* bias, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 16 <= cols; c += 16) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c + 4), _mm256_loadu_pd(x + c + 4), acc1);
      acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c + 8), _mm256_loadu_pd(x + c + 8), acc2);
      acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c + 12), _mm256_loadu_pd(x + c + 12), acc3);
    }
    for (; c + 4 <= cols; c += 4) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc0);
    }
    double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; c < cols; ++c) acc += row[c] * x[c];
    out[r] = (bias != nullptr ? bias[r] : 0.0) + acc;
  }
}

void a_axpy(double a, const double* x, std::size_t n, double* y) {
  const __m256d va = set1(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void a_logsumexp_cols(const double* m, std::size_t rows, std::size_t cols, double* out) {
  auto run4 = [&](const double* base, std::size_t stride, double* dst) {
    __m256d mx = _mm256_loadu_pd(base);
    for (std::size_t r = 1; r < rows; ++r) {
      mx = _mm256_max_pd(mx, _mm256_loadu_pd(base + r * stride));
    }
    __m256d s = _mm256_setzero_pd();
    for (std::size_t r = 0; r < rows; ++r) {
      s = _mm256_add_pd(s, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(base + r * stride), mx)));
    }
    _mm256_storeu_pd(dst, _mm256_add_pd(mx, log_pd(s)));
  };

  std::size_t j = 0;
  for (; j + 4 <= cols; j += 4) run4(m + j, cols, out + j);
  if (j < cols) {
    const std::size_t rem = cols - j;
    // Gather the ragged tail into a contiguous pad so it runs the same code.
    std::vector<double> scratch(rows * 4);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < 4; ++k) {
        scratch[r * 4 + k] = m[r * cols + j + (k < rem ? k : rem - 1)];
      }
    }
    alignas(32) double res[4];
    run4(scratch.data(), 4, res);
    std::memcpy(out + j, res, rem * sizeof(double));
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops table{
      "avx2",   a_gaussian_log_pdf, a_gaussian_log_survival,
      a_vexp,   a_vlog,             a_vlog1p,
      a_matvec, a_axpy,             a_logsumexp_cols,
  };
  return table;
}

}  // namespace cenal::kernels
