#if defined(__x86_64__)

#include <immintrin.h>

#include <cmath>

#include "smoothfix/cf_kernels.hpp"

namespace smoothfix {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

__attribute__((target("avx2,fma"))) void cf_accumulate_axis_avx2(const double* xs, std::size_t n,
                                                                 double t0, double dt,
                                                                 std::size_t n_points,
                                                                 CfSums* out) {
    constexpr std::size_t kMaxPoints = 256;
    if (n_points > kMaxPoints) {
        cf_accumulate_axis_scalar(xs, n, t0, dt, n_points, out);
        return;
    }
    // per-point vector accumulators, one lane per sample in the block
    alignas(32) __m256d acc_c[kMaxPoints], acc_s[kMaxPoints], acc_c2[kMaxPoints],
        acc_s2[kMaxPoints];
    for (std::size_t k = 0; k < n_points; ++k) {
        acc_c[k] = _mm256_setzero_pd();
        acc_s[k] = _mm256_setzero_pd();
        acc_c2[k] = _mm256_setzero_pd();
        acc_s2[k] = _mm256_setzero_pd();
    }

    std::size_t i = 0;
    alignas(32) double zr_a[4], zi_a[4], rr_a[4], ri_a[4];
    for (; i + 4 <= n; i += 4) {
        for (int lane = 0; lane < 4; ++lane) {
            const double x = xs[i + lane];
            zr_a[lane] = std::cos(t0 * x);
            zi_a[lane] = std::sin(t0 * x);
            rr_a[lane] = std::cos(dt * x);
            ri_a[lane] = std::sin(dt * x);
        }
        __m256d zr = _mm256_load_pd(zr_a);
        __m256d zi = _mm256_load_pd(zi_a);
        const __m256d rr = _mm256_load_pd(rr_a);
        const __m256d ri = _mm256_load_pd(ri_a);
        for (std::size_t k = 0; k < n_points; ++k) {
            acc_c[k] = _mm256_add_pd(acc_c[k], zr);
            acc_s[k] = _mm256_add_pd(acc_s[k], zi);
            acc_c2[k] = _mm256_fmadd_pd(zr, zr, acc_c2[k]);
            acc_s2[k] = _mm256_fmadd_pd(zi, zi, acc_s2[k]);
            const __m256d nr = _mm256_fmsub_pd(zr, rr, _mm256_mul_pd(zi, ri));
            zi = _mm256_fmadd_pd(zr, ri, _mm256_mul_pd(zi, rr));
            zr = nr;
        }
    }
    for (std::size_t k = 0; k < n_points; ++k) {
        out[k].c += hsum(acc_c[k]);
        out[k].s += hsum(acc_s[k]);
        out[k].c2 += hsum(acc_c2[k]);
        out[k].s2 += hsum(acc_s2[k]);
        out[k].n += i;
    }
    if (i < n) cf_accumulate_axis_scalar(xs + i, n - i, t0, dt, n_points, out);
}

}  // namespace smoothfix

#endif  // __x86_64__
