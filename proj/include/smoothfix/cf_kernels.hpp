#pragma once

#include <cstddef>
#include <string>

namespace smoothfix {

/// Accumulated sums for the empirical characteristic function at one grid
/// point: sums of cos/sin phases and their squares (for componentwise
/// standard errors). Merging is associative, so batches can be folded in
/// any grouping.
struct CfSums {
    double c = 0.0;
    double s = 0.0;
    double c2 = 0.0;
    double s2 = 0.0;
    std::size_t n = 0;

    void merge(const CfSums& other) {
        c += other.c;
        s += other.s;
        c2 += other.c2;
        s2 += other.s2;
        n += other.n;
    }
};

/// Reference kernel for one arbitrary grid point t in R^d; samples are
/// row-major n x d.
void cf_accumulate_point(const double* xs, std::size_t n, std::size_t d, const double* t,
                         CfSums& out);

/// Scalar reference kernel for a uniform 1-d grid t_k = t0 + k*dt: two trig
/// evaluations per sample, then a complex rotation across the grid.
void cf_accumulate_axis_scalar(const double* xs, std::size_t n, double t0, double dt,
                               std::size_t n_points, CfSums* out);

#if defined(__x86_64__)
/// AVX2 variant of the axis kernel, four samples per sweep.
void cf_accumulate_axis_avx2(const double* xs, std::size_t n, double t0, double dt,
                             std::size_t n_points, CfSums* out);
#endif

/// Dispatches to the best axis kernel available at runtime.
void cf_accumulate_axis(const double* xs, std::size_t n, double t0, double dt,
                        std::size_t n_points, CfSums* out);

/// Name of the kernel cf_accumulate_axis currently dispatches to.
std::string cf_kernel_name();

/// Pins dispatch to the scalar reference kernel (also honored when the
/// SMOOTHFIX_FORCE_SCALAR environment variable is set).
void force_scalar_kernels(bool on);

bool cf_avx2_available();

}  // namespace smoothfix
