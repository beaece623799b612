#include "smoothfix/cf_kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>

namespace smoothfix {

void cf_accumulate_point(const double* xs, std::size_t n, std::size_t d, const double* t,
                         CfSums& out) {
    for (std::size_t i = 0; i < n; ++i) {
        double phase = 0.0;
        for (std::size_t k = 0; k < d; ++k) phase += t[k] * xs[i * d + k];
        const double c = std::cos(phase);
        const double s = std::sin(phase);
        out.c += c;
        out.s += s;
        out.c2 += c * c;
        out.s2 += s * s;
    }
    out.n += n;
}

void cf_accumulate_axis_scalar(const double* xs, std::size_t n, double t0, double dt,
                               std::size_t n_points, CfSums* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double x = xs[i];
        double zr = std::cos(t0 * x);
        double zi = std::sin(t0 * x);
        const double rr = std::cos(dt * x);
        const double ri = std::sin(dt * x);
        for (std::size_t k = 0; k < n_points; ++k) {
            out[k].c += zr;
            out[k].s += zi;
            out[k].c2 += zr * zr;
            out[k].s2 += zi * zi;
            const double nr = zr * rr - zi * ri;
            zi = zr * ri + zi * rr;
            zr = nr;
        }
    }
    for (std::size_t k = 0; k < n_points; ++k) out[k].n += n;
}

namespace {

std::atomic<bool> g_force_scalar{false};

bool env_force_scalar() {
    static const bool v = std::getenv("SMOOTHFIX_FORCE_SCALAR") != nullptr;
    return v;
}

}  // namespace

void force_scalar_kernels(bool on) { g_force_scalar.store(on); }

bool cf_avx2_available() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

void cf_accumulate_axis(const double* xs, std::size_t n, double t0, double dt,
                        std::size_t n_points, CfSums* out) {
#if defined(__x86_64__)
    if (!g_force_scalar.load() && !env_force_scalar() && cf_avx2_available()) {
        cf_accumulate_axis_avx2(xs, n, t0, dt, n_points, out);
        return;
    }
#endif
    cf_accumulate_axis_scalar(xs, n, t0, dt, n_points, out);
}

std::string cf_kernel_name() {
    if (!g_force_scalar.load() && !env_force_scalar() && cf_avx2_available()) return "axis-avx2";
    return "axis-scalar";
}

}  // namespace smoothfix
