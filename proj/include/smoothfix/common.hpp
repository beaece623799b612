#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace smoothfix {

using Vec = std::vector<double>;
using Complex = std::complex<double>;

/// Thrown when a model/spec violates a structural constraint.
struct SpecError : std::runtime_error {
    explicit SpecError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when a configuration file fails validation.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when an estimator cannot produce a result (empty batch,
/// missing bracket, undefined ratio, extrapolation off the grid hull).
struct EstimationError : std::runtime_error {
    explicit EstimationError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double c, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline Vec zeros(std::size_t d) { return Vec(d, 0.0); }

}  // namespace smoothfix
