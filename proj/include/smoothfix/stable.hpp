#pragma once

#include <string>
#include <vector>

#include "smoothfix/common.hpp"
#include "smoothfix/rng.hpp"

namespace smoothfix {

/// Discrete finite measure on the unit sphere S^{d-1}.
struct SpectralMeasure {
    std::vector<Vec> atoms;
    std::vector<double> weights;
    bool symmetric = false;

    std::size_t size() const { return atoms.size(); }
    double total_mass() const;
    int dimension() const { return atoms.empty() ? 0 : static_cast<int>(atoms.front().size()); }

    /// Checks unit atoms, positive weights and, if flagged symmetric,
    /// closure under s -> -s with equal weights.
    void validate() const;

    static SpectralMeasure point(Vec direction, double weight = 1.0);
    /// (delta_s + delta_{-s}) scaled to the given total mass.
    static SpectralMeasure symmetric_pair(Vec direction, double total_mass = 1.0);
};

enum class StableRegime {
    Skewed,            ///< alpha != 1, exponent with the tan(pi alpha/2) tilt
    Symmetric,         ///< symmetric sigma, real exponent
    AlphaOneCentered,  ///< alpha = 1 with the (2/pi) u log|u| correction; first moments of sigma vanish
    Gaussian,          ///< alpha = 2 with covariance matrix
};

std::string to_string(StableRegime r);

struct StableLawSpec {
    double alpha = 2.0;
    SpectralMeasure sigma;
    Vec shift;                    ///< deterministic centering a; empty means 0
    StableRegime regime = StableRegime::Symmetric;
    std::vector<double> gaussian_cov;  ///< row-major d x d, Gaussian regime only
    int dimension = 1;

    void validate() const;

    static StableLawSpec gaussian(std::vector<double> cov, int d);
    static StableLawSpec symmetric(double alpha, SpectralMeasure sigma);
    static StableLawSpec skewed(double alpha, SpectralMeasure sigma);
    static StableLawSpec alpha1_centered(SpectralMeasure sigma, Vec shift = {});
};

/// The deterministic characteristic exponent: log of the CF of one draw
/// (the part multiplying W in the fixed-point representation, plus
/// i<a, t> when a shift is present). Zero at t = 0.
Complex stable_cf_exponent(const StableLawSpec& spec, const Vec& t);

/// One draw with CF exp(stable_cf_exponent(t)): per spectral atom an
/// independent scalar stable variate scaled by w^{1/alpha} along the atom
/// direction; multinormal in the Gaussian regime.
Vec sample_stable(const StableLawSpec& spec, Rng& rng);

/// Scalar samplers (exact transform method, one uniform angle + one
/// exponential per draw).
double sample_symmetric_stable(double alpha, Rng& rng);
/// Totally skewed: CF exp(-|u|^alpha (1 - i sign(u) tan(pi alpha / 2))).
double sample_skewed_stable(double alpha, Rng& rng);
/// alpha = 1 log-form: CF exp(-|u| - i (2/pi) u log|u|).
double sample_log_skewed_stable(Rng& rng);

}  // namespace smoothfix
