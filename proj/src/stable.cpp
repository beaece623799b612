#include "smoothfix/stable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace smoothfix {

namespace {
constexpr double kPi = std::numbers::pi;
}

double SpectralMeasure::total_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

void SpectralMeasure::validate() const {
    if (atoms.size() != weights.size()) throw SpecError("spectral measure: atoms/weights mismatch");
    const int d = dimension();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (static_cast<int>(atoms[i].size()) != d)
            throw SpecError("spectral measure: mixed atom dimensions");
        if (std::fabs(norm(atoms[i]) - 1.0) > 1e-12)
            throw SpecError("spectral measure: atom off the unit sphere");
        if (!(weights[i] > 0.0)) throw SpecError("spectral measure: weights must be positive");
    }
    if (symmetric) {
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            bool matched = false;
            for (std::size_t j = 0; j < atoms.size(); ++j) {
                double dist = 0.0;
                for (std::size_t k = 0; k < atoms[i].size(); ++k)
                    dist += std::fabs(atoms[i][k] + atoms[j][k]);
                if (dist < 1e-12 && std::fabs(weights[i] - weights[j]) < 1e-12) {
                    matched = true;
                    break;
                }
            }
            if (!matched)
                throw SpecError("spectral measure flagged symmetric but not closed under s -> -s");
        }
    }
}

SpectralMeasure SpectralMeasure::point(Vec direction, double weight) {
    SpectralMeasure m;
    m.atoms.push_back(std::move(direction));
    m.weights.push_back(weight);
    return m;
}

SpectralMeasure SpectralMeasure::symmetric_pair(Vec direction, double total_mass) {
    SpectralMeasure m;
    Vec neg = direction;
    for (double& x : neg) x = -x;
    m.atoms.push_back(std::move(direction));
    m.atoms.push_back(std::move(neg));
    m.weights = {total_mass / 2.0, total_mass / 2.0};
    m.symmetric = true;
    return m;
}

std::string to_string(StableRegime r) {
    switch (r) {
        case StableRegime::Skewed: return "skewed";
        case StableRegime::Symmetric: return "symmetric";
        case StableRegime::AlphaOneCentered: return "alpha1-centered";
        case StableRegime::Gaussian: return "gaussian";
    }
    return "?";
}

void StableLawSpec::validate() const {
    if (!(alpha > 0.0) || alpha > 2.0) throw SpecError("stable index must lie in (0, 2]");
    if (!shift.empty() && static_cast<int>(shift.size()) != dimension)
        throw SpecError("stable shift has wrong dimension");
    if (regime == StableRegime::Gaussian) {
        if (static_cast<int>(gaussian_cov.size()) != dimension * dimension)
            throw SpecError("gaussian regime needs a d x d covariance");
        for (int i = 0; i < dimension; ++i)
            for (int j = 0; j < i; ++j)
                if (std::fabs(gaussian_cov[i * dimension + j] - gaussian_cov[j * dimension + i]) >
                    1e-12)
                    throw SpecError("gaussian covariance must be symmetric");
        return;
    }
    if (sigma.size() > 0) {
        sigma.validate();
        if (sigma.dimension() != dimension) throw SpecError("spectral measure dimension mismatch");
    }
    switch (regime) {
        case StableRegime::Skewed:
            if (alpha == 1.0)
                throw SpecError(
                    "skewed regime is undefined at alpha = 1; use the alpha1-centered form");
            break;
        case StableRegime::Symmetric:
            if (sigma.size() > 0 && !sigma.symmetric)
                throw SpecError("symmetric regime requires a symmetric spectral measure");
            break;
        case StableRegime::AlphaOneCentered: {
            if (alpha != 1.0) throw SpecError("alpha1-centered regime requires alpha = 1");
            for (int k = 0; k < dimension; ++k) {
                double first_moment = 0.0;
                for (std::size_t i = 0; i < sigma.size(); ++i)
                    first_moment += sigma.weights[i] * sigma.atoms[i][k];
                if (std::fabs(first_moment) > 1e-10)
                    throw SpecError(
                        "alpha1-centered regime requires vanishing first moments of sigma");
            }
            break;
        }
        case StableRegime::Gaussian: break;
    }
}

StableLawSpec StableLawSpec::gaussian(std::vector<double> cov, int d) {
    StableLawSpec s;
    s.alpha = 2.0;
    s.regime = StableRegime::Gaussian;
    s.gaussian_cov = std::move(cov);
    s.dimension = d;
    s.validate();
    return s;
}

StableLawSpec StableLawSpec::symmetric(double alpha, SpectralMeasure sigma) {
    StableLawSpec s;
    s.alpha = alpha;
    s.regime = StableRegime::Symmetric;
    s.dimension = sigma.dimension() == 0 ? 1 : sigma.dimension();
    s.sigma = std::move(sigma);
    s.validate();
    return s;
}

StableLawSpec StableLawSpec::skewed(double alpha, SpectralMeasure sigma) {
    StableLawSpec s;
    s.alpha = alpha;
    s.regime = StableRegime::Skewed;
    s.dimension = sigma.dimension() == 0 ? 1 : sigma.dimension();
    s.sigma = std::move(sigma);
    s.validate();
    return s;
}

StableLawSpec StableLawSpec::alpha1_centered(SpectralMeasure sigma, Vec shift) {
    StableLawSpec s;
    s.alpha = 1.0;
    s.regime = StableRegime::AlphaOneCentered;
    s.dimension = sigma.dimension() == 0 ? (shift.empty() ? 1 : static_cast<int>(shift.size()))
                                         : sigma.dimension();
    s.sigma = std::move(sigma);
    s.shift = std::move(shift);
    s.validate();
    return s;
}

Complex stable_cf_exponent(const StableLawSpec& spec, const Vec& t) {
    Complex e{0.0, 0.0};
    if (!spec.shift.empty()) e += Complex{0.0, dot(spec.shift, t)};

    switch (spec.regime) {
        case StableRegime::Gaussian: {
            double q = 0.0;
            const int d = spec.dimension;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) q += t[i] * spec.gaussian_cov[i * d + j] * t[j];
            e += Complex{-q / 2.0, 0.0};
            return e;
        }
        case StableRegime::Symmetric: {
            double re = 0.0;
            for (std::size_t i = 0; i < spec.sigma.size(); ++i)
                re -= spec.sigma.weights[i] *
                      std::pow(std::fabs(dot(t, spec.sigma.atoms[i])), spec.alpha);
            e += Complex{re, 0.0};
            return e;
        }
        case StableRegime::Skewed: {
            const double tilt = std::tan(kPi * spec.alpha / 2.0);
            double re = 0.0, im = 0.0;
            for (std::size_t i = 0; i < spec.sigma.size(); ++i) {
                const double u = dot(t, spec.sigma.atoms[i]);
                const double mag = spec.sigma.weights[i] * std::pow(std::fabs(u), spec.alpha);
                re -= mag;
                im += mag * (u > 0.0 ? tilt : (u < 0.0 ? -tilt : 0.0));
            }
            e += Complex{re, im};
            return e;
        }
        case StableRegime::AlphaOneCentered: {
            double re = 0.0, im = 0.0;
            for (std::size_t i = 0; i < spec.sigma.size(); ++i) {
                const double u = dot(t, spec.sigma.atoms[i]);
                re -= spec.sigma.weights[i] * std::fabs(u);
                if (u != 0.0)
                    im -= spec.sigma.weights[i] * (2.0 / kPi) * u * std::log(std::fabs(u));
            }
            e += Complex{re, im};
            return e;
        }
    }
    throw SpecError("unknown stable regime");
}

double sample_symmetric_stable(double alpha, Rng& rng) {
    const double v = rng.uniform(-kPi / 2.0, kPi / 2.0);
    if (alpha == 1.0) return std::tan(v);
    const double e = rng.exponential();
    return (std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha)) *
           std::pow(std::cos(v - alpha * v) / e, (1.0 - alpha) / alpha);
}

double sample_skewed_stable(double alpha, Rng& rng) {
    const double tilt = std::tan(kPi * alpha / 2.0);
    const double b = std::atan(tilt) / alpha;
    const double scale = std::pow(1.0 + tilt * tilt, 1.0 / (2.0 * alpha));
    const double v = rng.uniform(-kPi / 2.0, kPi / 2.0);
    const double e = rng.exponential();
    return scale * (std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha)) *
           std::pow(std::cos(v - alpha * (v + b)) / e, (1.0 - alpha) / alpha);
}

double sample_log_skewed_stable(Rng& rng) {
    const double v = rng.uniform(-kPi / 2.0, kPi / 2.0);
    const double e = rng.exponential();
    const double half = kPi / 2.0;
    return (2.0 / kPi) *
           ((half + v) * std::tan(v) - std::log((half * e * std::cos(v)) / (half + v)));
}

namespace {

/// Lower-triangular Cholesky factor tolerating positive semi-definite input;
/// zero-variance directions get zero columns.
std::vector<double> psd_cholesky(const std::vector<double>& cov, int d) {
    std::vector<double> chol(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = cov[i * d + j];
            for (int k = 0; k < j; ++k) s -= chol[i * d + k] * chol[j * d + k];
            if (i == j) {
                if (s < -1e-10) throw SpecError("gaussian covariance is not positive semi-definite");
                chol[i * d + i] = s > 0.0 ? std::sqrt(std::max(s, 0.0)) : 0.0;
            } else {
                chol[i * d + j] = chol[j * d + j] > 0.0 ? s / chol[j * d + j] : 0.0;
            }
        }
    }
    return chol;
}

}  // namespace

Vec sample_stable(const StableLawSpec& spec, Rng& rng) {
    const std::size_t d = static_cast<std::size_t>(spec.dimension);
    Vec x = spec.shift.empty() ? zeros(d) : spec.shift;

    switch (spec.regime) {
        case StableRegime::Gaussian: {
            const std::vector<double> chol = psd_cholesky(spec.gaussian_cov, spec.dimension);
            Vec g(d);
            for (std::size_t i = 0; i < d; ++i) g[i] = rng.normal();
            for (std::size_t i = 0; i < d; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k <= i; ++k) s += chol[i * d + k] * g[k];
                x[i] += s;
            }
            return x;
        }
        case StableRegime::Symmetric: {
            for (std::size_t i = 0; i < spec.sigma.size(); ++i) {
                const double xi = sample_symmetric_stable(spec.alpha, rng);
                axpy(std::pow(spec.sigma.weights[i], 1.0 / spec.alpha) * xi, spec.sigma.atoms[i],
                     x);
            }
            return x;
        }
        case StableRegime::Skewed: {
            for (std::size_t i = 0; i < spec.sigma.size(); ++i) {
                const double xi = sample_skewed_stable(spec.alpha, rng);
                axpy(std::pow(spec.sigma.weights[i], 1.0 / spec.alpha) * xi, spec.sigma.atoms[i],
                     x);
            }
            return x;
        }
        case StableRegime::AlphaOneCentered: {
            for (std::size_t i = 0; i < spec.sigma.size(); ++i) {
                const double w = spec.sigma.weights[i];
                const double xi = sample_log_skewed_stable(rng);
                // w-scaling of the 1-stable log form needs the deterministic
                // drift (2/pi) w log w to keep the exponent exact
                axpy(w * xi + (2.0 / kPi) * w * std::log(w), spec.sigma.atoms[i], x);
            }
            return x;
        }
    }
    throw SpecError("unknown stable regime");
}

}  // namespace smoothfix
