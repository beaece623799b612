#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smoothfix/branching.hpp"
#include "smoothfix/common.hpp"
#include "smoothfix/rng.hpp"
#include "smoothfix/weight_model.hpp"

namespace smoothfix {

/// Evaluation grid in R^d. Tensor grids keep their axes so off-grid CF
/// lookups can interpolate; every grid contains t = 0.
struct CfGrid {
    std::vector<Vec> points;
    std::vector<std::vector<double>> axes;  ///< per-axis coordinates for tensor grids

    std::size_t size() const { return points.size(); }
    int dimension() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
    bool is_tensor() const { return !axes.empty(); }
    /// True for a 1-d uniformly spaced axis (the fast accumulation path).
    bool is_uniform_axis() const;
    void validate() const;

    static CfGrid axis(double lo, double hi, int n_points);
    static CfGrid tensor(double lo, double hi, int n_per_axis, int d);
};

struct CfPointEstimate {
    Complex mean;
    double stderr_re = 0.0;
    double stderr_im = 0.0;
};

struct CfEstimate {
    std::vector<CfPointEstimate> points;
    std::size_t n_samples = 0;
};

/// Empirical characteristic function over the grid with componentwise
/// standard errors. Samples are row-major n x d.
CfEstimate empirical_cf(const std::vector<double>& samples, std::size_t d, const CfGrid& grid);
CfEstimate empirical_cf(const std::vector<Vec>& samples, const CfGrid& grid);

/// Multilinear interpolation of a grid estimate at an off-grid point;
/// throws EstimationError outside the grid hull.
Complex interpolate_cf(const CfGrid& grid, const CfEstimate& estimate, const Vec& t);

using CfFunction = std::function<Complex(const Vec&)>;
using VectorSampler = std::function<Vec(Rng&)>;

struct ResidualReport {
    double sup_residual = 0.0;
    std::vector<double> per_point;
    double noise_floor = 0.0;

    bool pass() const { return sup_residual <= noise_floor; }
};

/// Sup over the grid of |phi_hat(t) - E_hat[e^{i<t,C>} prod_j phi_hat(T_j t)]|
/// where phi_hat is the empirical CF of the candidate and the right side
/// averages fresh weight draws with interpolated (or analytic) CF lookups.
/// The noise floor is 1.5 x the same sup computed between independent halves
/// of the candidate batch.
ResidualReport fixed_point_residual(const WeightModel& model, const VectorSampler& sampler,
                                    const CfGrid& grid, std::size_t n_samples, Rng& rng,
                                    const std::optional<CfFunction>& analytic_cf = std::nullopt,
                                    std::size_t n_weight_draws = 0);

/// Overload taking a pre-drawn candidate batch (row-major n x d).
ResidualReport fixed_point_residual(const WeightModel& model, const std::vector<double>& samples,
                                    std::size_t d, const CfGrid& grid, Rng& rng,
                                    const std::optional<CfFunction>& analytic_cf = std::nullopt,
                                    std::size_t n_weight_draws = 0);

/// Multiplicative martingale M_0(t), ..., M_n(t) along one realized tree;
/// the inhomogeneous prefactor exp(i sum_{|v|<n} L(v) <C(v), t>) is included
/// when the tree carries shifts.
std::vector<Complex> multiplicative_martingale(const WeightedTree& tree, const CfFunction& phi,
                                               const Vec& t, int up_to_n);

/// Two-sample Kolmogorov-Smirnov statistic (d = 1).
double ks_distance(std::vector<double> a, std::vector<double> b);

/// KS statistic between a weighted empirical law and an unweighted sample.
double ks_distance_weighted(std::vector<double> values, std::vector<double> weights,
                            std::vector<double> samples);

/// One-sample KS statistic against a CDF.
double ks_distance_cdf(std::vector<double> samples, const std::function<double(double)>& cdf);

enum class Trend { ConvergingNonzero, ConvergingToZero, Diverging, Inconclusive };

std::string to_string(Trend t);

struct AuditRow {
    int n = 0;
    double w_mean = 0.0, w_stderr = 0.0;
    double z_mean = 0.0, z_stderr = 0.0;
    double abs_z_median = 0.0;
    double z_iqr = 0.0;
};

struct AuditReport {
    std::vector<AuditRow> rows;
    Trend z_trend = Trend::Inconclusive;
    Trend w_trend = Trend::Inconclusive;
    double z_dispersion_ratio = 0.0;  ///< IQR at depth over IQR at depth/2
    double z_level_ratio = 0.0;       ///< median |Z| at depth over depth/2
    std::string to_json() const;
};

/// Replica study of W_n and Z_n: per-generation means and dispersions with a
/// trend classification comparing dispersion at depth against depth/2
/// (ratio < 0.75 converging, > 1.25 diverging, else inconclusive).
AuditReport martingale_audit(const WeightModel& model, double alpha, int depth,
                             std::size_t replicas, Rng& rng);

}  // namespace smoothfix
