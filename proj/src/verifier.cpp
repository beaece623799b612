#include "smoothfix/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "smoothfix/cf_kernels.hpp"

namespace smoothfix {

bool CfGrid::is_uniform_axis() const {
    if (dimension() != 1 || points.size() < 2 || axes.size() != 1) return false;
    const double step = points[1][0] - points[0][0];
    for (std::size_t k = 1; k < points.size(); ++k) {
        const double expect = points[0][0] + step * static_cast<double>(k);
        if (std::fabs(points[k][0] - expect) > 1e-12 * std::max(1.0, std::fabs(expect)))
            return false;
    }
    return true;
}

void CfGrid::validate() const {
    if (points.empty()) throw SpecError("empty CF grid");
    bool has_zero = false;
    for (const auto& p : points) {
        if (static_cast<int>(p.size()) != dimension()) throw SpecError("mixed grid dimensions");
        bool zero = true;
        for (double x : p) zero = zero && x == 0.0;
        has_zero = has_zero || zero;
    }
    if (!has_zero) throw SpecError("CF grid must contain t = 0");
}

CfGrid CfGrid::axis(double lo, double hi, int n_points) {
    if (n_points < 2 || !(hi > lo)) throw SpecError("bad axis grid");
    CfGrid g;
    const double step = (hi - lo) / static_cast<double>(n_points - 1);
    std::vector<double> axis_coords;
    for (int k = 0; k < n_points; ++k) {
        double x = lo + step * static_cast<double>(k);
        if (std::fabs(x) < 1e-12 * (hi - lo)) x = 0.0;
        axis_coords.push_back(x);
        g.points.push_back({x});
    }
    g.axes = {std::move(axis_coords)};
    g.validate();
    return g;
}

CfGrid CfGrid::tensor(double lo, double hi, int n_per_axis, int d) {
    if (d < 1 || d > 4) throw SpecError("tensor grids support d in [1,4]");
    const CfGrid line = axis(lo, hi, n_per_axis);
    CfGrid g;
    g.axes.assign(static_cast<std::size_t>(d), line.axes[0]);
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    const std::size_t n = line.points.size();
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) total *= n;
    g.points.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Vec p(static_cast<std::size_t>(d));
        std::size_t rem = flat;
        for (int k = d - 1; k >= 0; --k) {
            p[static_cast<std::size_t>(k)] = g.axes[static_cast<std::size_t>(k)][rem % n];
            rem /= n;
        }
        g.points.push_back(std::move(p));
    }
    g.validate();
    return g;
}

namespace {

CfPointEstimate finish(const CfSums& sums) {
    const double n = static_cast<double>(sums.n);
    CfPointEstimate e;
    e.mean = Complex{sums.c / n, sums.s / n};
    if (sums.n > 1) {
        const double var_c =
            std::max(0.0, (sums.c2 - n * e.mean.real() * e.mean.real()) / (n - 1.0));
        const double var_s =
            std::max(0.0, (sums.s2 - n * e.mean.imag() * e.mean.imag()) / (n - 1.0));
        e.stderr_re = std::sqrt(var_c / n);
        e.stderr_im = std::sqrt(var_s / n);
    }
    return e;
}

bool is_zero_point(const Vec& t) {
    for (double x : t)
        if (x != 0.0) return false;
    return true;
}

}  // namespace

CfEstimate empirical_cf(const std::vector<double>& samples, std::size_t d, const CfGrid& grid) {
    if (samples.empty()) throw EstimationError("empirical_cf: empty batch");
    const std::size_t n = samples.size() / d;
    if (n < 100) throw EstimationError("empirical_cf: need at least 100 samples");
    grid.validate();

    CfEstimate est;
    est.n_samples = n;
    est.points.resize(grid.size());

    if (d == 1 && grid.is_uniform_axis()) {
        std::vector<CfSums> sums(grid.size());
        const double t0 = grid.points.front()[0];
        const double dt = grid.points[1][0] - grid.points[0][0];
        cf_accumulate_axis(samples.data(), n, t0, dt, grid.size(), sums.data());
        for (std::size_t k = 0; k < grid.size(); ++k) est.points[k] = finish(sums[k]);
    } else {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            CfSums s;
            cf_accumulate_point(samples.data(), n, d, grid.points[k].data(), s);
            est.points[k] = finish(s);
        }
    }
    // e^{i<0,x>} = 1 for every sample; pin the t = 0 entry to its exact value
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (is_zero_point(grid.points[k])) est.points[k] = {Complex{1.0, 0.0}, 0.0, 0.0};
    return est;
}

CfEstimate empirical_cf(const std::vector<Vec>& samples, const CfGrid& grid) {
    if (samples.empty()) throw EstimationError("empirical_cf: empty batch");
    const std::size_t d = samples.front().size();
    std::vector<double> flat;
    flat.reserve(samples.size() * d);
    for (const auto& x : samples) flat.insert(flat.end(), x.begin(), x.end());
    return empirical_cf(flat, d, grid);
}

Complex interpolate_cf(const CfGrid& grid, const CfEstimate& estimate, const Vec& t) {
    if (!grid.is_tensor())
        throw EstimationError("interpolation needs a tensor grid");
    const int d = grid.dimension();
    std::vector<std::size_t> lo_idx(static_cast<std::size_t>(d));
    std::vector<double> frac(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        const auto& ax = grid.axes[static_cast<std::size_t>(k)];
        const double x = t[static_cast<std::size_t>(k)];
        if (x < ax.front() - 1e-12 || x > ax.back() + 1e-12)
            throw EstimationError("CF lookup outside the grid hull; widen the grid");
        auto it = std::upper_bound(ax.begin(), ax.end(), x);
        std::size_t hi = static_cast<std::size_t>(it - ax.begin());
        if (hi == 0) hi = 1;
        if (hi >= ax.size()) hi = ax.size() - 1;
        const std::size_t lo = hi - 1;
        lo_idx[static_cast<std::size_t>(k)] = lo;
        frac[static_cast<std::size_t>(k)] =
            std::clamp((x - ax[lo]) / (ax[hi] - ax[lo]), 0.0, 1.0);
    }
    const std::size_t axis_n = grid.axes[0].size();
    Complex acc{0.0, 0.0};
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
        double weight = 1.0;
        std::size_t flat = 0;
        for (int k = 0; k < d; ++k) {
            const bool upper = (corner >> k) & 1U;
            weight *= upper ? frac[static_cast<std::size_t>(k)]
                            : 1.0 - frac[static_cast<std::size_t>(k)];
            flat = flat * axis_n + lo_idx[static_cast<std::size_t>(k)] + (upper ? 1 : 0);
        }
        if (weight != 0.0) acc += weight * estimate.points[flat].mean;
    }
    return acc;
}

namespace {

struct ComplexMean {
    double re = 0.0, im = 0.0;
    std::size_t n = 0;
    void add(Complex z) {
        re += z.real();
        im += z.imag();
        ++n;
    }
    Complex mean() const {
        return {re / static_cast<double>(n), im / static_cast<double>(n)};
    }
};

/// Average of e^{i<t,C>} prod_j phi(T_j t) over fresh weight draws, per grid point.
std::vector<Complex> smoothing_rhs(const WeightModel& model, const CfGrid& grid,
                                   const std::function<Complex(const Vec&)>& lookup,
                                   std::size_t n_draws, Rng& rng) {
    std::vector<ComplexMean> acc(grid.size());
    Vec scaled(static_cast<std::size_t>(grid.dimension()));
    for (std::size_t i = 0; i < n_draws; ++i) {
        const WeightDraw draw = model.sample(rng);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const Vec& t = grid.points[k];
            Complex prod{1.0, 0.0};
            for (const auto& term : draw.terms) {
                for (std::size_t j = 0; j < t.size(); ++j) scaled[j] = term.value * t[j];
                prod *= lookup(scaled);
            }
            const double phase = dot(t, draw.shift);
            if (phase != 0.0) prod *= Complex{std::cos(phase), std::sin(phase)};
            acc[k].add(prod);
        }
    }
    std::vector<Complex> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = acc[k].mean();
    return out;
}

}  // namespace

ResidualReport fixed_point_residual(const WeightModel& model, const std::vector<double>& samples,
                                    std::size_t d, const CfGrid& grid, Rng& rng,
                                    const std::optional<CfFunction>& analytic_cf,
                                    std::size_t n_weight_draws) {
    grid.validate();
    const std::size_t n = samples.size() / d;
    if (n < 200) throw EstimationError("fixed_point_residual: need at least 200 samples");
    const std::size_t n_w = n_weight_draws == 0 ? n : n_weight_draws;

    const CfEstimate full = empirical_cf(samples, d, grid);
    auto lookup_full = [&](const Vec& t) -> Complex {
        if (analytic_cf) return (*analytic_cf)(t);
        return interpolate_cf(grid, full, t);
    };
    const std::vector<Complex> rhs = smoothing_rhs(model, grid, lookup_full, n_w, rng);

    ResidualReport report;
    report.per_point.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        report.per_point[k] = std::abs(full.points[k].mean - rhs[k]);
        report.sup_residual = std::max(report.sup_residual, report.per_point[k]);
    }

    // noise floor: the same sup computed between independent halves of the
    // candidate batch, scaled by 1.5
    const std::size_t half = n / 2;
    std::vector<double> a(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(half * d));
    std::vector<double> b(samples.begin() + static_cast<std::ptrdiff_t>(half * d), samples.end());
    const CfEstimate ea = empirical_cf(a, d, grid);
    const CfEstimate eb = empirical_cf(b, d, grid);
    double floor = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        floor = std::max(floor, std::abs(ea.points[k].mean - eb.points[k].mean));
    report.noise_floor = 1.5 * floor;
    return report;
}

ResidualReport fixed_point_residual(const WeightModel& model, const VectorSampler& sampler,
                                    const CfGrid& grid, std::size_t n_samples, Rng& rng,
                                    const std::optional<CfFunction>& analytic_cf,
                                    std::size_t n_weight_draws) {
    const std::size_t d = static_cast<std::size_t>(model.dimension());
    std::vector<double> flat;
    flat.reserve(n_samples * d);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const Vec x = sampler(rng);
        flat.insert(flat.end(), x.begin(), x.end());
    }
    return fixed_point_residual(model, flat, d, grid, rng, analytic_cf, n_weight_draws);
}

std::vector<Complex> multiplicative_martingale(const WeightedTree& tree, const CfFunction& phi,
                                               const Vec& t, int up_to_n) {
    if (up_to_n > tree.grown_generation() || tree.truncated)
        throw EstimationError("multiplicative martingale needs a complete tree to depth n");
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(up_to_n) + 1);
    Vec scaled(t.size());
    double pref_phase = 0.0;
    for (int n = 0; n <= up_to_n; ++n) {
        Complex m = tree.has_shift
                        ? Complex{std::cos(pref_phase), std::sin(pref_phase)}
                        : Complex{1.0, 0.0};
        for (std::uint32_t v = tree.gen_begin[n]; v < tree.gen_begin[n + 1]; ++v) {
            const double lv = tree.signed_l(v);
            for (std::size_t k = 0; k < t.size(); ++k) scaled[k] = lv * t[k];
            m *= phi(scaled);
        }
        out.push_back(m);
        if (tree.has_shift && n <= up_to_n - 1) {
            for (std::uint32_t v = tree.gen_begin[n]; v < tree.gen_begin[n + 1]; ++v) {
                const double lv = tree.signed_l(v);
                const double* c = tree.shift_of(v);
                double inner = 0.0;
                for (std::size_t k = 0; k < t.size(); ++k) inner += c[k] * t[k];
                pref_phase += lv * inner;
            }
        }
    }
    return out;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw EstimationError("ks_distance: empty batch");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_distance_weighted(std::vector<double> values, std::vector<double> weights,
                            std::vector<double> samples) {
    if (values.empty() || samples.empty()) throw EstimationError("ks_distance: empty batch");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    std::sort(samples.begin(), samples.end());
    double total = 0.0;
    for (double w : weights) total += w;

    double d = 0.0;
    double acc = 0.0;
    std::size_t j = 0;
    const double nb = static_cast<double>(samples.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const double x = values[order[r]];
        while (j < samples.size() && samples[j] < x) {
            d = std::max(d, std::fabs(acc / total - static_cast<double>(j + 1) / nb));
            ++j;
        }
        acc += weights[order[r]];
        while (r + 1 < order.size() && values[order[r + 1]] == x) {
            ++r;
            acc += weights[order[r]];
        }
        const double gb = static_cast<double>(j) / nb;
        d = std::max(d, std::fabs(acc / total - gb));
    }
    return d;
}

double ks_distance_cdf(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw EstimationError("ks_distance: empty batch");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::max(static_cast<double>(i + 1) / n - f,
                                 f - static_cast<double>(i) / n));
    }
    return d;
}

std::string to_string(Trend t) {
    switch (t) {
        case Trend::ConvergingNonzero: return "converging-nonzero";
        case Trend::ConvergingToZero: return "converging-to-zero";
        case Trend::Diverging: return "diverging";
        case Trend::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double iqr_of(std::vector<double> v) {
    if (v.size() < 4) return 0.0;
    std::sort(v.begin(), v.end());
    const auto q = [&](double p) {
        const double idx = p * static_cast<double>(v.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const double f = idx - static_cast<double>(lo);
        return lo + 1 < v.size() ? v[lo] * (1.0 - f) + v[lo + 1] * f : v[lo];
    };
    return q(0.75) - q(0.25);
}

Trend classify(double dispersion_ratio, double level_ratio, double level_at_depth,
               bool degenerate) {
    constexpr double kShrink = 0.75;
    constexpr double kGrow = 1.25;
    if (degenerate) return level_at_depth > 1e-12 ? Trend::ConvergingNonzero : Trend::ConvergingToZero;
    if (dispersion_ratio < kShrink)
        return level_ratio < kShrink ? Trend::ConvergingToZero : Trend::ConvergingNonzero;
    if (dispersion_ratio > kGrow) return Trend::Diverging;
    return Trend::Inconclusive;
}

}  // namespace

AuditReport martingale_audit(const WeightModel& model, double alpha, int depth,
                             std::size_t replicas, Rng& rng) {
    if (depth < 2) throw SpecError("audit depth must be at least 2");
    std::vector<std::vector<double>> w_rows(static_cast<std::size_t>(depth) + 1),
        z_rows(static_cast<std::size_t>(depth) + 1);
    for (std::size_t r = 0; r < replicas; ++r) {
        Rng sub = rng.substream(r);
        const WeightedTree tree = grow(model, depth, sub);
        const MartingaleTrace trace = martingale_trace(tree, alpha);
        for (int n = 0; n <= depth; ++n) {
            const bool have = n < static_cast<int>(trace.w.size());
            w_rows[static_cast<std::size_t>(n)].push_back(have ? trace.w[n] : 0.0);
            z_rows[static_cast<std::size_t>(n)].push_back(have ? trace.z[n] : 0.0);
        }
    }

    AuditReport report;
    for (int n = 0; n <= depth; ++n) {
        const auto& ws = w_rows[static_cast<std::size_t>(n)];
        const auto& zs = z_rows[static_cast<std::size_t>(n)];
        AuditRow row;
        row.n = n;
        const double nn = static_cast<double>(ws.size());
        for (double w : ws) row.w_mean += w;
        for (double z : zs) row.z_mean += z;
        row.w_mean /= nn;
        row.z_mean /= nn;
        double vw = 0.0, vz = 0.0;
        for (double w : ws) vw += (w - row.w_mean) * (w - row.w_mean);
        for (double z : zs) vz += (z - row.z_mean) * (z - row.z_mean);
        row.w_stderr = nn > 1 ? std::sqrt(vw / (nn - 1.0) / nn) : 0.0;
        row.z_stderr = nn > 1 ? std::sqrt(vz / (nn - 1.0) / nn) : 0.0;
        std::vector<double> abs_z(zs.size());
        std::transform(zs.begin(), zs.end(), abs_z.begin(),
                       [](double z) { return std::fabs(z); });
        row.abs_z_median = median_of(abs_z);
        row.z_iqr = iqr_of(zs);
        report.rows.push_back(row);
    }

    const int half = depth / 2;
    const AuditRow& at_depth = report.rows[static_cast<std::size_t>(depth)];
    const AuditRow& at_half = report.rows[static_cast<std::size_t>(half)];
    const bool z_degenerate = at_depth.z_iqr < 1e-12 && at_half.z_iqr < 1e-12;
    report.z_dispersion_ratio = z_degenerate ? 1.0 : at_depth.z_iqr / std::max(at_half.z_iqr, 1e-300);
    report.z_level_ratio = at_depth.abs_z_median / std::max(at_half.abs_z_median, 1e-300);
    report.z_trend = classify(report.z_dispersion_ratio, report.z_level_ratio,
                              at_depth.abs_z_median, z_degenerate);

    auto w_iqr = [&](int n) {
        auto v = w_rows[static_cast<std::size_t>(n)];
        return iqr_of(std::move(v));
    };
    const bool w_degenerate = w_iqr(depth) < 1e-12 && w_iqr(half) < 1e-12;
    const double w_ratio = w_degenerate ? 1.0 : w_iqr(depth) / std::max(w_iqr(half), 1e-300);
    report.w_trend = classify(w_ratio, at_depth.w_mean / std::max(at_half.w_mean, 1e-300),
                              at_depth.w_mean, w_degenerate);
    return report;
}

std::string AuditReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"n", r.n},
                             {"w_mean", r.w_mean},
                             {"w_stderr", r.w_stderr},
                             {"z_mean", r.z_mean},
                             {"z_stderr", r.z_stderr},
                             {"abs_z_median", r.abs_z_median},
                             {"z_iqr", r.z_iqr}});
    }
    nlohmann::json j{{"rows", rows_json},
                     {"z_trend", to_string(z_trend)},
                     {"w_trend", to_string(w_trend)},
                     {"z_dispersion_ratio", z_dispersion_ratio},
                     {"z_level_ratio", z_level_ratio}};
    return j.dump(2);
}

}  // namespace smoothfix
