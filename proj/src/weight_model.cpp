#include "smoothfix/weight_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace smoothfix {

namespace {

constexpr double kPi = std::numbers::pi;

/// Streaming mean/variance accumulator; merges associatively.
struct Welford {
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double stderr() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / (static_cast<double>(n - 1) * static_cast<double>(n)));
    }
};

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::DeterministicSplit: return "deterministic-split";
        case ModelKind::FiniteMixture: return "finite-mixture";
        case ModelKind::Kac: return "kac";
        case ModelKind::InelasticKac: return "inelastic-kac";
        case ModelKind::Custom: return "custom";
    }
    return "?";
}

std::string to_string(SignCase c) {
    switch (c) {
        case SignCase::I: return "CaseI";
        case SignCase::II: return "CaseII";
        case SignCase::III: return "CaseIII";
    }
    return "?";
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Verified: return "verified";
        case CheckStatus::Attested: return "attested";
        case CheckStatus::EstimatedPass: return "estimated-pass";
        case CheckStatus::EstimatedFail: return "estimated-fail";
        case CheckStatus::NotCheckable: return "not-checkable";
    }
    return "?";
}

WeightModel WeightModel::deterministic_split(std::vector<double> weights, int d, Vec shift) {
    MixtureOutcome o;
    o.prob = 1.0;
    o.weights = std::move(weights);
    o.shift = std::move(shift);
    WeightModel m = finite_mixture({std::move(o)}, d);
    m.kind_ = ModelKind::DeterministicSplit;
    return m;
}

WeightModel WeightModel::finite_mixture(std::vector<MixtureOutcome> outcomes, int d) {
    if (outcomes.empty()) throw SpecError("finite mixture needs at least one outcome");
    if (d < 1) throw SpecError("dimension must be positive");
    WeightModel m;
    m.kind_ = ModelKind::FiniteMixture;
    m.dimension_ = d;
    double total = 0.0;
    int max_n = 0;
    for (auto& o : outcomes) {
        if (o.prob < 0.0) throw SpecError("mixture probabilities must be nonnegative");
        total += o.prob;
        if (!o.shift.empty() && static_cast<int>(o.shift.size()) != d)
            throw SpecError("mixture shift has wrong dimension");
        std::erase_if(o.weights, [](double w) { return w == 0.0; });
        max_n = std::max<int>(max_n, static_cast<int>(o.weights.size()));
        for (double w : o.shift)
            if (w != 0.0) m.has_shift_ = true;
    }
    if (total <= 0.0) throw SpecError("mixture probabilities sum to zero");
    m.cumulative_.reserve(outcomes.size());
    double acc = 0.0;
    for (const auto& o : outcomes) {
        acc += o.prob / total;
        m.cumulative_.push_back(acc);
    }
    m.cumulative_.back() = 1.0;
    m.outcomes_ = std::move(outcomes);
    m.max_children_hint_ = max_n;
    return m;
}

WeightModel WeightModel::kac(double beta) {
    if (beta <= 0.0) throw SpecError("kac exponent beta must be positive");
    WeightModel m;
    m.kind_ = beta == 1.0 ? ModelKind::Kac : ModelKind::InelasticKac;
    m.dimension_ = 1;
    m.beta_ = beta;
    m.declared_lattice_free_ = true;  // theta has a continuous law
    m.continuous_step_ = true;
    m.max_children_hint_ = 2;
    return m;
}

WeightModel WeightModel::inelastic_kac(double beta) { return kac(beta); }

WeightModel WeightModel::custom(CustomSampler sampler, int d, bool lattice_free,
                                int max_children_hint) {
    if (!sampler) throw SpecError("custom model needs a sampler");
    if (d < 1) throw SpecError("dimension must be positive");
    WeightModel m;
    m.kind_ = ModelKind::Custom;
    m.dimension_ = d;
    m.custom_ = std::move(sampler);
    m.declared_lattice_free_ = lattice_free;
    m.max_children_hint_ = max_children_hint;
    m.has_shift_ = true;  // unknown; keep shifts
    return m;
}

std::vector<WeightTerm> kac_terms(double beta, double theta) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double t1 = s * std::pow(std::fabs(s), beta - 1.0);
    const double t2 = c * std::pow(std::fabs(c), beta - 1.0);
    std::vector<WeightTerm> terms;
    if (t1 != 0.0) terms.push_back({1, t1});
    if (t2 != 0.0) terms.push_back({2, t2});
    return terms;
}

WeightDraw WeightModel::sample(Rng& rng) const {
    WeightDraw draw;
    switch (kind_) {
        case ModelKind::Kac:
        case ModelKind::InelasticKac: {
            const double theta = rng.uniform(0.0, 2.0 * kPi);
            draw.terms = kac_terms(beta_, theta);
            draw.shift = zeros(static_cast<std::size_t>(dimension_));
            return draw;
        }
        case ModelKind::DeterministicSplit:
        case ModelKind::FiniteMixture: {
            std::size_t k = 0;
            if (outcomes_.size() > 1) {
                const double u = rng.u01();
                k = static_cast<std::size_t>(
                    std::lower_bound(cumulative_.begin(), cumulative_.end(), u) -
                    cumulative_.begin());
                if (k >= outcomes_.size()) k = outcomes_.size() - 1;
            }
            const MixtureOutcome& o = outcomes_[k];
            draw.terms.reserve(o.weights.size());
            for (std::size_t j = 0; j < o.weights.size(); ++j)
                draw.terms.push_back({static_cast<int>(j + 1), o.weights[j]});
            draw.shift = o.shift.empty() ? zeros(static_cast<std::size_t>(dimension_)) : o.shift;
            return draw;
        }
        case ModelKind::Custom: {
            draw = custom_(rng);
            constexpr std::size_t kFanoutCap = 1 << 16;
            if (draw.terms.size() > kFanoutCap)
                throw SpecError("custom sampler returned an unbounded weight list");
            if (!draw.terms.empty() &&
                std::all_of(draw.terms.begin(), draw.terms.end(),
                            [](const WeightTerm& t) { return t.value == 0.0; }))
                throw SpecError("custom sampler returned an all-zero weight list");
            std::erase_if(draw.terms, [](const WeightTerm& t) { return t.value == 0.0; });
            for (std::size_t j = 1; j < draw.terms.size(); ++j)
                if (draw.terms[j].index <= draw.terms[j - 1].index)
                    throw SpecError("custom sampler indices must be strictly increasing");
            if (draw.shift.empty()) draw.shift = zeros(static_cast<std::size_t>(dimension_));
            if (static_cast<int>(draw.shift.size()) != dimension_)
                throw SpecError("custom sampler shift has wrong dimension");
            return draw;
        }
    }
    throw SpecError("unknown model kind");
}

std::optional<double> WeightModel::analytic_m(double gamma) const {
    switch (kind_) {
        case ModelKind::Kac:
        case ModelKind::InelasticKac: {
            // E[|sin|^p + |cos|^p] = 2 Gamma((p+1)/2) / (sqrt(pi) Gamma(p/2 + 1))
            const double p = beta_ * gamma;
            const double lg =
                std::lgamma((p + 1.0) / 2.0) - std::lgamma(p / 2.0 + 1.0);
            return 2.0 * std::exp(lg) / std::sqrt(kPi);
        }
        case ModelKind::DeterministicSplit: {
            double s = 0.0;
            for (double w : outcomes_.front().weights) s += std::pow(std::fabs(w), gamma);
            return s;
        }
        default:
            return std::nullopt;
    }
}

std::string WeightModel::describe() const {
    std::ostringstream os;
    os << to_string(kind_);
    if (kind_ == ModelKind::Kac || kind_ == ModelKind::InelasticKac) os << "(beta=" << beta_ << ")";
    os << " d=" << dimension_;
    return os.str();
}

MEstimate estimate_m(const WeightModel& model, double gamma, std::size_t n_samples, Rng& rng,
                     double infinity_cap) {
    if (n_samples < 1) throw EstimationError("estimate_m needs at least one sample");
    if (auto exact = model.analytic_m(gamma)) return {*exact, 0.0, !std::isfinite(*exact), 0};

    Welford acc;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const WeightDraw draw = model.sample(rng);
        double s = 0.0;
        for (const auto& t : draw.terms) s += std::pow(std::fabs(t.value), gamma);
        if (!std::isfinite(s)) return {0.0, 0.0, true, i + 1};
        acc.add(s);
        if (acc.mean > infinity_cap) return {acc.mean, acc.stderr(), true, i + 1};
    }
    return {acc.mean, acc.stderr(), false, n_samples};
}

MEstimate WeightTable::evaluate(double gamma, double infinity_cap) const {
    Welford acc;
    for (const auto& row : abs_values) {
        double s = 0.0;
        for (double a : row) s += std::pow(a, gamma);
        if (!std::isfinite(s)) return {0.0, 0.0, true, acc.n + 1};
        acc.add(s);
        if (acc.mean > infinity_cap) return {acc.mean, acc.stderr(), true, acc.n};
    }
    return {acc.mean, acc.stderr(), false, acc.n};
}

WeightTable draw_weight_table(const WeightModel& model, std::size_t n, Rng& rng) {
    WeightTable table;
    table.abs_values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const WeightDraw draw = model.sample(rng);
        std::vector<double> abs;
        abs.reserve(draw.terms.size());
        for (const auto& t : draw.terms) abs.push_back(std::fabs(t.value));
        table.abs_values.push_back(std::move(abs));
    }
    return table;
}

AlphaSolve solve_characteristic_index(const WeightModel& model, Rng& rng, double tol_analytic,
                                      double tol_mc, std::size_t mc_samples, double scan_hi) {
    const bool analytic = model.analytic_m(0.0).has_value();
    WeightTable table;
    if (!analytic) table = draw_weight_table(model, mc_samples, rng);

    auto m_of = [&](double gamma) -> MEstimate {
        if (analytic) {
            const double v = *model.analytic_m(gamma);
            return {v, 0.0, !std::isfinite(v), 0};
        }
        return table.evaluate(gamma);
    };

    // Scan for a bracket with m(lo) > 1 > m(hi); m need not be monotone
    // without (A6), so walk a doubling grid.
    double lo = 0.0, hi = 0.0;
    double m_lo = m_of(1.0 / 1024.0).mean;
    if (m_lo <= 1.0)
        throw EstimationError("no characteristic index located: m(0+) <= 1 for " +
                              model.describe());
    double prev = 1.0 / 1024.0;
    for (double g = 1.0 / 512.0; g <= scan_hi; g *= 2.0) {
        const MEstimate est = m_of(g);
        if (est.infinite) {
            prev = g;
            continue;
        }
        if (est.mean == 1.0) {
            AlphaSolve out;
            out.alpha = g;
            out.bracket_lo = out.bracket_hi = g;
            out.analytic = analytic;
            return out;
        }
        if (est.mean < 1.0) {
            lo = prev;
            hi = g;
            break;
        }
        prev = g;
    }
    if (hi == 0.0)
        throw EstimationError("no characteristic index located in (0, " +
                              std::to_string(scan_hi) + "] for " + model.describe());

    const double tol = analytic ? tol_analytic : tol_mc;
    double mid = 0.5 * (lo + hi);
    MEstimate at_mid;
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        at_mid = m_of(mid);
        if (!at_mid.infinite && std::fabs(at_mid.mean - 1.0) <= tol) break;
        if (at_mid.infinite || at_mid.mean > 1.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
    }

    AlphaSolve out;
    out.alpha = mid;
    out.bracket_lo = lo;
    out.bracket_hi = hi;
    out.analytic = analytic;
    out.residual = std::fabs(at_mid.mean - 1.0);
    out.m_stderr = at_mid.stderr;
    for (int k = 1; k <= 9; ++k) {
        const double theta = out.alpha * static_cast<double>(k) / 10.0;
        const MEstimate est = m_of(theta);
        if (!est.infinite && est.mean <= 1.0) out.a3_violations.push_back(theta);
    }
    return out;
}

CaseLabel compute_pq(const WeightModel& model, double alpha, std::size_t n_samples, Rng& rng) {
    Welford pos, neg;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const WeightDraw draw = model.sample(rng);
        double sp = 0.0, sq = 0.0;
        for (const auto& t : draw.terms) {
            const double w = std::pow(std::fabs(t.value), alpha);
            if (t.value > 0.0)
                sp += w;
            else
                sq += w;
        }
        pos.add(sp);
        neg.add(sq);
    }
    CaseLabel label;
    label.raw_sum = pos.mean + neg.mean;
    if (label.raw_sum <= 0.0) throw EstimationError("compute_pq: all weights vanished");
    label.p = pos.mean / label.raw_sum;
    label.q = neg.mean / label.raw_sum;
    label.stderr = std::max(pos.stderr(), neg.stderr());
    const double threshold = std::max(1e-3, 3.0 * label.stderr);
    if (label.q <= threshold)
        label.label = SignCase::I;
    else if (label.p <= threshold)
        label.label = SignCase::II;
    else
        label.label = SignCase::III;
    return label;
}

bool lattice_suspected(const std::vector<double>& log_abs_weights, double tol) {
    std::vector<double> vals;
    vals.reserve(log_abs_weights.size());
    for (double v : log_abs_weights)
        if (std::fabs(v) > 1e-12) vals.push_back(std::fabs(v));
    if (vals.size() < 2) return false;

    // real-valued gcd of the observed log-magnitudes
    double g = vals[0];
    for (std::size_t i = 1; i < vals.size(); ++i) {
        double a = std::max(g, vals[i]);
        double b = std::min(g, vals[i]);
        while (b > tol) {
            const double r = std::fmod(a, b);
            a = b;
            b = r;
        }
        g = a;
        if (g <= tol) return false;
    }
    if (g <= 1e-6) return false;
    for (double v : log_abs_weights) {
        const double k = std::round(v / g);
        if (std::fabs(v - k * g) > 1e-7 * std::max(1.0, std::fabs(v))) return false;
    }
    return true;
}

const AssumptionCheck& AssumptionReport::at(const std::string& id) const {
    for (const auto& c : checks)
        if (c.id == id) return c;
    throw std::out_of_range("no assumption check " + id);
}

bool AssumptionReport::all_pass_or_attested() const {
    for (const auto& c : checks)
        if (c.status == CheckStatus::EstimatedFail) return false;
    return true;
}

std::string AssumptionReport::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : checks) {
        j.push_back({{"id", c.id},
                     {"status", to_string(c.status)},
                     {"value", c.value},
                     {"stderr", c.stderr},
                     {"evidence", c.evidence}});
    }
    return j.dump(2);
}

AssumptionReport check_assumptions(const WeightModel& model, double alpha, Rng& rng,
                                   std::size_t n_samples) {
    Welford fanout, tilted_mass, drift, logminus2, w1logw1, h3w1;
    double max_abs_t = 0.0;
    std::vector<double> log_abs;
    log_abs.reserve(4096);

    for (std::size_t i = 0; i < n_samples; ++i) {
        const WeightDraw draw = model.sample(rng);
        double w1 = 0.0, dr = 0.0, lm2 = 0.0;
        for (const auto& t : draw.terms) {
            const double a = std::fabs(t.value);
            const double la = std::log(a);
            const double wa = std::pow(a, alpha);
            w1 += wa;
            dr += wa * la;
            const double lminus = std::max(-la, 0.0);
            lm2 += wa * lminus * lminus;
            max_abs_t = std::max(max_abs_t, a);
            if (log_abs.size() < 4096) log_abs.push_back(la);
        }
        fanout.add(static_cast<double>(draw.terms.size()));
        tilted_mass.add(w1);
        drift.add(dr);
        logminus2.add(lm2);
        const double logp = std::max(std::log(std::max(w1, 1e-300)), 0.0);
        w1logw1.add(w1 * logp);
        h3w1.add(w1 * logp * logp * logp * std::max(std::log(std::max(logp, 1e-300)), 0.0));
    }

    AssumptionReport report;
    {
        AssumptionCheck c{"A1", CheckStatus::NotCheckable, 0.0, 0.0, ""};
        if (model.declared_lattice_free()) {
            c.status = CheckStatus::Attested;
            c.evidence = "lattice-freeness attested by model metadata";
        } else if (lattice_suspected(log_abs)) {
            c.status = CheckStatus::EstimatedFail;
            c.evidence = "sampled log|T| values sit on a common lattice";
        } else {
            c.evidence = "no lattice detected; lattice-freeness is not decidable from samples";
        }
        report.checks.push_back(c);
    }
    {
        AssumptionCheck c{"A2", CheckStatus::EstimatedPass, fanout.mean, fanout.stderr(), ""};
        c.evidence = "mean fanout E[N]";
        if (!(fanout.mean - 3.0 * fanout.stderr() > 1.0)) c.status = CheckStatus::EstimatedFail;
        report.checks.push_back(c);
    }
    {
        AssumptionCheck c{"A3", CheckStatus::EstimatedPass, tilted_mass.mean, tilted_mass.stderr(),
                          "mean of sum |T|^alpha at the characteristic index"};
        const double dev = std::fabs(tilted_mass.mean - 1.0);
        if (dev > std::max(1e-6, 3.0 * tilted_mass.stderr())) c.status = CheckStatus::EstimatedFail;
        report.checks.push_back(c);
    }
    {
        AssumptionCheck c{"A4a", CheckStatus::EstimatedPass, drift.mean, drift.stderr(), ""};
        std::ostringstream ev;
        ev << "tilted drift E[sum |T|^a log|T|]; sample mean of W1 log+ W1 = " << w1logw1.mean;
        c.evidence = ev.str();
        if (!(drift.mean + 3.0 * drift.stderr() < 0.0)) c.status = CheckStatus::EstimatedFail;
        report.checks.push_back(c);
    }
    {
        const MEstimate half = estimate_m(model, alpha / 2.0, std::max<std::size_t>(n_samples, 1), rng);
        AssumptionCheck c{"A4b", half.infinite ? CheckStatus::EstimatedFail : CheckStatus::EstimatedPass,
                          half.mean, half.stderr, "m(alpha/2) finiteness probe"};
        report.checks.push_back(c);
    }
    {
        AssumptionCheck c{"A5", CheckStatus::NotCheckable, logminus2.mean, logminus2.stderr(), ""};
        std::ostringstream ev;
        ev << "E[sum |T|^a (log-|T|)^2] = " << logminus2.mean << "; E[h3(W1)] = " << h3w1.mean
           << "; spread-out: "
           << (model.continuous_step() ? "attested (continuous step law)" : "not checkable");
        c.evidence = ev.str();
        const bool moments_ok = drift.mean + 3.0 * drift.stderr() < 0.0 &&
                                std::isfinite(logminus2.mean) && std::isfinite(h3w1.mean);
        if (!moments_ok)
            c.status = CheckStatus::EstimatedFail;
        else if (model.continuous_step())
            c.status = CheckStatus::EstimatedPass;
        report.checks.push_back(c);
    }
    {
        AssumptionCheck c{"A6", max_abs_t < 1.0 ? CheckStatus::EstimatedPass : CheckStatus::EstimatedFail,
                          max_abs_t, 0.0, "largest sampled |T|"};
        report.checks.push_back(c);
    }
    return report;
}

}  // namespace smoothfix
