#include "smoothfix/kinetic.hpp"

#include <algorithm>
#include <cmath>

#include "smoothfix/stable.hpp"
#include "smoothfix/verifier.hpp"

namespace smoothfix {

void KineticConfig::validate() const {
    if (!initial) throw SpecError("kinetic config needs an initial sampler");
    if (time < 0.0) throw SpecError("time must be nonnegative");
    if (depth_cap < 1) throw SpecError("depth_cap must be positive");
    if (model.dimension() != 1) throw SpecError("the kinetic evolution is one-dimensional");
    if (model.has_shift()) throw SpecError("the collision kernel must have C = 0");
    switch (model.kind()) {
        case ModelKind::Kac:
        case ModelKind::InelasticKac:
            return;  // exactly two children almost surely
        case ModelKind::DeterministicSplit:
            if (model.outcomes().front().weights.size() < 2)
                throw SpecError("the collision kernel needs a fixed N >= 2");
            return;
        case ModelKind::FiniteMixture: {
            const std::size_t n0 = model.outcomes().front().weights.size();
            if (n0 < 2) throw SpecError("the collision kernel needs a fixed N >= 2");
            for (const auto& o : model.outcomes())
                if (o.weights.size() != n0)
                    throw SpecError("the collision kernel needs a fixed number of children");
            return;
        }
        case ModelKind::Custom:
            throw SpecError("custom kernels are not supported by the kinetic module");
    }
}

namespace {

struct Branch {
    double remaining;
    double weight;
    int depth;
};

double wild_draw_impl(const WeightModel& model, const ScalarSampler& initial, double time,
                      int depth_cap, Rng& rng, bool& flagged) {
    if (time == 0.0) return initial(rng);
    double total = 0.0;
    std::vector<Branch> stack{{time, 1.0, 0}};
    while (!stack.empty()) {
        const Branch b = stack.back();
        stack.pop_back();
        if (b.remaining == 0.0) {
            total += b.weight * initial(rng);
            continue;
        }
        // a single uniform decides both the survival coin and, conditionally,
        // the collision time: u in [e^{-t}, 1) maps to s = t + log(u)
        const double u = rng.u01_pos();
        const double survive = std::exp(-b.remaining);
        if (u < survive) {
            total += b.weight * initial(rng);
            continue;
        }
        if (b.depth >= depth_cap) {
            flagged = true;
            total += b.weight * initial(rng);
            continue;
        }
        const double s = std::max(b.remaining + std::log(u), 0.0);
        const WeightDraw draw = model.sample(rng);
        for (auto it = draw.terms.rbegin(); it != draw.terms.rend(); ++it)
            stack.push_back({s, b.weight * it->value, b.depth + 1});
    }
    return total;
}

}  // namespace

WildDraw wild_sample(const KineticConfig& cfg, Rng& rng) {
    cfg.validate();
    WildDraw out;
    out.x = wild_draw_impl(cfg.model, cfg.initial, cfg.time, cfg.depth_cap, rng, out.flagged);
    return out;
}

Population evolve_population(const KineticConfig& cfg, const std::vector<double>& checkpoints,
                             Rng& rng,
                             const std::function<void(double, const Population&)>& on_checkpoint) {
    cfg.validate();
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
        if (checkpoints[i] <= checkpoints[i - 1])
            throw SpecError("checkpoints must be strictly increasing");
    if (!checkpoints.empty() && checkpoints.front() < 0.0)
        throw SpecError("checkpoints must be nonnegative");

    Population pop;
    pop.values.resize(cfg.n_samples);
    double prev_t = 0.0;
    bool first = true;
    std::size_t step_index = 0;
    for (double t : checkpoints) {
        const double dt = t - prev_t;
        std::vector<double> next(cfg.n_samples);
        ScalarSampler source;
        if (first) {
            source = cfg.initial;
        } else {
            const std::vector<double>& prev = pop.values;
            source = [&prev](Rng& r) { return prev[r.uniform_index(prev.size())]; };
        }
        // one substream per (step, sample): draws do not depend on scheduling
        Rng step_rng = rng.substream(step_index++);
        std::size_t flagged = 0;
        for (std::size_t i = 0; i < cfg.n_samples; ++i) {
            Rng sub = step_rng.substream(i);
            bool flag = false;
            next[i] = wild_draw_impl(cfg.model, source, dt, cfg.depth_cap, sub, flag);
            if (flag) ++flagged;
        }
        pop.values = std::move(next);
        pop.flagged_fraction =
            static_cast<double>(flagged) / static_cast<double>(cfg.n_samples);
        prev_t = t;
        first = false;
        if (on_checkpoint) on_checkpoint(t, pop);
    }
    return pop;
}

std::vector<RelaxPoint> relax_to_stationary(const KineticConfig& cfg,
                                            const std::vector<double>& times, Rng& rng) {
    cfg.validate();
    const bool normal_target =
        cfg.model.kind() == ModelKind::Kac && cfg.model.beta() == 1.0;

    // conserved scale for the elastic kernel: E[X^2] of the initial law
    double sigma = 1.0;
    if (normal_target) {
        Rng probe = rng.substream(9001);
        double s2 = 0.0;
        const std::size_t n_probe = std::max<std::size_t>(cfg.n_samples, 2000);
        for (std::size_t i = 0; i < n_probe; ++i) {
            const double x = cfg.initial(probe);
            s2 += x * x;
        }
        sigma = std::sqrt(s2 / static_cast<double>(n_probe));
    }

    std::vector<RelaxPoint> ladder;
    std::vector<std::vector<double>> snapshots;
    Rng evolve_rng = rng.substream(1);
    evolve_population(cfg, times, evolve_rng, [&](double t, const Population& pop) {
        ladder.push_back({t, 0.0, pop.flagged_fraction});
        snapshots.push_back(pop.values);
    });

    if (normal_target) {
        for (std::size_t i = 0; i < ladder.size(); ++i) {
            const double s = sigma;
            ladder[i].ks = ks_distance_cdf(snapshots[i], [s](double x) {
                return 0.5 * std::erfc(-x / (s * std::sqrt(2.0)));
            });
        }
        return ladder;
    }

    // fit the stable scale on the final population: |CF(1)| = exp(-c)
    const double alpha = 2.0 / cfg.model.beta();
    const std::vector<double>& last = snapshots.back();
    double cr = 0.0, ci = 0.0;
    for (double x : last) {
        cr += std::cos(x);
        ci += std::sin(x);
    }
    const double mod =
        std::sqrt(cr * cr + ci * ci) / static_cast<double>(last.size());
    const double c = -std::log(std::max(mod, 1e-12));
    const double scale = std::pow(c, 1.0 / alpha);

    Rng target_rng = rng.substream(2);
    std::vector<double> target(100000);
    for (double& x : target) x = scale * sample_symmetric_stable(alpha, target_rng);
    for (std::size_t i = 0; i < ladder.size(); ++i)
        ladder[i].ks = ks_distance(snapshots[i], target);
    return ladder;
}

}  // namespace smoothfix
