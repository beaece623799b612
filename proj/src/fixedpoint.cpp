#include "smoothfix/fixedpoint.hpp"

#include <cmath>

namespace smoothfix {

void FixedPointSpec::validate() const {
    if (!(alpha > 0.0)) throw SpecError("characteristic index must be positive");
    if (!model.declared_lattice_free())
        throw SpecError("fixed-point construction refuses models without a lattice-freeness attestation");
    if (!shift.empty() && static_cast<int>(shift.size()) != model.dimension())
        throw SpecError("shift dimension mismatch");
    if (!stable.shift.empty())
        throw SpecError("the stable component must be unshifted; put the shift on the fixed-point spec");

    const bool has_shift = !shift.empty() && std::any_of(shift.begin(), shift.end(),
                                                         [](double a) { return a != 0.0; });
    const bool mixed_group = sign_case != SignCase::I;
    const bool stable_null =
        stable.regime == StableRegime::Gaussian
            ? std::all_of(stable.gaussian_cov.begin(), stable.gaussian_cov.end(),
                          [](double v) { return v == 0.0; })
            : stable.sigma.size() == 0;

    if (alpha > 2.0) {
        if (!stable_null)
            throw SpecError("no stable component exists for alpha > 2; solutions are shifts only");
        if (has_shift && !z1_identically_one)
            throw SpecError("a shift for alpha > 2 requires Z_1 = 1 almost surely");
        return;
    }
    if (!stable_null) stable.validate();

    if (mixed_group) {
        if (alpha == 2.0) {
            if (!stable_null && stable.regime != StableRegime::Gaussian)
                throw SpecError("alpha = 2 uses the gaussian regime");
        } else if (!stable_null && stable.regime != StableRegime::Symmetric) {
            throw SpecError("Cases II/III admit only symmetric spectral measures");
        }
        if (alpha <= 1.0 && has_shift)
            throw SpecError("no shift term exists for alpha <= 1 with mixed or negative signs");
        if (has_shift && !include_z_term)
            throw SpecError("a shift for mixed signs with 1 < alpha <= 2 enters through Z");
    } else {
        if (alpha == 1.0) {
            if (!stable_null && stable.regime != StableRegime::AlphaOneCentered)
                throw SpecError("Case I at alpha = 1 uses the alpha1-centered regime");
        } else if (alpha == 2.0) {
            if (!stable_null && stable.regime != StableRegime::Gaussian)
                throw SpecError("alpha = 2 uses the gaussian regime");
        } else {
            if (!stable_null && stable.regime != StableRegime::Skewed &&
                stable.regime != StableRegime::Symmetric)
                throw SpecError("Case I away from alpha in {1,2} uses the skewed exponent");
            if (has_shift)
                throw SpecError("Case I admits a shift only at alpha = 1 (with W) or alpha >= 2 (with Z)");
        }
    }
    if (include_z_term && alpha <= 1.0)
        throw SpecError("the Z shift term exists only for alpha > 1");
    if (alpha == 2.0 && has_shift && !include_z_term)
        throw SpecError("a shift at alpha = 2 enters through Z");
}

Complex FixedPointSpec::conditional_cf_exponent(const Vec& t) const {
    Complex e = alpha > 2.0 ? Complex{0.0, 0.0} : stable_cf_exponent(stable, t);
    if (!shift.empty()) e += Complex{0.0, dot(shift, t)};
    return e;
}

FixedPointSample sample_fixed_point(const FixedPointSpec& spec, Rng& rng, WeightedTree& tree_out) {
    spec.validate();
    Rng tree_rng = rng.substream(0);
    Rng stable_rng = rng.substream(1);

    tree_out = grow(spec.model, spec.tree_depth, tree_rng);
    const MartingaleTrace trace = martingale_trace(tree_out, spec.alpha);
    const int n = static_cast<int>(trace.w.size()) - 1;

    FixedPointSample out;
    out.diag.w_n = trace.w[static_cast<std::size_t>(n)];
    out.diag.z_n = trace.z[static_cast<std::size_t>(n)];
    out.diag.wstar_n = trace.wstar[static_cast<std::size_t>(n)];
    out.diag.truncated = tree_out.truncated;

    const std::size_t d = static_cast<std::size_t>(spec.model.dimension());
    out.x = out.diag.wstar_n;
    out.x.resize(d, 0.0);

    const bool has_shift = !spec.shift.empty();
    if (spec.alpha > 2.0) {
        if (has_shift) axpy(1.0, spec.shift, out.x);
        return out;
    }

    const double w_scale = std::pow(out.diag.w_n, 1.0 / spec.alpha);
    if (has_shift) {
        if (spec.include_z_term)
            axpy(out.diag.z_n, spec.shift, out.x);
        else
            // Case I at alpha = 1: the shift rides with W
            axpy(out.diag.w_n, spec.shift, out.x);
    }
    const Vec y = sample_stable(spec.stable, stable_rng);
    axpy(w_scale, y, out.x);
    return out;
}

FixedPointSample sample_fixed_point(const FixedPointSpec& spec, Rng& rng) {
    WeightedTree scratch;
    return sample_fixed_point(spec, rng, scratch);
}

Vec smoothing_step(const WeightModel& model, const VectorSampler& input, Rng& rng) {
    const WeightDraw draw = model.sample(rng);
    Vec x = draw.shift;
    for (const auto& term : draw.terms) {
        const Vec xi = input(rng);
        axpy(term.value, xi, x);
    }
    return x;
}

VectorSampler iterate_smoothing(const WeightModel& model, VectorSampler input, int n_iters,
                                std::size_t node_cap) {
    if (n_iters < 1) throw SpecError("iterate_smoothing needs n_iters >= 1");
    return [model, input = std::move(input), n_iters, node_cap](Rng& rng) -> Vec {
        const WeightedTree tree = grow(model, n_iters, rng, node_cap);
        if (tree.truncated)
            throw EstimationError("iterate_smoothing: tree hit the node cap; raise it or lower n");
        const std::size_t d = static_cast<std::size_t>(model.dimension());
        Vec x = zeros(d);
        const int last = tree.grown_generation();
        for (std::uint32_t v = tree.gen_begin[last]; v < tree.gen_begin[last + 1]; ++v) {
            const Vec xi = input(rng);
            axpy(tree.signed_l(v), xi, x);
        }
        if (tree.has_shift) {
            for (int g = 0; g < last; ++g) {
                for (std::uint32_t v = tree.gen_begin[g]; v < tree.gen_begin[g + 1]; ++v) {
                    const double lv = tree.signed_l(v);
                    const double* c = tree.shift_of(v);
                    for (std::size_t k = 0; k < d; ++k) x[k] += lv * c[k];
                }
            }
        }
        return x;
    };
}

}  // namespace smoothfix
