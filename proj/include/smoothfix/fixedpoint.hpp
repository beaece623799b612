#pragma once

#include <functional>
#include <optional>

#include "smoothfix/branching.hpp"
#include "smoothfix/common.hpp"
#include "smoothfix/rng.hpp"
#include "smoothfix/stable.hpp"
#include "smoothfix/weight_model.hpp"

namespace smoothfix {

using VectorSampler = std::function<Vec(Rng&)>;

/// Identifies one fixed point: the driving model, its characteristic index
/// and sign case, the stable mixing component, and the shift where the
/// regime admits one. The constructed law is W*_n + [Z_n a] + W_n^{1/alpha} Y.
struct FixedPointSpec {
    WeightModel model;
    double alpha = 1.0;
    SignCase sign_case = SignCase::I;
    StableLawSpec stable;  ///< the Y component; its own shift must be empty
    Vec shift;             ///< a; allowed only in the regimes that carry one
    int tree_depth = 12;
    bool w_normalized = true;     ///< E[W] = 1 convention
    bool include_z_term = false;  ///< multiply the shift by Z_n (alpha > 1 regimes)
    bool z1_identically_one = false;  ///< attestation needed for a shift when alpha > 2

    /// Enforces the regime gates: symmetric sigma in Cases II/III, no shift
    /// for alpha <= 1 outside Case I at alpha = 1, Z-shift only for
    /// alpha > 1, null stable part above alpha 2. Also refuses models
    /// without a lattice-freeness attestation.
    void validate() const;

    /// log CF of the construction conditioned on W = 1, Z = 1, W* = 0; the
    /// deterministic exponent used for analytic CF fallbacks.
    Complex conditional_cf_exponent(const Vec& t) const;
};

struct FixedPointDiagnostics {
    double w_n = 1.0;
    double z_n = 1.0;
    Vec wstar_n;
    bool truncated = false;
};

struct FixedPointSample {
    Vec x;
    FixedPointDiagnostics diag;
};

/// One draw of W*_n + [Z_n a] + W_n^{1/alpha} Y with all tree functionals
/// coming from a single realized tree; Y uses a separate substream so the
/// stable component stays independent of the weights.
FixedPointSample sample_fixed_point(const FixedPointSpec& spec, Rng& rng);

/// Same, also returning the realized tree (diagnostics stay coupled to it).
FixedPointSample sample_fixed_point(const FixedPointSpec& spec, Rng& rng, WeightedTree& tree_out);

/// One application of the smoothing transform: sum_j T_j X^(j) + C with a
/// fresh weight draw and i.i.d. input draws.
Vec smoothing_step(const WeightModel& model, const VectorSampler& input, Rng& rng);

/// n-fold application realized by a depth-n tree per draw:
/// sum_{|v|=n} L(v) X^(v) + sum_{|v|<n} L(v) C(v).
VectorSampler iterate_smoothing(const WeightModel& model, VectorSampler input, int n_iters,
                                std::size_t node_cap = kDefaultNodeCap);

}  // namespace smoothfix
