#pragma once

#include <functional>
#include <vector>

#include "smoothfix/common.hpp"
#include "smoothfix/rng.hpp"
#include "smoothfix/weight_model.hpp"

namespace smoothfix {

using ScalarSampler = std::function<double(Rng&)>;

/// Kinetic-type evolution driven by a collision kernel with C = 0 and a
/// fixed number of children per collision.
struct KineticConfig {
    WeightModel model;
    ScalarSampler initial;
    double time = 0.0;
    std::size_t n_samples = 1000;
    int depth_cap = 40;

    void validate() const;
};

struct WildDraw {
    double x = 0.0;
    bool flagged = false;  ///< recursion hit depth_cap; the draw is biased
};

/// One draw from the time-t law via the randomly stopped recursive collision
/// tree: a branch at remaining time t terminates with probability e^{-t}
/// and emits an initial draw, otherwise it collides at an exponential-clock
/// time and combines child draws with fresh weights. At t = 0 this is a
/// plain initial draw on the same stream.
WildDraw wild_sample(const KineticConfig& cfg, Rng& rng);

struct Population {
    std::vector<double> values;
    double flagged_fraction = 0.0;
};

/// Evolves a whole population to time cfg.time by composing exact recursive
/// steps over [t_k, t_{k+1}]: the increment's initial draws resample the
/// previous population, so the per-sample tree size stays geometric in the
/// step length rather than in the total time.
Population evolve_population(const KineticConfig& cfg, const std::vector<double>& checkpoints,
                             Rng& rng, const std::function<void(double, const Population&)>& on_checkpoint = {});

struct RelaxPoint {
    double t = 0.0;
    double ks = 0.0;
    double flagged_fraction = 0.0;
};

/// Distance-to-stationary ladder. The target law is the centered normal with
/// the conserved scale for beta = 1 and the symmetric 2/beta-stable family
/// with scale fitted from the final-time CF at t* = 1 for beta != 1.
std::vector<RelaxPoint> relax_to_stationary(const KineticConfig& cfg,
                                            const std::vector<double>& times, Rng& rng);

}  // namespace smoothfix
