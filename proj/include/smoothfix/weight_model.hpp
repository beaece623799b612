#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smoothfix/common.hpp"
#include "smoothfix/rng.hpp"

namespace smoothfix {

/// One nonzero weight with its original child index (1-based, Ulam-Harris).
struct WeightTerm {
    int index;
    double value;
};

/// One realization of the driving sequence (C, T): the shift vector C and
/// the finitely many nonzero weights with strictly increasing indices.
struct WeightDraw {
    Vec shift;
    std::vector<WeightTerm> terms;

    std::size_t fanout() const { return terms.size(); }
};

enum class ModelKind { DeterministicSplit, FiniteMixture, Kac, InelasticKac, Custom };

std::string to_string(ModelKind kind);

/// One branch of a finite mixture: with probability `prob` the draw emits
/// exactly these weights (zeros removed) and this shift.
struct MixtureOutcome {
    double prob = 1.0;
    std::vector<double> weights;
    Vec shift;  // empty means zero shift
};

/// A sampleable law of (C, T1, T2, ...). Every draw has finitely many
/// nonzero weights. Kac kinds have T1 = sin(theta)|sin(theta)|^{beta-1},
/// T2 = cos(theta)|cos(theta)|^{beta-1} with theta uniform on [0, 2*pi).
class WeightModel {
public:
    using CustomSampler = std::function<WeightDraw(Rng&)>;

    static WeightModel deterministic_split(std::vector<double> weights, int d = 1, Vec shift = {});
    static WeightModel finite_mixture(std::vector<MixtureOutcome> outcomes, int d = 1);
    static WeightModel kac(double beta = 1.0);
    static WeightModel inelastic_kac(double beta);
    static WeightModel custom(CustomSampler sampler, int d, bool lattice_free, int max_children_hint);

    WeightDraw sample(Rng& rng) const;

    ModelKind kind() const { return kind_; }
    int dimension() const { return dimension_; }
    double beta() const { return beta_; }
    const std::vector<MixtureOutcome>& outcomes() const { return outcomes_; }

    /// User attestation that the weights do not generate a discrete group.
    bool declared_lattice_free() const { return declared_lattice_free_; }
    WeightModel& attest_lattice_free(bool v) {
        declared_lattice_free_ = v;
        return *this;
    }

    /// True when the step law -log|T| has a continuous component by
    /// construction (Kac kinds); used for the spread-out part of (A5).
    bool continuous_step() const { return continuous_step_; }

    /// 0 means unbounded.
    int max_children_hint() const { return max_children_hint_; }

    bool has_shift() const { return has_shift_; }

    /// Closed-form m(gamma) = E[sum_j |T_j|^gamma] for deterministic-split
    /// and Kac kinds; nullopt for kinds solved by Monte Carlo.
    std::optional<double> analytic_m(double gamma) const;

    std::string describe() const;

private:
    WeightModel() = default;

    ModelKind kind_ = ModelKind::DeterministicSplit;
    int dimension_ = 1;
    double beta_ = 1.0;
    std::vector<MixtureOutcome> outcomes_;
    std::vector<double> cumulative_;  // mixture CDF
    CustomSampler custom_;
    bool declared_lattice_free_ = false;
    bool continuous_step_ = false;
    int max_children_hint_ = 0;
    bool has_shift_ = false;
};

/// Kac weight pair for a fixed angle; zero weights are dropped, indices kept.
std::vector<WeightTerm> kac_terms(double beta, double theta);

struct MEstimate {
    double mean = 0.0;
    double stderr = 0.0;
    bool infinite = false;
    std::size_t n_samples = 0;
};

/// Monte Carlo estimate of m(gamma); uses the closed form (stderr 0) when the
/// kind has one. A running mean above `infinity_cap` sets the infinite flag.
MEstimate estimate_m(const WeightModel& model, double gamma, std::size_t n_samples, Rng& rng,
                     double infinity_cap = 1e12);

/// Pre-drawn |T| values for common-random-number evaluation of m at many
/// gamma; keeps the estimate monotone in gamma draw-by-draw under (A6).
struct WeightTable {
    std::vector<std::vector<double>> abs_values;

    MEstimate evaluate(double gamma, double infinity_cap = 1e12) const;
};

WeightTable draw_weight_table(const WeightModel& model, std::size_t n, Rng& rng);

struct AlphaSolve {
    double alpha = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    bool analytic = false;
    double residual = 0.0;               ///< |m(alpha) - 1| at the root
    double m_stderr = 0.0;               ///< MC stderr of m near the root (0 if analytic)
    std::vector<double> a3_violations;   ///< sampled theta in [0, alpha) with m(theta) <= 1
};

/// Locates the characteristic index: the root of m(alpha) = 1. Analytic kinds
/// are solved on the closed form to `tol_analytic`; Monte Carlo kinds by
/// bisection on a common-random-number table to `tol_mc`. Also spot-checks
/// m(theta) > 1 on [0, alpha) per the second clause of (A3).
AlphaSolve solve_characteristic_index(const WeightModel& model, Rng& rng,
                                      double tol_analytic = 1e-6, double tol_mc = 1e-3,
                                      std::size_t mc_samples = 400000, double scan_hi = 64.0);

enum class SignCase { I, II, III };

std::string to_string(SignCase c);

struct CaseLabel {
    SignCase label = SignCase::I;
    double p = 1.0;  ///< renormalized so p + q = 1
    double q = 0.0;
    double raw_sum = 1.0;  ///< p + q before renormalization
    double stderr = 0.0;
};

/// Estimates the tilted sign masses p, q at the characteristic index and
/// classifies the case. Case I/II is declared when the opposing mass is
/// below max(1e-3, 3*stderr).
CaseLabel compute_pq(const WeightModel& model, double alpha, std::size_t n_samples, Rng& rng);

enum class CheckStatus { Verified, Attested, EstimatedPass, EstimatedFail, NotCheckable };

std::string to_string(CheckStatus s);

struct AssumptionCheck {
    std::string id;
    CheckStatus status = CheckStatus::NotCheckable;
    double value = 0.0;
    double stderr = 0.0;
    std::string evidence;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;

    const AssumptionCheck& at(const std::string& id) const;
    bool all_pass_or_attested() const;
    std::string to_json() const;
};

/// Sample-based screening of (A1)-(A6) at the given characteristic index.
/// A1 is attested or heuristically screened, never verified; the spread-out
/// part of (A5) is attested for continuous-step kinds and not checkable
/// otherwise.
AssumptionReport check_assumptions(const WeightModel& model, double alpha, Rng& rng,
                                   std::size_t n_samples = 20000);

/// Lattice screen: true when the sampled log|T| values all sit on a common
/// grid h*Z with h above tolerance. Can only raise suspicion, never certify
/// lattice-freeness.
bool lattice_suspected(const std::vector<double>& log_abs_weights, double tol = 1e-9);

}  // namespace smoothfix
